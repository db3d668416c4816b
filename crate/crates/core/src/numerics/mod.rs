//! Small dense numerical kernels used throughout the pipeline.
//!
//! Everything here works on tiny fixed-size problems (cubics, 4x4 and 16x16
//! matrices), so the implementations favour determinism and accuracy over
//! asymptotic performance.

mod eigen;
mod linear;
mod ode;
mod peaks;
mod poly;

pub use eigen::{eig4, eigenvalues, symmetric_eigenvalues};
pub use linear::solve_linear;
pub use ode::{integrate_covariance_ode, integrate_linear_ode};
pub use peaks::find_local_maxima;
pub use poly::{real_roots_cubic, Polynomial3};

/// Row-major 4x4 real matrix.
pub type Mat4 = [[f64; 4]; 4];

/// Tolerance table shared by every kernel and by the physics modules.
pub mod tol {
    /// Polished cubic roots satisfy `|p(r)| <= ROOT_RESIDUAL * max_i |c_i r^i|`.
    pub const ROOT_RESIDUAL: f64 = 1e-10;
    /// Roots closer than `ROOT_MERGE * max(1, |r|)` are merged.
    pub const ROOT_MERGE: f64 = 1e-6;
    /// Companion eigenvalues with `|Im| <= IMAG_CUTOFF * max(1, |lambda|)` are root candidates.
    pub const IMAG_CUTOFF: f64 = 1e-6;
    /// `| |a_s|^2 - x | <= SELF_CONSISTENCY * x` for a steady-state branch.
    pub const SELF_CONSISTENCY: f64 = 1e-8;
    /// Lyapunov residual relative to `|M|_F |V|_F + |D|_F`.
    pub const LYAPUNOV_RESIDUAL: f64 = 1e-10;
    /// Smallest admissible eigenvalue of `V + i Omega / 2`.
    pub const PHYSICALITY: f64 = 1e-10;
    /// Relative depth a peak must exceed the valley by to count as split.
    pub const NMS_DEPTH: f64 = 0.05;
    /// Maximum RK4 step in units of `1 / |M|_F`.
    pub const RK4_STEP: f64 = 0.1;
    /// Maximum QR sweeps per eigenvalue.
    pub const QR_MAX_ITERS: usize = 60;
}

pub(crate) fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            for j in 0..4 {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub(crate) fn mat4_transpose(a: &Mat4) -> Mat4 {
    let mut t = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            t[j][i] = a[i][j];
        }
    }
    t
}

/// Frobenius norm of a 4x4 matrix.
pub fn frobenius(a: &Mat4) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Determinant of a 4x4 matrix by cofactor expansion along 2x2 minors.
pub fn det4(m: &Mat4) -> f64 {
    let s0 = m[0][0] * m[1][1] - m[1][0] * m[0][1];
    let s1 = m[0][0] * m[1][2] - m[1][0] * m[0][2];
    let s2 = m[0][0] * m[1][3] - m[1][0] * m[0][3];
    let s3 = m[0][1] * m[1][2] - m[1][1] * m[0][2];
    let s4 = m[0][1] * m[1][3] - m[1][1] * m[0][3];
    let s5 = m[0][2] * m[1][3] - m[1][2] * m[0][3];
    let c5 = m[2][2] * m[3][3] - m[3][2] * m[2][3];
    let c4 = m[2][1] * m[3][3] - m[3][1] * m[2][3];
    let c3 = m[2][1] * m[3][2] - m[3][1] * m[2][2];
    let c2 = m[2][0] * m[3][3] - m[3][0] * m[2][3];
    let c1 = m[2][0] * m[3][2] - m[3][0] * m[2][2];
    let c0 = m[2][0] * m[3][1] - m[3][0] * m[2][1];
    s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
}

//! Linearized fluctuation dynamics around a steady state.
//!
//! Quadratures are ordered `(X_b, P_b, X_a, P_a)`: mechanical position and
//! momentum first, then the cavity field.

use crate::error::{Error, Result};
use crate::numerics::{eig4, Mat4};
use crate::params::EffectiveParams;

/// The two numbers that fix the linearized dynamics around a steady state:
/// the effective detuning `Delta~ = Delta + g_1` and the enhanced coupling
/// `g_2 = g_o |a_s|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub delta_tilde: f64,
    pub g2: f64,
}

impl OperatingPoint {
    pub fn new(delta_tilde: f64, g2: f64) -> Self {
        Self { delta_tilde, g2 }
    }

    pub fn rescale(&self, s: f64) -> Self {
        Self { delta_tilde: self.delta_tilde * s, g2: self.g2 * s }
    }
}

/// Drift matrix of the quadrature equations of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub Mat4);

/// Diagonal diffusion matrix of the quadrature noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix(pub Mat4);

impl DriftMatrix {
    pub fn as_mat(&self) -> &Mat4 {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// Row-major CSV, one matrix row per line.
    pub fn to_csv(&self) -> String {
        mat_csv(&self.0)
    }
}

impl DiffusionMatrix {
    pub fn as_mat(&self) -> &Mat4 {
        &self.0
    }

    pub fn diagonal(&self) -> [f64; 4] {
        [self.0[0][0], self.0[1][1], self.0[2][2], self.0[3][3]]
    }

    pub fn to_csv(&self) -> String {
        mat_csv(&self.0)
    }
}

fn mat_csv(m: &Mat4) -> String {
    m.iter()
        .map(|row| row.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Drift matrix for effective detuning `delta_tilde` and coupling `g2`.
///
/// ```text
/// [ -Gamma    omega_m   0        0       ]
/// [ -omega_m  -Gamma    -2 g2    0       ]
/// [ 0         0         -gamma   Delta~  ]
/// [ -2 g2     0         -Delta~  -gamma  ]
/// ```
///
/// Both radiation-pressure couplings carry the same sign, as they do in the
/// quadrature equations of motion.
pub fn drift_matrix(delta_tilde: f64, omega_m: f64, gamma: f64, gamma_m: f64, g2: f64) -> DriftMatrix {
    let c = 2.0 * g2;
    DriftMatrix([
        [-gamma_m, omega_m, 0.0, 0.0],
        [-omega_m, -gamma_m, -c, 0.0],
        [0.0, 0.0, -gamma, delta_tilde],
        [-c, 0.0, -delta_tilde, -gamma],
    ])
}

/// `Diag[Gamma (2 n_b + 1), Gamma (2 n_b + 1), gamma (2 n_a + 1), gamma (2 n_a + 1)]`.
pub fn diffusion_matrix(gamma: f64, gamma_m: f64, n_a: f64, n_b: f64) -> DiffusionMatrix {
    let mech = gamma_m * (2.0 * n_b + 1.0);
    let opt = gamma * (2.0 * n_a + 1.0);
    let mut d = [[0.0; 4]; 4];
    d[0][0] = mech;
    d[1][1] = mech;
    d[2][2] = opt;
    d[3][3] = opt;
    DiffusionMatrix(d)
}

/// Drift matrix for `eff` linearized at `op`.
pub fn drift_for(eff: &EffectiveParams, op: OperatingPoint) -> DriftMatrix {
    drift_matrix(op.delta_tilde, eff.omega_m, eff.gamma, eff.gamma_m, op.g2)
}

pub fn diffusion_for(eff: &EffectiveParams) -> DiffusionMatrix {
    diffusion_matrix(eff.gamma, eff.gamma_m, eff.n_a, eff.n_b)
}

/// Closed-form stability bound `2 |g_2| < sqrt((Delta~^2 + gamma^2) omega_m / |Delta~|)`.
///
/// This is the static (zero-frequency) Routh-Hurwitz condition. It is the
/// binding one for `Delta~ > 0`; for `Delta~ < 0` the dynamical condition can
/// fail first and only [`eigen_stable`] is reliable.
pub fn routh_hurwitz_stable(delta_tilde: f64, omega_m: f64, gamma: f64, g2: f64) -> Result<bool> {
    if delta_tilde == 0.0 {
        return Err(Error::CriterionUndefined);
    }
    Ok(2.0 * g2.abs() < routh_hurwitz_bound(delta_tilde, omega_m, gamma))
}

/// Right-hand side of [`routh_hurwitz_stable`].
pub fn routh_hurwitz_bound(delta_tilde: f64, omega_m: f64, gamma: f64) -> f64 {
    ((delta_tilde * delta_tilde + gamma * gamma) * omega_m / delta_tilde.abs()).sqrt()
}

/// Largest real part among the eigenvalues of `m`.
pub fn max_real_eigenvalue(m: &DriftMatrix) -> Result<f64> {
    Ok(eig4(&m.0)?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// `true` iff every eigenvalue of `m` has strictly negative real part.
pub fn eigen_stable(m: &DriftMatrix) -> Result<bool> {
    Ok(max_real_eigenvalue(m)? < 0.0)
}

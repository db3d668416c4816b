//! Steady-state covariance matrix and cavity-ion entanglement.

use crate::error::{Error, Result};
use crate::langevin::{diffusion_for, drift_for, max_real_eigenvalue, DiffusionMatrix, DriftMatrix, OperatingPoint};
use crate::numerics::{frobenius, mat4_mul, mat4_transpose, solve_linear, symmetric_eigenvalues, tol, Mat4};
use crate::parallel::map_ordered;
use crate::params::EffectiveParams;
use crate::steady_state::{steady_branches, BranchPolicy, DriveOffset};

/// Symplectic form for two modes, `[[0, 1], [-1, 0]]` on each block.
pub const OMEGA: Mat4 = [
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
];

/// Two-mode covariance matrix `V = [[X, Z], [Z^T, Y]]` with the mechanical
/// mode first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(pub Mat4);

/// Unevaluated sum `hi + lo` carrying roughly twice the precision of `f64`.
/// Determinants of strongly squeezed states cancel heavily; the minors and
/// their combinations are accumulated in this form.
#[derive(Debug, Clone, Copy)]
struct Dd(f64, f64);

impl Dd {
    fn prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd(p, a.mul_add(b, -p))
    }

    fn add(self, o: Dd) -> Dd {
        let s = self.0 + o.0;
        let bb = s - self.0;
        let err = (self.0 - (s - bb)) + (o.0 - bb);
        let lo = err + self.1 + o.1;
        let hi = s + lo;
        Dd(hi, lo - (hi - s))
    }

    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = Dd::prod(self.0, o.0);
        let lo = p.1 + self.0 * o.1 + self.1 * o.0;
        let hi = p.0 + lo;
        Dd(hi, lo - (hi - p.0))
    }

    fn scale(self, k: f64) -> Dd {
        self.mul(Dd(k, 0.0))
    }

    fn value(self) -> f64 {
        self.0 + self.1
    }
}

impl CovarianceMatrix {
    pub fn as_mat(&self) -> &Mat4 {
        &self.0
    }

    /// Minor on rows `(r0, r1)` and columns `(c0, c1)`.
    fn minor(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Dd {
        let v = &self.0;
        Dd::prod(v[r0][c0], v[r1][c1]).add(Dd::prod(v[r0][c1], v[r1][c0]).neg())
    }

    fn sigma_dd(&self) -> Dd {
        self.minor(0, 1, 0, 1).add(self.minor(2, 3, 2, 3)).add(self.minor(0, 1, 2, 3).scale(-2.0))
    }

    /// Laplace expansion along the first two rows.
    fn det_dd(&self) -> Dd {
        let pairs = [((0, 1), (2, 3), 1.0), ((0, 2), (1, 3), -1.0), ((0, 3), (1, 2), 1.0), ((1, 2), (0, 3), 1.0), ((1, 3), (0, 2), -1.0), ((2, 3), (0, 1), 1.0)];
        pairs.iter().fold(Dd(0.0, 0.0), |acc, &((a, b), (c, d), sign)| {
            acc.add(self.minor(0, 1, a, b).mul(self.minor(2, 3, c, d)).scale(sign))
        })
    }

    pub fn det_x(&self) -> f64 {
        self.minor(0, 1, 0, 1).value()
    }

    pub fn det_y(&self) -> f64 {
        self.minor(2, 3, 2, 3).value()
    }

    pub fn det_z(&self) -> f64 {
        self.minor(0, 1, 2, 3).value()
    }

    pub fn det(&self) -> f64 {
        self.det_dd().value()
    }

    /// `Sigma(V) = det X + det Y - 2 det Z`.
    pub fn sigma(&self) -> f64 {
        self.sigma_dd().value()
    }

    /// Smallest eigenvalue of `V + i Omega / 2`; negative means unphysical.
    pub fn physicality_margin(&self) -> Result<f64> {
        // Hermitian A + iB embedded as the real symmetric [[A, -B], [B, A]].
        let mut h = vec![0.0; 64];
        for i in 0..4 {
            for j in 0..4 {
                let a = self.0[i][j];
                let b = 0.5 * OMEGA[i][j];
                h[i * 8 + j] = a;
                h[(i + 4) * 8 + j + 4] = a;
                h[i * 8 + j + 4] = -b;
                h[(i + 4) * 8 + j] = b;
            }
        }
        Ok(symmetric_eigenvalues(&h, 8)?[0])
    }

    pub fn is_physical(&self) -> Result<bool> {
        let scale = frobenius(&self.0).max(1.0);
        Ok(self.physicality_margin()? >= -tol::PHYSICALITY * scale)
    }
}

/// Solve `M V + V M^T = -D` for the stationary covariance matrix.
pub fn solve_lyapunov(m: &DriftMatrix, d: &DiffusionMatrix) -> Result<CovarianceMatrix> {
    let re = max_real_eigenvalue(m)?;
    if re >= 0.0 {
        return Err(Error::NoSteadyState(re));
    }
    let (mm, dd) = (m.as_mat(), d.as_mat());
    // Row-major vec(V): unknown 4i+j holds V[i][j].
    let mut a = vec![0.0; 256];
    let mut rhs = vec![0.0; 16];
    for i in 0..4 {
        for j in 0..4 {
            let row = 4 * i + j;
            for k in 0..4 {
                a[row * 16 + 4 * k + j] += mm[i][k];
                a[row * 16 + 4 * i + k] += mm[j][k];
            }
            rhs[row] = -dd[i][j];
        }
    }
    let x = solve_linear(&a, &rhs)?;
    let mut v = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            v[i][j] = 0.5 * (x[4 * i + j] + x[4 * j + i]);
        }
    }
    let res = lyapunov_residual(mm, &v, dd);
    let bound = tol::LYAPUNOV_RESIDUAL * (frobenius(mm) * frobenius(&v) + frobenius(dd));
    if !(res <= bound) {
        return Err(Error::NoConvergence);
    }
    Ok(CovarianceMatrix(v))
}

/// `||M V + V M^T + D||_F`.
pub fn lyapunov_residual(m: &Mat4, v: &Mat4, d: &Mat4) -> f64 {
    let mv = mat4_mul(m, v);
    let vmt = mat4_mul(v, &mat4_transpose(m));
    let mut r = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = mv[i][j] + vmt[i][j] + d[i][j];
        }
    }
    frobenius(&r)
}

/// Smaller symplectic eigenvalue of the partially transposed state,
/// `mu- = 2^{-1/2} [Sigma - (Sigma^2 - 4 det V)^{1/2}]^{1/2}`.
///
/// Fails with [`Error::Unphysical`] when `Sigma^2 < 4 det V` beyond rounding.
pub fn symplectic_min(v: &CovarianceMatrix) -> Result<f64> {
    let sigma = v.sigma_dd();
    let det = v.det_dd();
    let disc = sigma.mul(sigma).add(det.scale(-4.0)).value();
    let scale = sigma.value().powi(2) + 4.0 * det.value().abs();
    if disc < -tol::PHYSICALITY * scale.max(1.0) {
        return Err(Error::Unphysical(format!("Sigma^2 - 4 det V = {disc:e}")));
    }
    // (Sigma - r) / 2 rewritten as 2 det V / (Sigma + r) to avoid cancellation
    // when the two symplectic eigenvalues are far apart.
    let plus = sigma.value() + disc.max(0.0).sqrt();
    let det = det.value();
    if !(plus > 0.0) || !(det > 0.0) {
        return Err(Error::Unphysical(format!("Sigma = {:e}, det V = {det:e}", sigma.value())));
    }
    Ok((2.0 * det / plus).sqrt())
}

/// `E_N = max[0, -ln(2 mu-)]`.
pub fn log_negativity(v: &CovarianceMatrix) -> Result<f64> {
    let mu = symplectic_min(v)?;
    Ok((-(2.0 * mu).ln()).max(0.0))
}

/// Partial-transpose criterion `4 det V < Sigma(V) - 1/4`.
pub fn ppt_entangled(v: &CovarianceMatrix) -> bool {
    v.det_dd().scale(4.0).add(v.sigma_dd().neg()).value() < -0.25
}

/// Stationary covariance for `eff` linearized at `op`.
pub fn steady_covariance(eff: &EffectiveParams, op: OperatingPoint) -> Result<CovarianceMatrix> {
    solve_lyapunov(&drift_for(eff, op), &diffusion_for(eff))
}

/// One detuning of an entanglement sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementRecord {
    pub delta: f64,
    pub delta_tilde: f64,
    pub g2: f64,
    pub stable: bool,
    /// Absent when the linearized dynamics has no steady state.
    pub e_n: Option<f64>,
}

/// Log-negativity along `delta_grid`, linearized around the branch picked by
/// `policy`. Where no branch is stable the smallest root is reported, flagged
/// unstable.
pub fn entanglement_sweep(
    eff: &EffectiveParams,
    delta_grid: &[f64],
    offset: DriveOffset,
    policy: BranchPolicy,
    jobs: usize,
) -> Result<Vec<EntanglementRecord>> {
    map_ordered(delta_grid, jobs, |&delta| -> Result<EntanglementRecord> {
        let e = EffectiveParams { delta, ..*eff };
        let branches = steady_branches(&e, offset)?;
        let chosen = policy.select(&branches).or(branches.first()).ok_or(Error::NoSteadyState(f64::NAN))?;
        let op = chosen.operating_point();
        let e_n = if chosen.stable { Some(log_negativity(&steady_covariance(&e, op)?)?) } else { None };
        Ok(EntanglementRecord { delta, delta_tilde: op.delta_tilde, g2: op.g2, stable: chosen.stable, e_n })
    })
    .into_iter()
    .collect()
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;
    use crate::langevin::{diffusion_matrix, drift_matrix, eigen_stable};
    use crate::numerics::integrate_covariance_ode;
    use crate::params::fixtures::effective;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn product(nb: f64) -> CovarianceMatrix {
        let mut v = [[0.0; 4]; 4];
        v[0][0] = nb + 0.5;
        v[1][1] = nb + 0.5;
        v[2][2] = 0.5;
        v[3][3] = 0.5;
        CovarianceMatrix(v)
    }

    #[test]
    fn decoupled_steady_state() {
        let v = solve_lyapunov(&drift_matrix(5.0, 10.0, 1.0, 0.01, 0.0), &diffusion_matrix(1.0, 0.01, 0.0, 100.0)).unwrap();
        let expect = product(100.0);
        for i in 0..4 {
            for j in 0..4 {
                assert!((v.0[i][j] - expect.0[i][j]).abs() < 1e-9, "{i}{j}");
            }
        }
    }

    #[test]
    fn unstable_drift_rejected() {
        let r = solve_lyapunov(&drift_matrix(10.0, 10.0, 1.0, 0.01, 20.0), &diffusion_matrix(1.0, 0.01, 0.0, 0.0));
        assert!(matches!(r, Err(Error::NoSteadyState(x)) if x > 0.0));
    }

    #[test]
    fn product_state_is_separable() {
        for nb in [0.0, 1.0, 10.0, 1000.0] {
            let v = product(nb);
            assert_eq!(symplectic_min(&v).unwrap(), 0.5);
            assert_eq!(log_negativity(&v).unwrap(), 0.0);
            assert!(!ppt_entangled(&v));
            assert!(v.is_physical().unwrap());
        }
    }

    #[test]
    fn two_mode_squeezed_cases() {
        for r in [0.1, 0.5, 1.0] {
            let v = two_mode_squeezed(r);
            assert!(((symplectic_min(&v).unwrap()) - (-2.0 * r).exp() / 2.0).abs() < 1e-12);
            assert!((log_negativity(&v).unwrap() - 2.0 * r).abs() < 1e-10);
            assert!(ppt_entangled(&v));
            assert!(v.is_physical().unwrap());
        }
    }

    #[test]
    fn unphysical_rejected() {
        let mut v = product(0.0);
        v.0[0][0] = 0.1;
        v.0[1][1] = 0.1;
        assert!(!v.is_physical().unwrap());
        let mut w = two_mode_squeezed(0.5);
        w.0[0][2] *= 3.0;
        w.0[2][0] *= 3.0;
        w.0[1][3] *= 3.0;
        w.0[3][1] *= 3.0;
        assert!(matches!(symplectic_min(&w), Err(Error::Unphysical(_))) || !w.is_physical().unwrap());
    }

    #[test]
    fn random_states_match_spectral_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let v = random_physical(&mut rng);
            assert!(v.is_physical().unwrap());
            let mu = symplectic_min(&v).unwrap();
            let oracle = mu_minus_from_spectrum(&v);
            assert!((mu - oracle).abs() <= 1e-10 * oracle.max(1.0), "{mu} vs {oracle}");
            assert_eq!(ppt_entangled(&v), log_negativity(&v).unwrap() > 0.0);
        }
    }

    #[test]
    fn random_stable_draws_meet_residual_and_physicality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut solved = 0;
        while solved < 300 {
            let m = drift_matrix(rng.random_range(-30.0..30.0), 10.0, 1.0, 0.01, rng.random_range(-4.0..4.0));
            if !eigen_stable(&m).unwrap() {
                continue;
            }
            let d = diffusion_matrix(1.0, 0.01, 0.0, rng.random_range(0.0..100.0));
            let v = solve_lyapunov(&m, &d).unwrap();
            let bound = 1e-10 * (frobenius(&m.0) * frobenius(&v.0) + frobenius(&d.0));
            assert!(lyapunov_residual(&m.0, &v.0, &d.0) <= bound);
            assert!(v.is_physical().unwrap());
            solved += 1;
        }
    }

    #[test]
    fn matches_moment_integration() {
        let m = drift_matrix(10.0, 10.0, 1.0, 0.2, 2.0);
        let d = diffusion_matrix(1.0, 0.2, 0.0, 10.0);
        let v = solve_lyapunov(&m, &d).unwrap();
        let slowest = -max_real_eigenvalue(&m).unwrap();
        let dt = 0.1 / frobenius(&m.0);
        let ode = integrate_covariance_ode(&m.0, &d.0, 50.0 / slowest, dt).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((v.0[i][j] - ode[i][j]).abs() < 1e-6, "{i}{j}: {} vs {}", v.0[i][j], ode[i][j]);
            }
        }
    }

    #[test]
    fn red_sideband_coupling_entangles() {
        let eff = EffectiveParams { n_b: 0.0, ..effective(0.0, -3.0, 0.0) };
        let v = steady_covariance(&eff, OperatingPoint::new(10.0, 2.5)).unwrap();
        assert!(log_negativity(&v).unwrap() > 0.0);
    }

    #[test]
    fn sweep_without_coupling_is_separable() {
        let eff = effective(0.0, 0.0, 10.0);
        let grid: Vec<f64> = (0..41).map(|i| -100.0 + 10.0 * i as f64).collect();
        for rec in entanglement_sweep(&eff, &grid, DriveOffset::Full, BranchPolicy::SmallestStable, 1).unwrap() {
            assert!(rec.stable);
            assert_eq!(rec.e_n, Some(0.0));
        }
    }

    #[test]
    fn sweep_identical_under_coupling_sign() {
        let eff = EffectiveParams { n_b: 10.0, ..effective(0.0, -3.0, 10.0) };
        let flip = EffectiveParams { g0: 3.0, ..eff };
        let grid: Vec<f64> = (0..81).map(|i| -100.0 + 5.0 * i as f64).collect();
        let a = entanglement_sweep(&eff, &grid, DriveOffset::Full, BranchPolicy::SmallestStable, 1).unwrap();
        let b = entanglement_sweep(&flip, &grid, DriveOffset::Full, BranchPolicy::SmallestStable, 3).unwrap();
        assert!(a.iter().any(|r| r.e_n.unwrap_or(0.0) > 0.0));
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.e_n, y.e_n);
            assert_eq!(x.g2, -y.g2);
        }
    }

    proptest! {
        #[test]
        fn invariant_under_rescale_and_coupling_sign(dt in 1.0f64..30.0, g2 in 0.0f64..3.0, nb in 0.0f64..50.0, s in 0.2f64..5.0) {
            let eff = EffectiveParams { n_b: nb, ..effective(0.0, -3.0, 0.0) };
            let op = OperatingPoint::new(dt, g2);
            let m = drift_for(&eff, op);
            prop_assume!(eigen_stable(&m).unwrap());
            let base = log_negativity(&steady_covariance(&eff, op).unwrap()).unwrap();
            let scaled = log_negativity(&steady_covariance(&eff.rescale(s).unwrap(), op.rescale(s)).unwrap()).unwrap();
            let flipped = log_negativity(&steady_covariance(&eff, OperatingPoint::new(dt, -g2)).unwrap()).unwrap();
            prop_assert!((base - scaled).abs() <= 1e-9 * base.max(1e-12) + 1e-12);
            prop_assert_eq!(base, flipped);
        }
    }
}

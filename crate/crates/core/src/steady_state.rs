//! Classical steady state of the driven cavity and the ion motion.
//!
//! Setting the time derivatives of the mean-field equations to zero gives
//!
//! ```text
//! b_s = -i g_o (x + c) / (Gamma + i omega_m)
//! a_s = -eta / (gamma + i (Delta + g_o (b_s + b_s*)))
//! ```
//!
//! with `x = |a_s|^2` and `c = 1` when the constant `-i g_o` drive on the
//! motion is kept (`c = 0` drops it). Eliminating `b_s` gives a cubic in the
//! intracavity photon number,
//!
//! ```text
//! G^2 x^3 - 2 G y x^2 + (gamma^2 + y^2) x - |eta|^2 = 0,
//! G = 2 g_o^2 omega_m / (Gamma^2 + omega_m^2),   y = Delta - c G,
//! ```
//!
//! whose three positive roots signal optical bistability.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::langevin::{drift_for, eigen_stable, OperatingPoint};
use crate::numerics::{real_roots_cubic, tol, Polynomial3};
use crate::params::EffectiveParams;

/// Whether the constant radiation-pressure offset on the motion is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriveOffset {
    /// `b_s` proportional to `x + 1`.
    #[default]
    Full,
    /// `b_s` proportional to `x`.
    PhotonOnly,
}

impl DriveOffset {
    fn constant(self) -> f64 {
        match self {
            DriveOffset::Full => 1.0,
            DriveOffset::PhotonOnly => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DriveOffset::Full => "full",
            DriveOffset::PhotonOnly => "photon-only",
        }
    }
}

impl std::str::FromStr for DriveOffset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(DriveOffset::Full),
            "photon-only" => Ok(DriveOffset::PhotonOnly),
            other => Err(format!("unknown drive offset `{other}` (expected full|photon-only)")),
        }
    }
}

/// Which stable branch to linearize around when several coexist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchPolicy {
    #[default]
    SmallestStable,
    LargestStable,
}

impl BranchPolicy {
    pub fn select<'a>(&self, branches: &'a [SteadyStateBranch]) -> Option<&'a SteadyStateBranch> {
        let mut stable = branches.iter().filter(|b| b.stable);
        match self {
            BranchPolicy::SmallestStable => stable.next(),
            BranchPolicy::LargestStable => stable.last(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BranchPolicy::SmallestStable => "smallest-stable",
            BranchPolicy::LargestStable => "largest-stable",
        }
    }
}

impl std::str::FromStr for BranchPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "smallest-stable" => Ok(BranchPolicy::SmallestStable),
            "largest-stable" => Ok(BranchPolicy::LargestStable),
            other => Err(format!("unknown branch policy `{other}` (expected smallest-stable|largest-stable)")),
        }
    }
}

/// One solution of the steady-state equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateBranch {
    /// Intracavity photon number `|a_s|^2`.
    pub x: f64,
    pub a_s: Complex64,
    pub b_s: Complex64,
    /// Static detuning shift `g_o (b_s + b_s*)`.
    pub g1: f64,
    /// Enhanced coupling `g_o |a_s|` (carries the sign of `g_o`).
    pub g2: f64,
    /// `Delta + g1`.
    pub delta_tilde: f64,
    pub stable: bool,
    /// Position in the ascending list of roots.
    pub branch_index: usize,
}

impl SteadyStateBranch {
    pub fn operating_point(&self) -> OperatingPoint {
        OperatingPoint::new(self.delta_tilde, self.g2)
    }
}

/// Static optomechanical frequency pull `G = 2 g_o^2 omega_m / (Gamma^2 + omega_m^2)`.
pub fn frequency_pull(eff: &EffectiveParams) -> f64 {
    2.0 * eff.g0 * eff.g0 * eff.omega_m / (eff.gamma_m * eff.gamma_m + eff.omega_m * eff.omega_m)
}

/// Coefficients `(c3, c2, c1, c0)` of the photon-number cubic.
pub fn cubic_coefficients(eff: &EffectiveParams, offset: DriveOffset) -> (f64, f64, f64, f64) {
    let g = frequency_pull(eff);
    let y = eff.delta - offset.constant() * g;
    (g * g, -2.0 * g * y, eff.gamma * eff.gamma + y * y, -eff.pump_intensity())
}

pub fn photon_number_polynomial(eff: &EffectiveParams, offset: DriveOffset) -> Polynomial3 {
    let (c3, c2, c1, c0) = cubic_coefficients(eff, offset);
    Polynomial3::new(c3, c2, c1, c0)
}

/// Positive real roots of the photon-number cubic in ascending order.
///
/// An undriven cavity (`eta = 0`) has the single solution `x = 0`.
pub fn solve_photon_number(eff: &EffectiveParams, offset: DriveOffset) -> Result<Vec<f64>> {
    if eff.pump_intensity() == 0.0 {
        return Ok(vec![0.0]);
    }
    let p = photon_number_polynomial(eff, offset);
    Ok(real_roots_cubic(&p)?.into_iter().filter(|&x| x > 0.0).collect())
}

/// Steady amplitudes `(a_s, b_s)` for photon number `x`.
///
/// Fails with [`Error::InconsistentRoot`] when `|a_s|^2` does not reproduce `x`.
pub fn steady_amplitudes(eff: &EffectiveParams, x: f64, offset: DriveOffset) -> Result<(Complex64, Complex64)> {
    let i = Complex64::i();
    let b_s = -i * eff.g0 * (x + offset.constant()) / Complex64::new(eff.gamma_m, eff.omega_m);
    let g1 = 2.0 * eff.g0 * b_s.re;
    let a_s = -eff.pump / Complex64::new(eff.gamma, eff.delta + g1);
    let a_sq = a_s.norm_sqr();
    if (a_sq - x).abs() > tol::SELF_CONSISTENCY * x {
        return Err(Error::InconsistentRoot { x, a_sq });
    }
    Ok((a_s, b_s))
}

fn build_branch(eff: &EffectiveParams, x: f64, index: usize, offset: DriveOffset) -> Result<SteadyStateBranch> {
    let (a_s, b_s) = steady_amplitudes(eff, x, offset)?;
    let g1 = eff.g0 * (b_s + b_s.conj()).re;
    Ok(SteadyStateBranch {
        x,
        a_s,
        b_s,
        g1,
        g2: eff.g0 * a_s.norm(),
        delta_tilde: eff.delta + g1,
        stable: false,
        branch_index: index,
    })
}

/// Set `stable` on each branch from the eigenvalues of its drift matrix.
pub fn classify_branches(eff: &EffectiveParams, branches: &[SteadyStateBranch]) -> Result<Vec<SteadyStateBranch>> {
    branches
        .iter()
        .map(|b| {
            let stable = eigen_stable(&drift_for(eff, b.operating_point()))?;
            Ok(SteadyStateBranch { stable, ..*b })
        })
        .collect()
}

/// Every steady state of `eff`, with amplitudes and stability.
pub fn steady_branches(eff: &EffectiveParams, offset: DriveOffset) -> Result<Vec<SteadyStateBranch>> {
    let roots = solve_photon_number(eff, offset)?;
    let branches = roots
        .iter()
        .enumerate()
        .map(|(i, &x)| build_branch(eff, x, i, offset))
        .collect::<Result<Vec<_>>>()?;
    classify_branches(eff, &branches)
}

/// Steady states at one detuning of a bistability scan.
#[derive(Debug, Clone, PartialEq)]
pub struct BistabilityRow {
    pub delta: f64,
    pub branches: Vec<SteadyStateBranch>,
}

impl BistabilityRow {
    pub fn root_count(&self) -> usize {
        self.branches.len()
    }
}

/// Steady states at every detuning of `delta_grid`.
pub fn bistability_scan(eff: &EffectiveParams, delta_grid: &[f64], offset: DriveOffset) -> Result<Vec<BistabilityRow>> {
    delta_grid
        .iter()
        .map(|&delta| {
            let e = EffectiveParams { delta, ..*eff };
            Ok(BistabilityRow { delta, branches: steady_branches(&e, offset)? })
        })
        .collect()
}

/// Maximal runs of consecutive grid points with three roots, as
/// `(first_delta, last_delta)` pairs.
pub fn bistability_region(eff: &EffectiveParams, delta_grid: &[f64], offset: DriveOffset) -> Result<Vec<(f64, f64)>> {
    let counts = delta_grid
        .iter()
        .map(|&delta| Ok(solve_photon_number(&EffectiveParams { delta, ..*eff }, offset)?.len()))
        .collect::<Result<Vec<_>>>()?;
    Ok(three_root_runs(delta_grid, &counts))
}

pub(crate) fn three_root_runs(grid: &[f64], counts: &[usize]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &c) in counts.iter().enumerate() {
        match (c == 3, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((grid[s], grid[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((grid[s], grid[grid.len() - 1]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_linear_ode;
    use crate::params::fixtures::effective;
    use proptest::prelude::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    /// Count sign changes of the cubic on a dense x grid.
    fn sign_change_count(p: &Polynomial3, x_max: f64, n: usize) -> usize {
        let xs = grid(1e-12, x_max, n);
        xs.windows(2).filter(|w| p.eval(w[0]).signum() != p.eval(w[1]).signum()).count()
    }

    #[test]
    fn coefficients_without_coupling() {
        let eff = effective(4.0, 0.0, 150.0);
        assert_eq!(cubic_coefficients(&eff, DriveOffset::Full), (0.0, 0.0, 17.0, -22500.0));
    }

    #[test]
    fn frequency_pull_reference_value() {
        let g = frequency_pull(&effective(0.0, -3.0, 150.0));
        assert!((g - 180.0 / 100.0001).abs() < 1e-14);
        assert!((g - 1.79998).abs() < 5e-5);
    }

    #[test]
    fn quadratic_term_vanishes_at_offset_detuning() {
        let g = frequency_pull(&effective(0.0, -3.0, 150.0));
        let (_, c2, c1, _) = cubic_coefficients(&effective(g, -3.0, 150.0), DriveOffset::Full);
        assert!(c2.abs() < 1e-14 && (c1 - 1.0).abs() < 1e-14);
        let (_, c2, c1, _) = cubic_coefficients(&effective(0.0, -3.0, 150.0), DriveOffset::PhotonOnly);
        assert!(c2 == 0.0 && c1 == 1.0);
    }

    #[test]
    fn uncoupled_cavity_is_lorentzian() {
        let eff = effective(7.0, 0.0, 150.0);
        let x = solve_photon_number(&eff, DriveOffset::Full).unwrap();
        assert_eq!(x.len(), 1);
        assert!((x[0] - 22500.0 / 50.0).abs() < 1e-10);
        let (a_s, b_s) = steady_amplitudes(&eff, x[0], DriveOffset::Full).unwrap();
        assert_eq!(b_s, Complex64::new(0.0, 0.0));
        let expect = -eff.pump / Complex64::new(1.0, 7.0);
        assert!((a_s - expect).norm() < 1e-12);
    }

    #[test]
    fn undriven_cavity_is_empty() {
        let eff = effective(0.0, 0.0, 0.0);
        assert_eq!(solve_photon_number(&eff, DriveOffset::Full).unwrap(), vec![0.0]);
        let b = steady_branches(&eff, DriveOffset::PhotonOnly).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].stable);
    }

    #[test]
    fn undamped_motion_has_real_displacement() {
        let eff = EffectiveParams { gamma_m: 0.0, ..effective(50.0, -3.0, 150.0) };
        let x = 4.0;
        let b_s = -Complex64::i() * eff.g0 * x / Complex64::new(0.0, eff.omega_m);
        assert_eq!(b_s.im, 0.0);
        assert!((b_s.re + eff.g0 * x / eff.omega_m).abs() < 1e-15);
    }

    #[test]
    fn non_root_is_rejected() {
        let eff = effective(80.0, -3.0, 150.0);
        assert!(matches!(steady_amplitudes(&eff, 1.0, DriveOffset::Full), Err(Error::InconsistentRoot { .. })));
    }

    #[test]
    fn bistable_window_matches_sign_change_oracle() {
        let base = effective(0.0, -3.0, 150.0);
        let x_max = 4.0 * base.pump_intensity();
        let mut saw_three = false;
        for delta in grid(-100.0, 300.0, 81) {
            let eff = EffectiveParams { delta, ..base };
            let roots = solve_photon_number(&eff, DriveOffset::Full).unwrap();
            let oracle = sign_change_count(&photon_number_polynomial(&eff, DriveOffset::Full), x_max, 400_000);
            assert_eq!(roots.len(), oracle, "Delta = {delta}");
            saw_three |= roots.len() == 3;
            for &x in &roots {
                let (a_s, _) = steady_amplitudes(&eff, x, DriveOffset::Full).unwrap();
                assert!((a_s.norm_sqr() - x).abs() / x < 1e-8);
            }
        }
        assert!(saw_three);
    }

    #[test]
    fn no_bistability_without_coupling() {
        let eff = effective(0.0, 0.0, 150.0);
        for delta in grid(-100.0, 300.0, 401) {
            let e = EffectiveParams { delta, ..eff };
            assert_eq!(solve_photon_number(&e, DriveOffset::Full).unwrap().len(), 1);
        }
        assert!(bistability_region(&eff, &grid(-100.0, 300.0, 401), DriveOffset::Full).unwrap().is_empty());
    }

    #[test]
    fn single_interval_bracketed_by_discriminant() {
        let eff = effective(0.0, -3.0, 150.0);
        let g = grid(-100.0, 300.0, 401);
        let region = bistability_region(&eff, &g, DriveOffset::Full).unwrap();
        assert_eq!(region.len(), 1);
        let (lo, hi) = region[0];
        let disc = |d: f64| photon_number_polynomial(&EffectiveParams { delta: d, ..eff }, DriveOffset::Full).discriminant();
        assert!(disc(lo) > 0.0 && disc(lo - 1.0) < 0.0);
        if hi < 300.0 {
            assert!(disc(hi) > 0.0 && disc(hi + 1.0) < 0.0);
        }
    }

    #[test]
    fn monostable_branch_is_stable() {
        let b = steady_branches(&effective(30.0, -3.0, 3.0), DriveOffset::Full).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].stable);
    }

    #[test]
    fn middle_branch_unstable_lower_branch_stable() {
        let b = steady_branches(&effective(90.0, -3.0, 150.0), DriveOffset::Full).unwrap();
        assert_eq!(b.len(), 3);
        assert!(b[0].stable);
        assert!(!b[1].stable);
        // The upper branch sits past the cavity resonance (Delta~ < 0) where the
        // linearized dynamics is parametrically unstable for Gamma << gamma.
        assert!(b[2].delta_tilde < 0.0);
        assert!(!b[2].stable);
    }

    #[test]
    fn stability_flags_match_time_integration() {
        for delta in [75.0, 110.0, 200.0] {
            let eff = effective(delta, -3.0, 150.0);
            for b in steady_branches(&eff, DriveOffset::Full).unwrap() {
                let m = drift_for(&eff, b.operating_point());
                let dt = 0.1 / crate::numerics::frobenius(&m.0);
                let x = integrate_linear_ode(&m.0, [0.5, 0.5, 0.5, 0.5], 1000.0, dt).unwrap();
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert_eq!(b.stable, norm < 1.0, "Delta={delta} branch {} norm {norm}", b.branch_index);
            }
        }
    }

    #[test]
    fn policies_pick_extreme_stable_branches() {
        let mk = |x: f64, stable: bool| SteadyStateBranch {
            x,
            a_s: Complex64::new(0.0, 0.0),
            b_s: Complex64::new(0.0, 0.0),
            g1: 0.0,
            g2: 0.0,
            delta_tilde: 0.0,
            stable,
            branch_index: 0,
        };
        let bs = [mk(1.0, false), mk(2.0, true), mk(3.0, false), mk(4.0, true)];
        assert_eq!(BranchPolicy::SmallestStable.select(&bs).unwrap().x, 2.0);
        assert_eq!(BranchPolicy::LargestStable.select(&bs).unwrap().x, 4.0);
        assert!(BranchPolicy::SmallestStable.select(&bs[..1]).is_none());
    }

    proptest! {
        #[test]
        fn root_count_is_one_or_three(delta in -100.0f64..300.0, g0 in -5.0f64..5.0, eta in 0.5f64..200.0) {
            let n = solve_photon_number(&effective(delta, g0, eta), DriveOffset::Full).unwrap().len();
            prop_assert!(n == 1 || n == 3, "{} roots", n);
        }

        #[test]
        fn roots_invariant_under_rescale(delta in -100.0f64..300.0, s in 0.2f64..5.0) {
            let eff = effective(delta, -3.0, 150.0);
            let a = steady_branches(&eff, DriveOffset::Full).unwrap();
            let b = steady_branches(&eff.rescale(s).unwrap(), DriveOffset::Full).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (p, q) in a.iter().zip(b.iter()) {
                prop_assert!((p.x - q.x).abs() <= 1e-9 * p.x);
                prop_assert_eq!(p.stable, q.stable);
            }
        }

        #[test]
        fn roots_even_in_coupling(delta in -100.0f64..300.0, g0 in 0.1f64..5.0) {
            let a = solve_photon_number(&effective(delta, g0, 150.0), DriveOffset::Full).unwrap();
            let b = solve_photon_number(&effective(delta, -g0, 150.0), DriveOffset::Full).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn roots_continuous_away_from_folds(delta in -50.0f64..50.0) {
            let eff = effective(delta, -3.0, 20.0);
            let a = solve_photon_number(&eff, DriveOffset::Full).unwrap();
            let b = solve_photon_number(&EffectiveParams { delta: delta + 1e-7, ..eff }, DriveOffset::Full).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (p, q) in a.iter().zip(b.iter()) {
                prop_assert!((p - q).abs() < 1e-4 * p.max(1.0));
            }
        }
    }

    #[test]
    fn weak_pump_limit() {
        for eta in [1e-1, 1e-2, 1e-3] {
            let eff = effective(5.0, -3.0, eta);
            let x = solve_photon_number(&eff, DriveOffset::Full).unwrap();
            let g = frequency_pull(&eff);
            let lorentz = eta * eta / (1.0 + (5.0 - g).powi(2));
            assert!((x[0] - lorentz).abs() / lorentz < 10.0 * eta * eta);
        }
    }
}

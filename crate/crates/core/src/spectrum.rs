//! Displacement fluctuation spectrum of the ion and normal-mode splitting.
//!
//! Lengths are in units of the zero-point amplitude `x_o` (so `x_o = 1`) and
//! the spectrum density carries units of `x_o^2` per unit frequency.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::langevin::OperatingPoint;
use crate::numerics::{find_local_maxima, tol};
use crate::parallel::map_ordered;
use crate::params::EffectiveParams;
use crate::steady_state::{steady_branches, BranchPolicy, DriveOffset};

/// Optical-spring frequency shift
/// `g2^2 [(w - D)/((w - D)^2 + gamma^2) - (w + D)/((w + D)^2 + gamma^2)]`.
///
/// Even in `omega`, odd in `delta_tilde`.
pub fn optical_spring(omega: f64, g2: f64, delta_tilde: f64, gamma: f64) -> f64 {
    let lo = omega - delta_tilde;
    let hi = omega + delta_tilde;
    g2 * g2 * (lo / (lo * lo + gamma * gamma) - hi / (hi * hi + gamma * gamma))
}

/// Optomechanical damping
/// `(g2^2 / w) [2 w_m gamma / ((w - D)^2 + gamma^2) - 2 w_m gamma / ((w + D)^2 + gamma^2)]`.
///
/// The `1/w` cancels against the bracket, which is evaluated as
/// `8 g2^2 w_m gamma D / (((w - D)^2 + gamma^2)((w + D)^2 + gamma^2))`; at
/// `w = 0` this is the analytic limit `8 g2^2 w_m gamma D / (D^2 + gamma^2)^2`.
pub fn optomech_damping(omega: f64, g2: f64, delta_tilde: f64, gamma: f64, omega_m: f64) -> f64 {
    let lo = omega - delta_tilde;
    let hi = omega + delta_tilde;
    let a = lo * lo + gamma * gamma;
    let b = hi * hi + gamma * gamma;
    8.0 * g2 * g2 * omega_m * gamma * delta_tilde / (a * b)
}

/// Mechanical susceptibility from `chi^-1 = w_m^2 + 2 w_m Omega_b - w^2 - i w (2 Gamma + Gamma_b)`.
pub fn susceptibility(omega: f64, omega_m: f64, gamma_m: f64, spring: f64, damping: f64) -> Result<Complex64> {
    let inv = Complex64::new(
        omega_m * omega_m + 2.0 * omega_m * spring - omega * omega,
        -omega * (2.0 * gamma_m + damping),
    );
    if inv.norm() == 0.0 {
        return Err(Error::DivergentSusceptibility(omega));
    }
    Ok(inv.inv())
}

/// `S_b(omega)` at the operating point `op`.
pub fn displacement_spectrum(omega: f64, eff: &EffectiveParams, op: OperatingPoint) -> Result<f64> {
    let dt = op.delta_tilde;
    if dt == 0.0 {
        return Err(Error::UndefinedPrefactor);
    }
    let (gm, wm, g) = (eff.gamma_m, eff.omega_m, eff.gamma);
    let spring = optical_spring(omega, op.g2, dt, g);
    let damping = optomech_damping(omega, op.g2, dt, g, wm);
    let chi = susceptibility(omega, wm, gm, spring, damping)?;
    let noise = 2.0 * gm * eff.n_b + (dt * dt + omega * omega + g * g) / (2.0 * dt * wm) * damping;
    Ok(wm * wm / (2.0 * PI) * chi.norm_sqr() * noise)
}

/// A sampled displacement spectrum with its peaks.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub peaks: Vec<(f64, f64)>,
    pub nms: bool,
}

/// Sample `S_b` on `omega_grid` and detect peaks.
pub fn spectrum_curve(eff: &EffectiveParams, op: OperatingPoint, omega_grid: &[f64]) -> Result<SpectrumCurve> {
    let values = omega_grid
        .iter()
        .map(|&w| displacement_spectrum(w, eff, op))
        .collect::<Result<Vec<_>>>()?;
    let (peaks, nms) = find_peaks(omega_grid, &values)?;
    Ok(SpectrumCurve { omega: omega_grid.to_vec(), values, peaks, nms })
}

/// Local maxima of a sampled spectrum and the splitting verdict.
///
/// Splitting is reported when two neighbouring maxima both rise above the
/// lowest sample between them by at least [`tol::NMS_DEPTH`] of their height.
pub fn find_peaks(omega: &[f64], values: &[f64]) -> Result<(Vec<(f64, f64)>, bool)> {
    let peaks = find_local_maxima(omega, values)?;
    let mut nms = false;
    for pair in peaks.windows(2) {
        let (lo, hi) = (pair[0].0, pair[1].0);
        let valley = omega
            .iter()
            .zip(values)
            .filter(|(w, _)| **w >= lo && **w <= hi)
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min);
        let deep = |h: f64| h > 0.0 && (h - valley) / h >= tol::NMS_DEPTH;
        if deep(pair[0].1) && deep(pair[1].1) {
            nms = true;
        }
    }
    Ok((peaks, nms))
}

/// `S_b` over a detuning x frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NmsMap {
    pub delta: Vec<f64>,
    pub omega: Vec<f64>,
    /// Operating point used for each row, `None` when no stable branch exists.
    pub points: Vec<Option<OperatingPoint>>,
    /// Row per detuning; `NaN` marks rows without a stable steady state.
    pub values: Vec<Vec<f64>>,
}

impl NmsMap {
    /// Splitting verdict per row (`None` for unavailable rows).
    pub fn nms_rows(&self) -> Result<Vec<Option<bool>>> {
        self.values
            .iter()
            .zip(&self.points)
            .map(|(row, p)| match p {
                Some(_) => Ok(Some(find_peaks(&self.omega, row)?.1)),
                None => Ok(None),
            })
            .collect()
    }
}

/// Displacement spectrum for every detuning in `delta_grid`, linearized around
/// the branch picked by `policy`.
pub fn nms_map(
    eff: &EffectiveParams,
    delta_grid: &[f64],
    omega_grid: &[f64],
    offset: DriveOffset,
    policy: BranchPolicy,
    jobs: usize,
) -> Result<NmsMap> {
    let rows = map_ordered(delta_grid, jobs, |&delta| -> Result<(Option<OperatingPoint>, Vec<f64>)> {
        let e = EffectiveParams { delta, ..*eff };
        let branches = steady_branches(&e, offset)?;
        match policy.select(&branches) {
            Some(b) if b.delta_tilde != 0.0 => {
                let op = b.operating_point();
                let row = omega_grid.iter().map(|&w| displacement_spectrum(w, &e, op)).collect::<Result<Vec<_>>>()?;
                Ok((Some(op), row))
            }
            _ => Ok((None, vec![f64::NAN; omega_grid.len()])),
        }
    });
    let mut points = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for r in rows {
        let (p, v) = r?;
        points.push(p);
        values.push(v);
    }
    Ok(NmsMap { delta: delta_grid.to_vec(), omega: omega_grid.to_vec(), points, values })
}

/// Mean phonon number from the area under the spectrum,
/// `n_eff = 4 * integral_0^inf S_b dw` (trapezoid rule on `omega_grid`).
///
/// With `g2 = 0` and an infinite grid this returns `n_b`.
pub fn effective_phonon_number(eff: &EffectiveParams, op: OperatingPoint, omega_grid: &[f64]) -> Result<f64> {
    let values = omega_grid
        .iter()
        .map(|&w| displacement_spectrum(w, eff, op))
        .collect::<Result<Vec<_>>>()?;
    let area: f64 = omega_grid
        .windows(2)
        .zip(values.windows(2))
        .map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0] + v[1]))
        .sum();
    Ok(4.0 * area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::fixtures::effective;
    use proptest::prelude::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    /// Damping evaluated term by term, exactly as the two-Lorentzian formula reads.
    fn damping_by_formula(w: f64, g2: f64, d: f64, g: f64, wm: f64) -> f64 {
        g2 * g2 / w * (2.0 * wm * g / ((w - d).powi(2) + g * g) - 2.0 * wm * g / ((w + d).powi(2) + g * g))
    }

    #[test]
    fn spring_examples() {
        assert_eq!(optical_spring(3.0, 0.0, 10.0, 1.0), 0.0);
        let at_zero = optical_spring(0.0, 2.0, 10.0, 1.0);
        assert!((at_zero - (-2.0 * 4.0 * 10.0 / 101.0)).abs() < 1e-14);
        for w in [0.3, 5.0, 9.9, 25.0] {
            assert!((optical_spring(-w, 2.0, 10.0, 1.0) - optical_spring(w, 2.0, 10.0, 1.0)).abs() < 1e-14);
            assert!((optical_spring(w, 2.0, -10.0, 1.0) + optical_spring(w, 2.0, 10.0, 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn damping_examples() {
        assert_eq!(optomech_damping(3.0, 0.0, 10.0, 1.0, 10.0), 0.0);
        let direct = optomech_damping(10.0, 2.0, 10.0, 1.0, 10.0);
        let formula = damping_by_formula(10.0, 2.0, 10.0, 1.0, 10.0);
        assert!((direct - formula).abs() < 1e-12 * formula.abs());
        // 4/10 * (20/1 - 20/401)
        assert!((direct - 0.4 * (20.0 - 20.0 / 401.0)).abs() < 1e-12);
        for w in [0.5, 7.0, 12.0] {
            assert!((optomech_damping(-w, 2.0, 10.0, 1.0, 10.0) - optomech_damping(w, 2.0, 10.0, 1.0, 10.0)).abs() < 1e-14);
        }
        let limit = 8.0 * 4.0 * 10.0 * 1.0 * 10.0 / (101.0f64 * 101.0);
        assert!((optomech_damping(0.0, 2.0, 10.0, 1.0, 10.0) - limit).abs() < 1e-14);
        assert!((damping_by_formula(1e-6, 2.0, 10.0, 1.0, 10.0) - limit).abs() < 1e-6);
    }

    #[test]
    fn bare_susceptibility() {
        let chi = susceptibility(0.0, 10.0, 0.01, 0.0, 0.0).unwrap();
        assert!((chi.re - 0.01).abs() < 1e-16 && chi.im == 0.0);
        let w = grid(5.0, 15.0, 2001);
        let peak = w
            .iter()
            .map(|&x| (x, susceptibility(x, 10.0, 0.01, 0.0, 0.0).unwrap().norm_sqr()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!((peak.0 - 10.0).abs() < 0.01);
        let inv = susceptibility(3.0, 10.0, 0.01, 0.4, 0.7).unwrap().inv();
        assert!((inv.im + 3.0 * (0.02 + 0.7)).abs() < 1e-12);
        assert!(matches!(susceptibility(10.0, 10.0, 0.0, 0.0, 0.0), Err(Error::DivergentSusceptibility(_))));
    }

    #[test]
    fn thermal_lorentzian_without_coupling() {
        let eff = effective(0.0, 0.0, 0.0);
        let op = OperatingPoint::new(10.0, 0.0);
        for w in [1.0, 9.99, 10.0, 13.0] {
            let chi = susceptibility(w, 10.0, 0.01, 0.0, 0.0).unwrap();
            let expect = 100.0 / (2.0 * PI) * 2.0 * 0.01 * 100.0 * chi.norm_sqr();
            assert!((displacement_spectrum(w, &eff, op).unwrap() - expect).abs() < 1e-12 * expect);
        }
        let curve = spectrum_curve(&eff, op, &grid(0.0, 20.0, 4001)).unwrap();
        assert_eq!(curve.peaks.len(), 1);
        assert!(!curve.nms);
        assert!((curve.peaks[0].0 - 10.0).abs() < 0.01);
    }

    #[test]
    fn strong_coupling_splits() {
        let eff = effective(0.0, -3.0, 0.0);
        let curve = spectrum_curve(&eff, OperatingPoint::new(10.0, 2.0), &grid(0.0, 20.0, 4001)).unwrap();
        assert!(curve.nms);
        assert_eq!(curve.peaks.len(), 2);
        let split = curve.peaks[1].0 - curve.peaks[0].0;
        assert!((split - 4.0).abs() < 0.8, "split {split}");
    }

    #[test]
    fn peak_count_stable_under_refinement() {
        let eff = effective(0.0, -3.0, 0.0);
        for g2 in [0.1, 1.0, 2.0, 3.0] {
            let op = OperatingPoint::new(10.0, g2);
            let coarse = spectrum_curve(&eff, op, &grid(0.0, 20.0, 4001)).unwrap();
            let fine = spectrum_curve(&eff, op, &grid(0.0, 20.0, 8001)).unwrap();
            assert_eq!(coarse.peaks.len(), fine.peaks.len(), "g2 = {g2}");
            assert_eq!(coarse.nms, fine.nms);
        }
    }

    #[test]
    fn zero_detuning_rejected() {
        let eff = effective(0.0, -3.0, 0.0);
        assert_eq!(displacement_spectrum(1.0, &eff, OperatingPoint::new(0.0, 1.0)), Err(Error::UndefinedPrefactor));
    }

    #[test]
    fn phonon_number_from_area() {
        let eff = effective(0.0, 0.0, 0.0);
        let w = grid(0.0, 2000.0, 2_000_001);
        let n = effective_phonon_number(&eff, OperatingPoint::new(10.0, 0.0), &w).unwrap();
        assert!((n - 100.0).abs() < 0.1, "n_eff = {n}");
        // Red-detuned coupling cools the motion.
        let cooled = effective_phonon_number(&eff, OperatingPoint::new(10.0, 1.0), &w).unwrap();
        assert!(cooled < 10.0, "n_eff = {cooled}");
    }

    #[test]
    fn map_rows_match_pointwise_calls() {
        let eff = effective(0.0, -3.0, 5.0);
        let deltas = grid(-20.0, 40.0, 13);
        let omegas = grid(0.0, 20.0, 101);
        let map = nms_map(&eff, &deltas, &omegas, DriveOffset::Full, BranchPolicy::SmallestStable, 2).unwrap();
        for (i, &d) in deltas.iter().enumerate() {
            let e = EffectiveParams { delta: d, ..eff };
            match map.points[i] {
                Some(op) => {
                    for (j, &w) in omegas.iter().enumerate() {
                        assert_eq!(map.values[i][j], displacement_spectrum(w, &e, op).unwrap());
                    }
                }
                None => assert!(map.values[i].iter().all(|v| v.is_nan())),
            }
        }
    }

    #[test]
    fn uncoupled_map_rows_are_identical() {
        let eff = effective(0.0, 0.0, 5.0);
        let map = nms_map(&eff, &grid(1.0, 40.0, 7), &grid(0.0, 20.0, 51), DriveOffset::Full, BranchPolicy::SmallestStable, 1).unwrap();
        for row in &map.values[1..] {
            assert_eq!(row, &map.values[0]);
        }
    }

    proptest! {
        #[test]
        fn spectrum_nonnegative(w in 1e-3f64..40.0, dt in -30.0f64..30.0, g2 in -3.0f64..3.0) {
            prop_assume!(dt.abs() > 1e-3);
            let eff = effective(0.0, -3.0, 0.0);
            if let Ok(s) = displacement_spectrum(w, &eff, OperatingPoint::new(dt, g2)) {
                prop_assert!(s >= 0.0);
            }
        }

        #[test]
        fn spectrum_even_in_coupling(w in 0.0f64..40.0, dt in 0.5f64..30.0, g2 in 0.0f64..3.0) {
            let eff = effective(0.0, -3.0, 0.0);
            let a = displacement_spectrum(w, &eff, OperatingPoint::new(dt, g2)).unwrap();
            let b = displacement_spectrum(w, &eff, OperatingPoint::new(dt, -g2)).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn noise_bracket_even_in_detuning(w in 0.0f64..40.0, dt in 0.5f64..30.0, g2 in 0.0f64..3.0) {
            let term = |d: f64| (d * d + w * w + 1.0) / (2.0 * d * 10.0) * optomech_damping(w, g2, d, 1.0, 10.0);
            prop_assert!((term(dt) - term(-dt)).abs() <= 1e-12 * term(dt).abs().max(1e-300));
        }

        #[test]
        fn rescale_maps_frequency_and_density(w in 0.0f64..30.0, dt in 0.5f64..30.0, g2 in 0.0f64..3.0, s in 0.2f64..5.0) {
            let eff = effective(dt, -3.0, 0.0);
            let op = OperatingPoint::new(dt, g2);
            let a = displacement_spectrum(w, &eff, op).unwrap();
            let b = displacement_spectrum(s * w, &eff.rescale(s).unwrap(), op.rescale(s)).unwrap();
            prop_assert!((s * b - a).abs() <= 1e-9 * a.abs());
        }
    }
}

use super::{frobenius, mat4_mul, mat4_transpose, tol, Mat4};
use crate::error::{Error, Result};

fn step_budget(m: &Mat4, t_end: f64, dt: f64) -> Result<(usize, f64)> {
    let max = tol::RK4_STEP / frobenius(m).max(f64::MIN_POSITIVE);
    if !(dt > 0.0) || dt > max {
        return Err(Error::StepTooLarge { dt, max });
    }
    let steps = (t_end / dt).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    Ok((steps, h))
}

/// Fixed-step RK4 integration of the moment equation `dV/dt = M V + V M^T + D`
/// from `V(0) = 0`, returning `V(t_end)`.
///
/// The step is shrunk so that an integer number of steps lands on `t_end`;
/// `dt` must not exceed `0.1 / |M|_F`.
pub fn integrate_covariance_ode(m: &Mat4, d: &Mat4, t_end: f64, dt: f64) -> Result<Mat4> {
    let (steps, h) = step_budget(m, t_end, dt)?;
    let mt = mat4_transpose(m);
    let rhs = |v: &Mat4| -> Mat4 {
        let a = mat4_mul(m, v);
        let b = mat4_mul(v, &mt);
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = a[i][j] + b[i][j] + d[i][j];
            }
        }
        out
    };
    let axpy = |v: &Mat4, k: &Mat4, s: f64| -> Mat4 {
        let mut out = *v;
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] += s * k[i][j];
            }
        }
        out
    };
    let mut v = [[0.0; 4]; 4];
    for _ in 0..steps {
        let k1 = rhs(&v);
        let k2 = rhs(&axpy(&v, &k1, 0.5 * h));
        let k3 = rhs(&axpy(&v, &k2, 0.5 * h));
        let k4 = rhs(&axpy(&v, &k3, h));
        for i in 0..4 {
            for j in 0..4 {
                v[i][j] += h / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
            }
        }
    }
    Ok(v)
}

/// Fixed-step RK4 integration of `dx/dt = M x` from `x0`, returning `x(t_end)`.
pub fn integrate_linear_ode(m: &Mat4, x0: [f64; 4], t_end: f64, dt: f64) -> Result<[f64; 4]> {
    let (steps, h) = step_budget(m, t_end, dt)?;
    let apply = |x: &[f64; 4]| -> [f64; 4] {
        let mut y = [0.0; 4];
        for i in 0..4 {
            y[i] = (0..4).map(|j| m[i][j] * x[j]).sum();
        }
        y
    };
    let shift = |x: &[f64; 4], k: &[f64; 4], s: f64| -> [f64; 4] {
        let mut y = *x;
        for i in 0..4 {
            y[i] += s * k[i];
        }
        y
    };
    let mut x = x0;
    for _ in 0..steps {
        let k1 = apply(&x);
        let k2 = apply(&shift(&x, &k1, 0.5 * h));
        let k3 = apply(&shift(&x, &k2, 0.5 * h));
        let k4 = apply(&shift(&x, &k3, h));
        for i in 0..4 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decoupled(nb: f64) -> (Mat4, Mat4) {
        let (gm, wm, g, dt) = (0.5, 3.0, 1.0, 2.0);
        let m = [[-gm, wm, 0.0, 0.0], [-wm, -gm, 0.0, 0.0], [0.0, 0.0, -g, dt], [0.0, 0.0, -dt, -g]];
        let mut d = [[0.0; 4]; 4];
        d[0][0] = gm * (2.0 * nb + 1.0);
        d[1][1] = gm * (2.0 * nb + 1.0);
        d[2][2] = g;
        d[3][3] = g;
        (m, d)
    }

    #[test]
    fn zero_diffusion_stays_zero() {
        let (m, _) = decoupled(3.0);
        let v = integrate_covariance_ode(&m, &[[0.0; 4]; 4], 10.0, 0.01).unwrap();
        assert_eq!(v, [[0.0; 4]; 4]);
    }

    #[test]
    fn decoupled_modes_relax_to_thermal_state() {
        let nb = 3.0;
        let (m, d) = decoupled(nb);
        let v = integrate_covariance_ode(&m, &d, 100.0, 0.01).unwrap();
        let expect = [nb + 0.5, nb + 0.5, 0.5, 0.5];
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { expect[i] } else { 0.0 };
                assert!((v[i][j] - e).abs() < 1e-9, "V[{i}][{j}] = {}", v[i][j]);
            }
        }
    }

    #[test]
    fn step_bound_enforced() {
        let (m, d) = decoupled(0.0);
        assert!(matches!(integrate_covariance_ode(&m, &d, 1.0, 1.0), Err(Error::StepTooLarge { .. })));
        assert!(integrate_linear_ode(&m, [1.0, 0.0, 0.0, 0.0], 1.0, 0.0).is_err());
    }

    #[test]
    fn damped_rotation_decays() {
        let (m, _) = decoupled(0.0);
        let x = integrate_linear_ode(&m, [1.0, 0.0, 1.0, 0.0], 2.0, 0.01).unwrap();
        let mech = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let opt = (x[2] * x[2] + x[3] * x[3]).sqrt();
        assert!((mech - (-1.0f64).exp()).abs() < 1e-7, "{mech} {opt}");
        assert!((opt - (-2.0f64).exp()).abs() < 1e-7);
    }
}

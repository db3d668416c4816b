use crate::error::{Error, Result};

/// Solve `A x = b` for square row-major `A` by Gaussian elimination with
/// partial pivoting.
///
/// Returns [`Error::Singular`] when a pivot falls below `n * eps * max|A|`.
pub fn solve_linear(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.len(), n * n, "A must be n x n with n = len(b)");
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let amax = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if amax == 0.0 {
        return Err(Error::Singular);
    }
    let cutoff = n as f64 * f64::EPSILON * amax;

    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap();
        if m[piv * n + col].abs() <= cutoff {
            return Err(Error::Singular);
        }
        if piv != col {
            for j in 0..n {
                m.swap(piv * n + j, col * n + j);
            }
            x.swap(piv, col);
        }
        let d = m[col * n + col];
        for r in (col + 1)..n {
            let f = m[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            m[r * n + col] = 0.0;
            for c in (col + 1)..n {
                m[r * n + c] -= f * m[col * n + c];
            }
            x[r] -= f * x[col];
        }
    }
    for r in (0..n).rev() {
        let mut s = x[r];
        for c in (r + 1)..n {
            s -= m[r * n + c] * x[c];
        }
        x[r] = s / m[r * n + r];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn identity_and_scaled_identity() {
        let b = [1.5, -2.0, 3.25];
        let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(solve_linear(&id, &b).unwrap(), b.to_vec());
        let two: Vec<f64> = id.iter().map(|v| 2.0 * v).collect();
        assert_eq!(solve_linear(&two, &b).unwrap(), vec![0.75, -1.0, 1.625]);
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = [1.0, 2.0, 2.0, 4.0];
        assert_eq!(solve_linear(&a, &[1.0, 2.0]), Err(Error::Singular));
    }

    #[test]
    fn random_16x16_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = 16;
            let mut a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for i in 0..n {
                a[i * n + i] += 4.0;
            }
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = solve_linear(&a, &b).unwrap();
            let r: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum::<f64>() - b[i])
                .collect();
            let a_norm = norm(&a);
            assert!(norm(&r) <= 1e-12 * (a_norm * norm(&x) + norm(&b)));
        }
    }
}

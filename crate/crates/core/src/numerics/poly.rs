use super::{eigenvalues, tol};
use crate::error::{Error, Result};

/// Real cubic `c3 x^3 + c2 x^2 + c1 x + c0`. Leading coefficients may vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polynomial3 {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Polynomial3 {
    pub fn new(c3: f64, c2: f64, c1: f64, c0: f64) -> Self {
        Self { c3, c2, c1, c0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((self.c3 * x + self.c2) * x + self.c1) * x + self.c0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (3.0 * self.c3 * x + 2.0 * self.c2) * x + self.c1
    }

    /// Largest magnitude among the individual terms `c_i x^i`.
    pub fn max_term(&self, x: f64) -> f64 {
        [self.c3 * x * x * x, self.c2 * x * x, self.c1 * x, self.c0]
            .iter()
            .fold(0.0f64, |m, t| m.max(t.abs()))
    }

    /// `|p(x)| / max_i |c_i x^i|`.
    pub fn relative_residual(&self, x: f64) -> f64 {
        let scale = self.max_term(x);
        if scale == 0.0 {
            0.0
        } else {
            self.eval(x).abs() / scale
        }
    }

    /// Discriminant `18abcd - 4b^3 d + b^2 c^2 - 4ac^3 - 27a^2 d^2`; positive
    /// iff the cubic has three distinct real roots.
    pub fn discriminant(&self) -> f64 {
        let (a, b, c, d) = (self.c3, self.c2, self.c1, self.c0);
        18.0 * a * b * c * d - 4.0 * b * b * b * d + b * b * c * c - 4.0 * a * c * c * c - 27.0 * a * a * d * d
    }

    fn polish(&self, mut x: f64) -> f64 {
        for _ in 0..8 {
            let f = self.eval(x);
            if f == 0.0 {
                break;
            }
            let df = self.derivative(x);
            if df == 0.0 || !df.is_finite() {
                break;
            }
            let next = x - f / df;
            if !next.is_finite() || (self.eval(next).abs() >= f.abs()) {
                break;
            }
            x = next;
        }
        x
    }
}

/// Real roots of a cubic in ascending order.
///
/// Candidates come from the eigenvalues of the balanced companion matrix.
/// Each candidate is Newton-polished, kept only if its relative residual is
/// within [`tol::ROOT_RESIDUAL`], and roots closer than [`tol::ROOT_MERGE`]
/// (relative) are merged.
pub fn real_roots_cubic(p: &Polynomial3) -> Result<Vec<f64>> {
    let coeffs = [p.c3, p.c2, p.c1, p.c0];
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Degenerate("non-finite polynomial coefficient"));
    }
    let lead = match coeffs.iter().position(|&c| c != 0.0) {
        Some(i) => i,
        None => return Err(Error::Degenerate("all-zero polynomial")),
    };
    let degree = 3 - lead;
    let candidates: Vec<f64> = match degree {
        0 => Vec::new(),
        1 => vec![-p.c0 / p.c1],
        _ => {
            // Monic companion matrix in row-major order.
            let a = coeffs[lead];
            let tail: Vec<f64> = coeffs[lead + 1..].iter().map(|c| c / a).collect();
            let mut comp = vec![0.0; degree * degree];
            for (j, c) in tail.iter().enumerate() {
                comp[j] = -c;
            }
            for i in 1..degree {
                comp[i * degree + i - 1] = 1.0;
            }
            eigenvalues(&comp, degree)?
                .into_iter()
                .filter(|z| z.im.abs() <= tol::IMAG_CUTOFF * z.re.abs().max(1.0))
                .map(|z| z.re)
                .collect()
        }
    };

    let mut roots: Vec<f64> = candidates
        .into_iter()
        .map(|x| p.polish(x))
        .filter(|&x| p.relative_residual(x) <= tol::ROOT_RESIDUAL)
        .collect();
    roots.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        match merged.last() {
            Some(&last) if (r - last).abs() <= tol::ROOT_MERGE * last.abs().max(1.0) => {}
            _ => merged.push(r),
        }
    }
    Ok(merged)
}

use crate::error::{Error, Result};

/// Strict interior local maxima of sampled data.
///
/// A flat run of equal samples that is strictly higher than both neighbours
/// is reported once, at the midpoint of its abscissae.
pub fn find_local_maxima(xs: &[f64], ys: &[f64]) -> Result<Vec<(f64, f64)>> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidGrid(format!("length mismatch: {} vs {}", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidGrid("need at least 3 samples".into()));
    }
    let n = ys.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if ys[i] > ys[i - 1] {
            let mut j = i;
            while j + 1 < n && ys[j + 1] == ys[i] {
                j += 1;
            }
            if j + 1 < n && ys[j + 1] < ys[i] {
                out.push((0.5 * (xs[i] + xs[j]), ys[i]));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    Ok(out)
}

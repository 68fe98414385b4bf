//! Least-squares slopes for convergence-order estimates.

use crate::error::{invalid, Result};

/// Slope of the least-squares line through `(ln x_i, ln |y_i|)`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(invalid("y", "length differs from x"));
    }
    if x.len() < 2 {
        return Err(invalid("x", "need at least two points"));
    }
    if x.iter().any(|v| !(*v > 0.0)) {
        return Err(invalid("x", "abscissae must be positive"));
    }
    if y.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return Err(invalid("y", "residuals must be finite and nonzero"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid("x", "abscissae are all equal"));
    }
    Ok(sxy / sxx)
}

use crate::error::{Error, Result};

use super::vector::DenseVector;

/// Central finite differences of `f` at `theta`, one coordinate at a time.
pub fn finite_diff_grad<F>(f: F, theta: &DenseVector, h: f64) -> Result<DenseVector>
where
    F: Fn(&[f64]) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::arg(format!("step must be positive, got {h}")));
    }
    let mut probe = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = f(&probe);
        probe[i] = orig - h;
        let minus = f(&probe);
        probe[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::Numeric(format!(
                "objective not finite around coordinate {i}"
            )));
        }
        grad.push((plus - minus) / (2.0 * h));
    }
    DenseVector::try_new(grad)
}

/// `|a - b| / max(|a|, |b|, 1e-6)`; the floor keeps near-zero components
/// from reporting noise as error.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Largest coordinate-wise relative error between two gradients.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> Result<f64> {
    Error::check_dim(analytic.len(), numeric.len())?;
    Ok(analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max))
}

/// Compares an analytic gradient at `theta` against central differences.
/// Returns the maximum relative error.
pub fn check_gradient<F>(f: F, analytic: &[f64], theta: &DenseVector, h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let numeric = finite_diff_grad(f, theta, h)?;
    max_relative_error(analytic, &numeric)
}

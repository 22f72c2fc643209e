//! Multinomial logistic regression trained by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{softmax, Features};

use super::common::{prepare, Classifier};
use super::config::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogReg {
    labels: Vec<String>,
    dim: usize,
    /// Row-major `C × (d + 1)`; the last column of each row is the bias.
    params: Vec<f64>,
}

/// Mean cross-entropy plus `λ/2 ‖W‖²` (biases unregularized) and its
/// gradient. `params` is row-major `C × (d + 1)` with the bias last.
pub fn softmax_objective(
    params: &[f64],
    x: &[Features],
    targets: &[usize],
    n_classes: usize,
    lambda: f64,
) -> (f64, Vec<f64>) {
    let stride = params.len() / n_classes;
    let d = stride - 1;
    let mut loss = 0.0;
    let mut grad = vec![0.0; params.len()];
    for c in 0..n_classes {
        let w = &params[c * stride..c * stride + d];
        loss += 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
        for (g, v) in grad[c * stride..c * stride + d].iter_mut().zip(w) {
            *g = lambda * v;
        }
    }
    let n = x.len() as f64;
    for (xi, &t) in x.iter().zip(targets) {
        let probs = class_probs(params, xi, n_classes);
        loss -= probs[t].max(f64::MIN_POSITIVE).ln() / n;
        for (c, p) in probs.iter().enumerate() {
            let coeff = (p - if c == t { 1.0 } else { 0.0 }) / n;
            let row = &mut grad[c * stride..(c + 1) * stride];
            xi.add_scaled_to(coeff, &mut row[..d]);
            row[d] += coeff;
        }
    }
    (loss, grad)
}

fn class_probs(params: &[f64], x: &Features, n_classes: usize) -> Vec<f64> {
    let stride = params.len() / n_classes;
    let logits: Vec<f64> = (0..n_classes)
        .map(|c| {
            let row = &params[c * stride..(c + 1) * stride];
            x.dot(&row[..stride - 1]) + row[stride - 1]
        })
        .collect();
    softmax(&logits)
}

/// Step size `1/L` from a bound on the objective's Lipschitz constant.
fn step_size(x: &[Features], lambda: f64) -> f64 {
    let max_sq = x.iter().map(|v| v.norm().powi(2)).fold(0.0, f64::max);
    1.0 / (0.5 * (max_sq + 1.0) + lambda)
}

pub fn train_logreg(x: &[Features], y: &[String], cfg: &TrainConfig) -> Result<LogReg> {
    cfg.validate()?;
    let p = prepare(x, y, 2)?;
    let c = p.labels.len();
    let mut params = vec![0.0; c * (p.dim + 1)];
    let step = step_size(x, cfg.lambda);
    for _ in 0..cfg.gd_iterations {
        let (_, grad) = softmax_objective(&params, x, &p.targets, c, cfg.lambda);
        for (w, g) in params.iter_mut().zip(&grad) {
            *w -= step * g;
        }
    }
    if params.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("logistic regression weights diverged".into()));
    }
    Ok(LogReg {
        labels: p.labels,
        dim: p.dim,
        params,
    })
}

impl LogReg {
    /// All-zero model over `labels`.
    pub fn zeros(labels: Vec<String>, dim: usize) -> Self {
        let params = vec![0.0; labels.len() * (dim + 1)];
        LogReg { labels, dim, params }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }
}

impl Classifier for LogReg {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    fn scores_unchecked(&self, x: &Features) -> Vec<f64> {
        class_probs(&self.params, x, self.labels.len())
    }
}

//! One-vs-rest linear SVMs trained by SGD on the L2-regularized hinge loss.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Features, RngStream};

use super::common::{prepare, Classifier};
use super::config::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    labels: Vec<String>,
    /// One weight row per class.
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

/// `λ/2 ‖w‖² + mean_i max(0, 1 − y_i (w·x_i + b))` with `params = [w.., b]`
/// and `y_i ∈ {−1, +1}`. The gradient is exact wherever no margin equals 1.
pub fn hinge_objective(params: &[f64], x: &[Features], y: &[f64], lambda: f64) -> (f64, Vec<f64>) {
    let d = params.len() - 1;
    let (w, b) = (&params[..d], params[d]);
    let mut loss = 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
    let mut grad: Vec<f64> = w.iter().map(|v| lambda * v).chain([0.0]).collect();
    let n = x.len() as f64;
    for (xi, &yi) in x.iter().zip(y) {
        let margin = yi * (xi.dot(w) + b);
        if margin < 1.0 {
            loss += (1.0 - margin) / n;
            xi.add_scaled_to(-yi / n, &mut grad[..d]);
            grad[d] -= yi / n;
        }
    }
    (loss, grad)
}

// w is stored as scale * v so the per-step shrinkage is O(1) on sparse input.
struct ScaledWeights {
    v: Vec<f64>,
    scale: f64,
}

impl ScaledWeights {
    fn shrink(&mut self, factor: f64) {
        self.scale *= factor;
        if self.scale < 1e-9 {
            for x in &mut self.v {
                *x *= self.scale;
            }
            self.scale = 1.0;
        }
    }

    fn into_weights(self) -> Vec<f64> {
        self.v.into_iter().map(|x| x * self.scale).collect()
    }
}

fn train_binary(x: &[Features], y: &[f64], cfg: &TrainConfig, rng: &mut RngStream, dim: usize) -> (Vec<f64>, f64) {
    let mut w = ScaledWeights {
        v: vec![0.0; dim],
        scale: 1.0,
    };
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut lr = cfg.lr;
    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        for &i in &order {
            let margin = y[i] * (w.scale * x[i].dot(&w.v) + b);
            w.shrink(1.0 - lr * cfg.lambda);
            if margin < 1.0 {
                x[i].add_scaled_to(lr * y[i] / w.scale, &mut w.v);
                b += lr * y[i];
            }
        }
        lr *= cfg.lr_decay;
    }
    (w.into_weights(), b)
}

pub fn train_linear_svm(x: &[Features], y: &[String], cfg: &TrainConfig, seed: u64) -> Result<LinearSvm> {
    cfg.validate()?;
    if cfg.lr * cfg.lambda >= 1.0 {
        return Err(Error::arg("lr × lambda must be below 1"));
    }
    let p = prepare(x, y, 2)?;
    let root = RngStream::new(seed);
    let mut weights = Vec::with_capacity(p.labels.len());
    let mut biases = Vec::with_capacity(p.labels.len());
    for class in 0..p.labels.len() {
        let signs: Vec<f64> = p
            .targets
            .iter()
            .map(|&t| if t == class { 1.0 } else { -1.0 })
            .collect();
        let (w, b) = train_binary(x, &signs, cfg, &mut root.derive(class as u64), p.dim);
        if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("linear SVM weights diverged".into()));
        }
        weights.push(w);
        biases.push(b);
    }
    Ok(LinearSvm {
        labels: p.labels,
        weights,
        biases,
    })
}

impl LinearSvm {
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }
}

impl Classifier for LinearSvm {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn input_dim(&self) -> usize {
        self.weights[0].len()
    }

    fn scores_unchecked(&self, x: &Features) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| x.dot(w) + b)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{check_gradient, DenseVector, SparseVector};

    fn dense(v: &[f64]) -> Features {
        Features::Dense(DenseVector::from(v.to_vec()))
    }

    #[test]
    fn separates_a_threshold_in_one_dimension() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            x.push(dense(&[-0.5 - i as f64 * 0.1]));
            y.push("A".to_string());
            x.push(dense(&[0.5 + i as f64 * 0.1]));
            y.push("B".to_string());
        }
        let m = train_linear_svm(&x, &y, &TrainConfig::default(), 1).unwrap();
        assert_eq!(m.predict_all(&x).unwrap(), y);
    }

    #[test]
    fn single_label_is_degenerate() {
        let x = vec![dense(&[1.0]), dense(&[2.0])];
        let y = vec!["A".to_string(); 2];
        assert!(matches!(
            train_linear_svm(&x, &y, &TrainConfig::default(), 1),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn sparse_and_dense_inputs_train_identically() {
        let rows = [[1.0, 0.0, 2.0], [0.0, 1.0, 0.0], [3.0, 0.0, 0.0], [0.0, 2.0, 1.0]];
        let y: Vec<String> = ["A", "B", "A", "B"].iter().map(|s| s.to_string()).collect();
        let dense_x: Vec<Features> = rows.iter().map(|r| dense(r)).collect();
        let sparse_x: Vec<Features> = rows
            .iter()
            .map(|r| {
                let pairs = r.iter().copied().enumerate().collect();
                Features::Sparse(SparseVector::from_pairs(3, pairs).unwrap())
            })
            .collect();
        let cfg = TrainConfig { epochs: 5, ..Default::default() };
        let a = train_linear_svm(&dense_x, &y, &cfg, 4).unwrap();
        let b = train_linear_svm(&sparse_x, &y, &cfg, 4).unwrap();
        for (wa, wb) in a.weights().iter().zip(b.weights()) {
            for (p, q) in wa.iter().zip(wb) {
                assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hinge_gradient_matches_finite_differences() {
        let mut rng = RngStream::new(8);
        let x: Vec<Features> = (0..12)
            .map(|_| dense(&[rng.normal(), rng.normal(), rng.normal()]))
            .collect();
        let y: Vec<f64> = (0..12).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let theta = DenseVector::from((0..4).map(|_| rng.normal() * 0.3).collect::<Vec<_>>());
        let (_, grad) = hinge_objective(&theta, &x, &y, 0.1);
        let err = check_gradient(|p| hinge_objective(p, &x, &y, 0.1).0, &grad, &theta, 1e-6).unwrap();
        assert!(err <= 1e-4, "{err}");
    }
}

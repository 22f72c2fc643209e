use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters for every fixed-vector model. Each trainer reads only
/// the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// L2 strength for linear SVM, logistic regression and the FFNN.
    pub lambda: f64,
    /// Initial SGD step size, multiplied by `lr_decay` after each epoch.
    pub lr: f64,
    pub lr_decay: f64,
    pub epochs: usize,
    /// Full-batch iterations for logistic regression.
    pub gd_iterations: usize,
    pub k: usize,
    pub trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Split candidates per node; `None` means ⌈√d⌉ for forests.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    /// RBF width; `None` means 1/d.
    pub gamma: Option<f64>,
    /// Box constraint of the kernel SVM.
    pub c: f64,
    pub smo_tolerance: f64,
    pub smo_max_iter: usize,
    pub hidden: (usize, usize),
    pub batch_size: usize,
    pub momentum: f64,
    pub patience: usize,
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 1e-4,
            lr: 0.1,
            lr_decay: 0.9,
            epochs: 50,
            gd_iterations: 300,
            k: 5,
            trees: 100,
            max_depth: 32,
            min_samples_split: 2,
            max_features: None,
            bootstrap: true,
            gamma: None,
            c: 1.0,
            smo_tolerance: 1e-3,
            smo_max_iter: 200_000,
            hidden: (128, 128),
            batch_size: 32,
            momentum: 0.9,
            patience: 5,
            validation_fraction: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive_reals = [
            ("lr", self.lr),
            ("lr_decay", self.lr_decay),
            ("c", self.c),
            ("smo_tolerance", self.smo_tolerance),
        ];
        for (name, v) in positive_reals {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::arg(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::arg(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::arg(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::arg(format!("gamma must be positive, got {g}")));
            }
        }
        let positive_counts = [
            ("epochs", self.epochs),
            ("gd_iterations", self.gd_iterations),
            ("k", self.k),
            ("trees", self.trees),
            ("max_depth", self.max_depth),
            ("smo_max_iter", self.smo_max_iter),
            ("hidden.0", self.hidden.0),
            ("hidden.1", self.hidden.1),
            ("batch_size", self.batch_size),
            ("patience", self.patience),
        ];
        for (name, v) in positive_counts {
            if v == 0 {
                return Err(Error::arg(format!("{name} must be positive")));
            }
        }
        if self.min_samples_split < 2 {
            return Err(Error::arg("min_samples_split must be at least 2"));
        }
        if self.max_features == Some(0) {
            return Err(Error::arg("max_features must be positive"));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction <= 0.5) {
            return Err(Error::arg(format!(
                "validation_fraction must lie in (0, 0.5], got {}",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

//! Fixed-vector classifiers: linear and RBF-kernel SVMs, logistic
//! regression, K-nearest neighbors, decision tree, random forest, a
//! two-hidden-layer feedforward network and cosine 1-NN.

mod common;
mod config;
mod ffnn;
mod kernel_svm;
mod linear_svm;
mod logreg;
mod neighbors;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use common::Classifier;
pub use config::TrainConfig;
pub use ffnn::{ffnn_init, ffnn_objective, train_ffnn, Ffnn, FfnnShape};
pub use kernel_svm::{rbf, train_kernel_svm, KernelSvm};
pub use linear_svm::{hinge_objective, train_linear_svm, LinearSvm};
pub use logreg::{softmax_objective, train_logreg, LogReg};
pub use neighbors::{train_cosine_1nn, train_knn, Cosine1nn, Knn};
pub use tree::{gini, train_decision_tree, train_random_forest, DecisionTree, Node, RandomForest, Tree};

use crate::error::{Error, Result};
use crate::numerics::Features;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    LinearSvm,
    KernelSvm,
    LogReg,
    Knn,
    RandomForest,
    DecisionTree,
    Ffnn,
    Cosine,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::LinearSvm,
        ModelKind::KernelSvm,
        ModelKind::LogReg,
        ModelKind::Knn,
        ModelKind::RandomForest,
        ModelKind::DecisionTree,
        ModelKind::Ffnn,
        ModelKind::Cosine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::LinearSvm => "linear-svm",
            ModelKind::KernelSvm => "svm",
            ModelKind::LogReg => "logreg",
            ModelKind::Knn => "knn",
            ModelKind::RandomForest => "random-forest",
            ModelKind::DecisionTree => "decision-tree",
            ModelKind::Ffnn => "ffnn",
            ModelKind::Cosine => "cosine",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = ModelKind::ALL.iter().map(|k| k.name()).collect();
                Error::arg(format!("unknown classifier {s:?} (known: {})", known.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model")]
pub enum TrainedModel {
    LinearSvm(LinearSvm),
    KernelSvm(KernelSvm),
    LogReg(LogReg),
    Knn(Knn),
    RandomForest(RandomForest),
    DecisionTree(DecisionTree),
    Ffnn(Ffnn),
    Cosine(Cosine1nn),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::LinearSvm(_) => ModelKind::LinearSvm,
            TrainedModel::KernelSvm(_) => ModelKind::KernelSvm,
            TrainedModel::LogReg(_) => ModelKind::LogReg,
            TrainedModel::Knn(_) => ModelKind::Knn,
            TrainedModel::RandomForest(_) => ModelKind::RandomForest,
            TrainedModel::DecisionTree(_) => ModelKind::DecisionTree,
            TrainedModel::Ffnn(_) => ModelKind::Ffnn,
            TrainedModel::Cosine(_) => ModelKind::Cosine,
        }
    }

    fn inner(&self) -> &dyn Classifier {
        match self {
            TrainedModel::LinearSvm(m) => m,
            TrainedModel::KernelSvm(m) => m,
            TrainedModel::LogReg(m) => m,
            TrainedModel::Knn(m) => m,
            TrainedModel::RandomForest(m) => m,
            TrainedModel::DecisionTree(m) => m,
            TrainedModel::Ffnn(m) => m,
            TrainedModel::Cosine(m) => m,
        }
    }
}

impl Classifier for TrainedModel {
    fn labels(&self) -> &[String] {
        self.inner().labels()
    }

    fn input_dim(&self) -> usize {
        self.inner().input_dim()
    }

    fn scores_unchecked(&self, x: &Features) -> Vec<f64> {
        self.inner().scores_unchecked(x)
    }
}

/// Trains `kind` on `(x, y)`. Models without randomness ignore `seed`.
pub fn train_model(kind: ModelKind, x: &[Features], y: &[String], cfg: &TrainConfig, seed: u64) -> Result<TrainedModel> {
    Ok(match kind {
        ModelKind::LinearSvm => TrainedModel::LinearSvm(train_linear_svm(x, y, cfg, seed)?),
        ModelKind::KernelSvm => TrainedModel::KernelSvm(train_kernel_svm(x, y, cfg)?),
        ModelKind::LogReg => TrainedModel::LogReg(train_logreg(x, y, cfg)?),
        ModelKind::Knn => TrainedModel::Knn(train_knn(x, y, cfg)?),
        ModelKind::RandomForest => TrainedModel::RandomForest(train_random_forest(x, y, cfg, seed)?),
        ModelKind::DecisionTree => TrainedModel::DecisionTree(train_decision_tree(x, y, cfg)?),
        ModelKind::Ffnn => TrainedModel::Ffnn(train_ffnn(x, y, cfg, seed)?),
        ModelKind::Cosine => TrainedModel::Cosine(train_cosine_1nn(x, y)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{argmax, DenseVector, RngStream};

    fn blobs(seed: u64, n: usize) -> (Vec<Features>, Vec<String>) {
        let centers = [(0.0, 4.0), (-4.0, -3.0), (4.0, -3.0)];
        let mut rng = RngStream::new(seed);
        (0..n)
            .map(|i| {
                let (cx, cy) = centers[i % 3];
                (
                    Features::Dense(DenseVector::from(vec![cx + rng.normal(), cy + rng.normal()])),
                    format!("blob{}", i % 3),
                )
            })
            .unzip()
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.name().parse::<ModelKind>().unwrap(), k);
        }
        assert!("perceptron".parse::<ModelKind>().is_err());
    }

    #[test]
    fn every_model_fits_blobs_and_survives_json() {
        let (x, y) = blobs(1, 150);
        let (tx, ty) = blobs(2, 60);
        let cfg = TrainConfig {
            trees: 20,
            hidden: (16, 16),
            ..Default::default()
        };
        for kind in ModelKind::ALL {
            let m = train_model(kind, &x, &y, &cfg, 7).unwrap();
            assert_eq!(m.kind(), kind);
            let pred = m.predict_all(&tx).unwrap();
            let correct = pred.iter().zip(&ty).filter(|(p, g)| p == g).count();
            assert!(correct >= 57, "{kind}: {correct}/60");
            for xi in &tx {
                let s = m.predict_scores(xi).unwrap();
                assert_eq!(m.labels()[argmax(&s)], m.predict(xi).unwrap());
            }
            let json = serde_json::to_string(&m).unwrap();
            let back: TrainedModel = serde_json::from_str(&json).unwrap();
            for xi in &tx {
                let a = m.predict_scores(xi).unwrap();
                let b = back.predict_scores(xi).unwrap();
                assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()), "{kind}");
            }
        }
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let (x, y) = blobs(1, 30);
        let m = train_model(ModelKind::LogReg, &x, &y, &TrainConfig::default(), 0).unwrap();
        let q = Features::Dense(DenseVector::from(vec![1.0, 2.0, 3.0]));
        assert!(matches!(m.predict(&q), Err(Error::Dimension { .. })));
    }
}

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::numerics::{argmax, Features, Matrix};

/// A trained model over fixed-dimension feature vectors.
///
/// `predict` is the argmax of `predict_scores`, ties going to the label
/// that sorts first.
pub trait Classifier {
    /// Label order used by `predict_scores` (ascending by name).
    fn labels(&self) -> &[String];

    fn input_dim(&self) -> usize;

    fn scores_unchecked(&self, x: &Features) -> Vec<f64>;

    fn predict_scores(&self, x: &Features) -> Result<Vec<f64>> {
        Error::check_dim(self.input_dim(), x.dim())?;
        Ok(self.scores_unchecked(x))
    }

    fn predict_index(&self, x: &Features) -> Result<usize> {
        Ok(argmax(&self.predict_scores(x)?))
    }

    fn predict(&self, x: &Features) -> Result<String> {
        Ok(self.labels()[self.predict_index(x)?].clone())
    }

    fn predict_all(&self, xs: &[Features]) -> Result<Vec<String>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }
}

/// Sorted distinct label names plus the per-record class indices.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub labels: Vec<String>,
    pub targets: Vec<usize>,
    pub dim: usize,
}

/// Validates a training set and maps labels to indices in ascending name order.
pub(crate) fn prepare(x: &[Features], y: &[String], min_classes: usize) -> Result<Prepared> {
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Error::check_dim(x.len(), y.len())?;
    let dim = x[0].dim();
    for xi in x {
        Error::check_dim(dim, xi.dim())?;
    }
    let labels: Vec<String> = y.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if labels.len() < min_classes {
        return Err(Error::Degenerate(format!(
            "need at least {min_classes} classes, found {}",
            labels.len()
        )));
    }
    let targets = y
        .iter()
        .map(|l| labels.binary_search(l).expect("label collected above"))
        .collect();
    Ok(Prepared { labels, targets, dim })
}

/// Row-major dense copy of the inputs.
pub(crate) fn densify(x: &[Features], dim: usize) -> Matrix {
    let mut m = Matrix::zeros(x.len(), dim);
    for (r, xi) in x.iter().enumerate() {
        xi.add_scaled_to(1.0, m.row_mut(r));
    }
    m
}

/// Largest-count class; ties go to the lowest index.
pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

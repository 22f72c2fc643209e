//! Instance-based models: Euclidean K-nearest neighbors and cosine 1-NN.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cosine_slices, squared_distance, Features, Matrix};

use super::common::{densify, prepare, Classifier};
use super::config::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    labels: Vec<String>,
    k: usize,
    points: Matrix,
    targets: Vec<usize>,
}

pub fn train_knn(x: &[Features], y: &[String], cfg: &TrainConfig) -> Result<Knn> {
    cfg.validate()?;
    let p = prepare(x, y, 1)?;
    if cfg.k > x.len() {
        return Err(Error::arg(format!("K = {} exceeds {} training points", cfg.k, x.len())));
    }
    Ok(Knn {
        labels: p.labels,
        k: cfg.k,
        points: densify(x, p.dim),
        targets: p.targets,
    })
}

impl Knn {
    /// Training indices of the K nearest points, nearest first; equal
    /// distances keep the lower index first.
    pub fn neighbors(&self, x: &Features) -> Vec<usize> {
        let q = x.to_dense();
        let mut d: Vec<(f64, usize)> = (0..self.points.rows())
            .map(|i| (squared_distance(self.points.row(i), &q), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d.into_iter().take(self.k).map(|(_, i)| i).collect()
    }
}

impl Classifier for Knn {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn input_dim(&self) -> usize {
        self.points.cols()
    }

    /// Vote count plus a fraction below one that is larger the nearer the
    /// label's closest neighbor, so vote ties go to the nearest label.
    fn scores_unchecked(&self, x: &Features) -> Vec<f64> {
        let mut scores = vec![0.0; self.labels.len()];
        let mut seen = vec![false; self.labels.len()];
        let k = self.k as f64;
        for (rank, i) in self.neighbors(x).into_iter().enumerate() {
            let t = self.targets[i];
            scores[t] += 1.0;
            if !seen[t] {
                seen[t] = true;
                scores[t] += (k - rank as f64) / (k + 1.0);
            }
        }
        scores
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cosine1nn {
    labels: Vec<String>,
    points: Matrix,
    targets: Vec<usize>,
}

pub fn train_cosine_1nn(x: &[Features], y: &[String]) -> Result<Cosine1nn> {
    let p = prepare(x, y, 1)?;
    Ok(Cosine1nn {
        labels: p.labels,
        points: densify(x, p.dim),
        targets: p.targets,
    })
}

impl Cosine1nn {
    /// Training index with the largest cosine to `x`; ties go to the lower index.
    pub fn nearest(&self, x: &Features) -> usize {
        let q = x.to_dense();
        let mut best = 0;
        let mut best_sim = f64::NEG_INFINITY;
        for i in 0..self.points.rows() {
            let s = cosine_slices(self.points.row(i), &q);
            if s > best_sim {
                best_sim = s;
                best = i;
            }
        }
        best
    }
}

impl Classifier for Cosine1nn {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn input_dim(&self) -> usize {
        self.points.cols()
    }

    /// Per-label maximum cosine. A label tied with the winner but whose
    /// best instance has a higher index is nudged just below it.
    fn scores_unchecked(&self, x: &Features) -> Vec<f64> {
        let q = x.to_dense();
        let mut scores = vec![f64::NEG_INFINITY; self.labels.len()];
        let mut best = (f64::NEG_INFINITY, 0usize);
        for i in 0..self.points.rows() {
            let s = cosine_slices(self.points.row(i), &q);
            let t = self.targets[i];
            if s > scores[t] {
                scores[t] = s;
            }
            if s > best.0 {
                best = (s, t);
            }
        }
        let (top, winner) = best;
        for (t, s) in scores.iter_mut().enumerate() {
            if t != winner && *s == top {
                *s = top.next_down();
            }
        }
        scores
    }
}

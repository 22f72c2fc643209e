use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-length vector of finite 64-bit reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn try_new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("entry {i} is {}", values[i])));
        }
        Ok(DenseVector(values))
    }

    pub fn zeros(len: usize) -> Self {
        DenseVector(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &DenseVector) -> Result<f64> {
        Error::check_dim(self.len(), other.len())?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn scaled(&self, c: f64) -> DenseVector {
        DenseVector(self.0.iter().map(|v| v * c).collect())
    }
}

impl From<Vec<f64>> for DenseVector {
    /// Panics if any entry is NaN or infinite.
    fn from(values: Vec<f64>) -> Self {
        assert!(
            values.iter().all(|v| v.is_finite()),
            "DenseVector entries must be finite"
        );
        DenseVector(values)
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a sparse vector from unordered `(index, value)` pairs.
    /// Duplicate indices are summed; zero results are dropped.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        pairs.sort_by_key(|&(i, _)| i);
        let mut indices: Vec<usize> = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if i >= dim {
                return Err(Error::arg(format!("sparse index {i} >= dim {dim}")));
            }
            if !v.is_finite() {
                return Err(Error::Numeric(format!("sparse entry {i} is {v}")));
            }
            match indices.last() {
                Some(&last) if last == i => *values.last_mut().unwrap() += v,
                _ => {
                    indices.push(i);
                    values.push(v);
                }
            }
        }
        let mut out = SparseVector {
            dim,
            indices: Vec::with_capacity(values.len()),
            values: Vec::with_capacity(values.len()),
        };
        for (i, v) in indices.into_iter().zip(values) {
            if v != 0.0 {
                out.indices.push(i);
                out.values.push(v);
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }

    pub fn scaled(&self, c: f64) -> SparseVector {
        if c == 0.0 {
            return SparseVector::zeros(self.dim);
        }
        SparseVector {
            dim: self.dim,
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn to_dense(&self) -> DenseVector {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        DenseVector(out)
    }
}

/// Output of any encoder: either dense or sparse, always of a fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Features {
    Dense(DenseVector),
    Sparse(SparseVector),
}

impl Features {
    pub fn dim(&self) -> usize {
        match self {
            Features::Dense(d) => d.len(),
            Features::Sparse(s) => s.dim(),
        }
    }

    /// Dot product with a dense weight slice of the same dimension.
    pub fn dot(&self, weights: &[f64]) -> f64 {
        match self {
            Features::Dense(d) => dot(d, weights),
            Features::Sparse(s) => s.iter().map(|(i, v)| v * weights[i]).sum(),
        }
    }

    /// `target += alpha * self`.
    pub fn add_scaled_to(&self, alpha: f64, target: &mut [f64]) {
        match self {
            Features::Dense(d) => {
                for (t, v) in target.iter_mut().zip(d.iter()) {
                    *t += alpha * v;
                }
            }
            Features::Sparse(s) => {
                for (i, v) in s.iter() {
                    target[i] += alpha * v;
                }
            }
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Features::Dense(d) => d.norm(),
            Features::Sparse(s) => s.norm(),
        }
    }

    pub fn to_dense(&self) -> DenseVector {
        match self {
            Features::Dense(d) => d.clone(),
            Features::Sparse(s) => s.to_dense(),
        }
    }

    pub fn scaled(&self, c: f64) -> Features {
        match self {
            Features::Dense(d) => Features::Dense(d.scaled(c)),
            Features::Sparse(s) => Features::Sparse(s.scaled(c)),
        }
    }
}

impl From<DenseVector> for Features {
    fn from(v: DenseVector) -> Self {
        Features::Dense(v)
    }
}

impl From<SparseVector> for Features {
    fn from(v: SparseVector) -> Self {
        Features::Sparse(v)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cosine of the angle between `a` and `b`; 0.0 when either has zero norm.
pub fn cosine_similarity(a: &DenseVector, b: &DenseVector) -> Result<f64> {
    Error::check_dim(a.len(), b.len())?;
    Ok(cosine_slices(a, b))
}

pub(crate) fn cosine_slices(a: &[f64], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{truncated_svd, DenseVector, Matrix, SparseVector};

/// Singular values below this are treated as zero and their components dropped.
pub const MIN_SINGULAR_VALUE: f64 = 1e-12;

/// Default topic count before capping at `min(n_docs, V) - 1`.
pub const DEFAULT_RANK: usize = 100;

/// Fold-in map from term space to topic space: `V_k · diag(S_k)⁻¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsaProjection {
    /// V × k
    projection: Matrix,
    singular_values: Vec<f64>,
    /// V × k, unscaled right singular vectors (for reconstruction).
    components: Matrix,
}

impl LsaProjection {
    pub fn dim(&self) -> usize {
        self.singular_values.len()
    }

    pub fn input_dim(&self) -> usize {
        self.projection.rows()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Right singular vectors, one column per kept topic.
    pub fn components(&self) -> &Matrix {
        &self.components
    }

    /// Reconstructs term-space rows from topic-space encodings:
    /// `Z · diag(S) · Vᵀ`.
    pub fn reconstruct(&self, encoded: &Matrix) -> Result<Matrix> {
        Error::check_dim(self.dim(), encoded.cols())?;
        let mut scaled = encoded.clone();
        for r in 0..scaled.rows() {
            for (c, s) in self.singular_values.iter().enumerate() {
                let v = scaled.get(r, c) * s;
                scaled.set(r, c, v);
            }
        }
        scaled.matmul(&self.components.transpose())
    }
}

/// Topic count actually used for a corpus: `requested` capped at
/// `min(n_docs, V) - 1` (never below 1).
pub fn effective_rank(requested: usize, n_docs: usize, vocab: usize) -> usize {
    requested.min(n_docs.min(vocab).saturating_sub(1)).max(1)
}

/// Stacks sparse document vectors into a dense doc-term matrix.
pub fn doc_term_matrix(docs: &[SparseVector]) -> Result<Matrix> {
    let cols = docs.first().map_or(0, SparseVector::dim);
    let mut m = Matrix::zeros(docs.len(), cols);
    for (r, d) in docs.iter().enumerate() {
        Error::check_dim(cols, d.dim())?;
        for (c, v) in d.iter() {
            m.set(r, c, v);
        }
    }
    Ok(m)
}

/// Truncated SVD of the doc-term matrix `x`; keeps components whose singular
/// value is at least [`MIN_SINGULAR_VALUE`].
pub fn lsa_fit(x: &Matrix, k: usize) -> Result<LsaProjection> {
    let svd = truncated_svd(x, k)?;
    let kept: Vec<usize> = (0..svd.s.len())
        .filter(|&j| svd.s[j] >= MIN_SINGULAR_VALUE)
        .collect();
    if kept.len() < svd.s.len() {
        warn!(
            "LSA: dropped {} component(s) with singular value < {MIN_SINGULAR_VALUE}; output dimension {}",
            svd.s.len() - kept.len(),
            kept.len()
        );
    }
    if kept.is_empty() {
        return Err(Error::Degenerate("doc-term matrix has no nonzero singular value".into()));
    }
    let n_terms = x.cols();
    let mut projection = Matrix::zeros(n_terms, kept.len());
    let mut components = Matrix::zeros(n_terms, kept.len());
    for (c, &j) in kept.iter().enumerate() {
        for r in 0..n_terms {
            let v = svd.v.get(r, j);
            components.set(r, c, v);
            projection.set(r, c, v / svd.s[j]);
        }
    }
    Ok(LsaProjection {
        projection,
        singular_values: kept.iter().map(|&j| svd.s[j]).collect(),
        components,
    })
}

/// Folds a term-space vector into topic space.
pub fn lsa_encode(proj: &LsaProjection, v: &SparseVector) -> Result<DenseVector> {
    Error::check_dim(proj.input_dim(), v.dim())?;
    let mut out = vec![0.0; proj.dim()];
    for (i, x) in v.iter() {
        for (o, p) in out.iter_mut().zip(proj.projection.row(i)) {
            *o += x * p;
        }
    }
    DenseVector::try_new(out)
}

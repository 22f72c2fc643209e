use serde::{Deserialize, Serialize};

use crate::data::{Utterance, Vocabulary};
use crate::error::{Error, Result};
use crate::numerics::{DenseVector, Matrix, RngStream};

use super::bow::IdfTable;

/// Vocabulary-aligned token vectors (one row per token).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    vocab: Vocabulary,
    vectors: Matrix,
}

impl EmbeddingTable {
    pub fn new(vocab: Vocabulary, vectors: Matrix) -> Result<Self> {
        Error::check_dim(vocab.len(), vectors.rows())?;
        Ok(EmbeddingTable { vocab, vectors })
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn lookup(&self, token: &str) -> Option<&[f64]> {
        self.vocab.index_of(token).map(|i| self.vectors.row(i))
    }

    /// Independent standard-normal vectors for every token of `vocab`.
    pub fn random(vocab: Vocabulary, dim: usize, seed: u64) -> Self {
        let mut rng = RngStream::new(seed);
        let data = (0..vocab.len() * dim).map(|_| rng.normal()).collect();
        let vectors = Matrix::from_vec(vocab.len(), dim, data).expect("sized above");
        EmbeddingTable { vocab, vectors }
    }
}

/// Unweighted mean of the in-vocabulary token vectors; zero when none.
pub fn avg_encode(u: &Utterance, table: &EmbeddingTable) -> DenseVector {
    weighted_mean(u, table, |_| 1.0)
}

/// `Σ idf(t)·emb(t) / Σ idf(t)` over in-vocabulary tokens; zero when none.
pub fn idf_avg_encode(u: &Utterance, table: &EmbeddingTable, idf: &IdfTable) -> DenseVector {
    weighted_mean(u, table, |t| idf.weight(t))
}

fn weighted_mean(u: &Utterance, table: &EmbeddingTable, weight: impl Fn(&str) -> f64) -> DenseVector {
    let mut acc = vec![0.0; table.dim()];
    let mut total = 0.0;
    for t in &u.tokens {
        if let Some(row) = table.lookup(t) {
            let w = weight(t);
            total += w;
            for (a, v) in acc.iter_mut().zip(row) {
                *a += w * v;
            }
        }
    }
    if total > 0.0 {
        for a in acc.iter_mut() {
            *a /= total;
        }
    }
    DenseVector::from(acc)
}

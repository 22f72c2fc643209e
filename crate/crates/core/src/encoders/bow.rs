use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::data::{build_vocabulary, LabeledDataset, Utterance, Vocabulary};
use crate::numerics::SparseVector;

/// Token counts over `vocab`; out-of-vocabulary tokens are skipped.
pub fn count_encode(vocab: &Vocabulary, u: &Utterance) -> SparseVector {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for t in &u.tokens {
        if let Some(i) = vocab.index_of(t) {
            *counts.entry(i).or_insert(0.0) += 1.0;
        }
    }
    SparseVector::from_pairs(vocab.len(), counts.into_iter().collect())
        .expect("vocabulary indices are in range")
}

/// Smoothed inverse document frequencies: `ln((1 + N) / (1 + df)) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfTable {
    weights: BTreeMap<String, f64>,
    default_weight: f64,
    n_docs: usize,
}

pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

impl IdfTable {
    pub fn from_vocabulary(vocab: &Vocabulary) -> Self {
        let n = vocab.n_docs();
        let weights = vocab
            .tokens()
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), smoothed_idf(n, vocab.df_at(i))))
            .collect();
        IdfTable {
            weights,
            default_weight: smoothed_idf(n, 0),
            n_docs: n,
        }
    }

    /// Every token weighs `w` (w > 0).
    pub fn uniform(w: f64) -> Self {
        assert!(w > 0.0, "idf weights must be positive");
        IdfTable {
            weights: BTreeMap::new(),
            default_weight: w,
            n_docs: 0,
        }
    }

    /// Explicit per-token weights with a default for unseen tokens.
    pub fn from_weights(weights: BTreeMap<String, f64>, default_weight: f64) -> Self {
        assert!(
            default_weight > 0.0 && weights.values().all(|&w| w > 0.0),
            "idf weights must be positive"
        );
        IdfTable {
            weights,
            default_weight,
            n_docs: 0,
        }
    }

    pub fn weight(&self, token: &str) -> f64 {
        self.weights.get(token).copied().unwrap_or(self.default_weight)
    }

    pub fn default_weight(&self) -> f64 {
        self.default_weight
    }
}

/// Learns document frequencies on `ds`.
pub fn tfidf_fit(ds: &LabeledDataset) -> IdfTable {
    IdfTable::from_vocabulary(&build_vocabulary(ds, 1))
}

/// Raw term frequency times idf, scaled to unit L2 norm (zero stays zero).
pub fn tfidf_encode(vocab: &Vocabulary, idf: &IdfTable, u: &Utterance) -> SparseVector {
    let counts = count_encode(vocab, u);
    let weighted: Vec<(usize, f64)> = counts
        .iter()
        .map(|(i, tf)| (i, tf * idf.weight(vocab.token(i))))
        .collect();
    let norm = weighted.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    if norm == 0.0 {
        return SparseVector::zeros(vocab.len());
    }
    SparseVector::from_pairs(
        vocab.len(),
        weighted.into_iter().map(|(i, w)| (i, w / norm)).collect(),
    )
    .expect("indices come from a valid sparse vector")
}

//! Skip-gram with negative sampling.
//!
//! For every (center, context) pair inside a dynamically shrunk window the
//! center vector `v_c` and output vectors `u` are updated by SGD on
//! `log σ(u_o·v_c) + Σ_k log σ(−u_k·v_c)`, with `k` noise tokens drawn from
//! the unigram distribution raised to 0.75. The learning rate decays
//! linearly over all training steps. Only center vectors are returned.

use serde::{Deserialize, Serialize};

use crate::data::{build_vocabulary, LabeledDataset};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};

use super::embedding::EmbeddingTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr: f64,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 15,
            lr: 0.025,
        }
    }
}

impl SgnsConfig {
    pub fn with_dim(dim: usize) -> Self {
        SgnsConfig {
            dim,
            ..SgnsConfig::default()
        }
    }
}

/// Trained table plus the mean per-pair loss of each epoch.
#[derive(Debug, Clone)]
pub struct SgnsModel {
    pub table: EmbeddingTable,
    pub epoch_loss: Vec<f64>,
}

const NOISE_POWER: f64 = 0.75;
const MIN_LR_FRACTION: f64 = 1e-4;

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

struct NoiseSampler {
    cumulative: Vec<f64>,
}

impl NoiseSampler {
    fn new(freqs: &[usize]) -> Self {
        let mut acc = 0.0;
        let cumulative = freqs
            .iter()
            .map(|&f| {
                acc += (f as f64).powf(NOISE_POWER);
                acc
            })
            .collect();
        NoiseSampler { cumulative }
    }

    fn sample(&self, rng: &mut RngStream) -> usize {
        let total = *self.cumulative.last().unwrap();
        let x = rng.next_f64() * total;
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }
}

/// Trains skip-gram embeddings on `ds` (pass the training split only).
pub fn sgns_train(ds: &LabeledDataset, cfg: &SgnsConfig, seed: u64) -> Result<EmbeddingTable> {
    sgns_train_with_loss(ds, cfg, seed).map(|m| m.table)
}

pub fn sgns_train_with_loss(ds: &LabeledDataset, cfg: &SgnsConfig, seed: u64) -> Result<SgnsModel> {
    if cfg.dim == 0 || cfg.window == 0 || cfg.epochs == 0 || !(cfg.lr.is_finite() && cfg.lr > 0.0) {
        return Err(Error::arg(format!("invalid SGNS config {cfg:?}")));
    }
    let vocab = build_vocabulary(ds, 1);
    if vocab.is_empty() {
        return Err(Error::arg("SGNS needs a nonempty corpus"));
    }
    let sentences: Vec<Vec<usize>> = ds
        .utterances()
        .map(|u| u.tokens.iter().filter_map(|t| vocab.index_of(t)).collect())
        .collect();
    let mut freqs = vec![0usize; vocab.len()];
    for s in &sentences {
        for &t in s {
            freqs[t] += 1;
        }
    }
    let noise = NoiseSampler::new(&freqs);
    let n_tokens: usize = freqs.iter().sum();

    let dim = cfg.dim;
    let mut rng = RngStream::new(seed);
    let mut init = rng.derive_str("init");
    let mut centers: Vec<f64> = (0..vocab.len() * dim)
        .map(|_| init.uniform(-0.5, 0.5) / dim as f64)
        .collect();
    let mut outputs = vec![0.0; vocab.len() * dim];
    let mut grad = vec![0.0; dim];

    let total_steps = (n_tokens * cfg.epochs).max(1) as f64;
    let mut step = 0usize;
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let mut loss = 0.0;
        let mut pairs = 0usize;
        for &si in &order {
            let sent = &sentences[si];
            for (pos, &center) in sent.iter().enumerate() {
                let lr = cfg.lr * (1.0 - step as f64 / total_steps).max(MIN_LR_FRACTION);
                step += 1;
                let span = 1 + rng.below(cfg.window);
                let lo = pos.saturating_sub(span);
                let hi = (pos + span).min(sent.len() - 1);
                for (ctx_pos, &context) in sent.iter().enumerate().take(hi + 1).skip(lo) {
                    if ctx_pos == pos {
                        continue;
                    }
                    let v = center * dim..(center + 1) * dim;
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for k in 0..=cfg.negatives {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let t = noise.sample(&mut rng);
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let u = target * dim..(target + 1) * dim;
                        let score: f64 = centers[v.clone()]
                            .iter()
                            .zip(&outputs[u.clone()])
                            .map(|(a, b)| a * b)
                            .sum();
                        loss -= if label == 1.0 {
                            log_sigmoid(score)
                        } else {
                            log_sigmoid(-score)
                        };
                        let g = (label - sigmoid(score)) * lr;
                        for ((gr, o), c) in grad
                            .iter_mut()
                            .zip(outputs[u].iter_mut())
                            .zip(&centers[v.clone()])
                        {
                            *gr += g * *o;
                            *o += g * c;
                        }
                    }
                    for (c, g) in centers[v].iter_mut().zip(&grad) {
                        *c += g;
                    }
                    pairs += 1;
                }
            }
        }
        let mean = if pairs > 0 { loss / pairs as f64 } else { 0.0 };
        if !mean.is_finite() {
            return Err(Error::Numeric("SGNS loss diverged".into()));
        }
        epoch_loss.push(mean);
    }
    let table = EmbeddingTable::new(vocab, Matrix::from_vec(freqs.len(), dim, centers)?)?;
    Ok(SgnsModel { table, epoch_loss })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_follow_dim() {
        let ds = LabeledDataset::from_pairs([("A", "kal ka mausam batao"), ("B", "gaana bajao yaar")]);
        for dim in [25, 512] {
            let cfg = SgnsConfig {
                epochs: 1,
                ..SgnsConfig::with_dim(dim)
            };
            let t = sgns_train(&ds, &cfg, 1).unwrap();
            assert_eq!((t.len(), t.dim()), (7, dim));
        }
    }

    #[test]
    fn same_seed_bit_identical() {
        let ds = LabeledDataset::from_pairs([("A", "a b c d e"), ("B", "c d e f g a")]);
        let cfg = SgnsConfig::with_dim(8);
        assert_eq!(sgns_train(&ds, &cfg, 3).unwrap(), sgns_train(&ds, &cfg, 3).unwrap());
        assert_ne!(sgns_train(&ds, &cfg, 3).unwrap(), sgns_train(&ds, &cfg, 4).unwrap());
    }

    #[test]
    fn empty_corpus_rejected() {
        let ds = LabeledDataset::from_pairs([("A", "?!")]);
        assert!(matches!(
            sgns_train(&ds, &SgnsConfig::with_dim(4), 1),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn noise_sampler_respects_support() {
        let s = NoiseSampler::new(&[0, 5, 0, 1]);
        let mut rng = RngStream::new(2);
        for _ in 0..500 {
            let t = s.sample(&mut rng);
            assert!(t == 1 || t == 3);
        }
    }

    #[test]
    fn final_loss_finite_and_decreasing() {
        let ds = LabeledDataset::from_pairs(
            (0..40).map(|i| ("A", if i % 2 == 0 { "a b c d a b c d" } else { "e f g h e f g h" })),
        );
        let m = sgns_train_with_loss(&ds, &SgnsConfig::with_dim(10), 5).unwrap();
        let first = m.epoch_loss[0];
        let last = *m.epoch_loss.last().unwrap();
        assert!(last.is_finite() && last < first);
    }
}

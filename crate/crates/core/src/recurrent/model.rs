//! Stacked recurrent sequence classifiers over frozen token embeddings.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::data::{stratified_indices, LabeledDataset, Utterance};
use crate::encoders::EmbeddingTable;
use crate::error::{Error, Result};
use crate::harness::macro_f1_indices;
use crate::numerics::{argmax, softmax, RngStream};

use super::cell::{CellGrad, CellKind, CellRef, Step};
use super::early_stop::{early_stop, StopDecision, TrainHistory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pooling {
    /// Top-layer hidden state after the last token.
    Last,
    /// Mean of the top-layer hidden states over all steps.
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeqConfig {
    pub hidden: usize,
    pub layers: usize,
    pub lr: f64,
    pub clip_norm: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub validation_fraction: f64,
    pub max_len: usize,
    pub pooling: Pooling,
}

impl Default for SeqConfig {
    fn default() -> Self {
        SeqConfig {
            hidden: 64,
            layers: 2,
            lr: 0.01,
            clip_norm: 5.0,
            batch_size: 32,
            max_epochs: 50,
            patience: 5,
            validation_fraction: 0.1,
            max_len: 64,
            pooling: Pooling::Last,
        }
    }
}

impl SeqConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hidden", self.hidden),
            ("layers", self.layers),
            ("batch_size", self.batch_size),
            ("max_epochs", self.max_epochs),
            ("patience", self.patience),
            ("max_len", self.max_len),
        ] {
            if v == 0 {
                return Err(Error::arg(format!("{name} must be positive")));
            }
        }
        for (name, v) in [("lr", self.lr), ("clip_norm", self.clip_norm)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::arg(format!("{name} must be positive, got {v}")));
            }
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

/// Sizes of a stacked network. The flat parameter vector holds, per layer,
/// `W U b` in the cell layout, followed by the output projection `V`
/// (`C × H`, row-major) and its bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqShape {
    pub kind: CellKind,
    pub input_dim: usize,
    pub hidden: usize,
    pub layers: usize,
    pub n_classes: usize,
}

impl SeqShape {
    fn layer_input(&self, l: usize) -> usize {
        if l == 0 {
            self.input_dim
        } else {
            self.hidden
        }
    }

    fn layer_size(&self, l: usize) -> usize {
        let gh = self.kind.gates() * self.hidden;
        gh * (self.layer_input(l) + self.hidden + 1)
    }

    fn layer_offset(&self, l: usize) -> usize {
        (0..l).map(|k| self.layer_size(k)).sum()
    }

    fn output_offset(&self) -> usize {
        self.layer_offset(self.layers)
    }

    pub fn n_params(&self) -> usize {
        self.output_offset() + self.n_classes * (self.hidden + 1)
    }

    /// `(w, u, b)` ranges of layer `l`.
    fn cell_ranges(&self, l: usize) -> [std::ops::Range<usize>; 3] {
        let gh = self.kind.gates() * self.hidden;
        let o = self.layer_offset(l);
        let w_end = o + gh * self.layer_input(l);
        let u_end = w_end + gh * self.hidden;
        [o..w_end, w_end..u_end, u_end..u_end + gh]
    }

    fn cell<'a>(&self, params: &'a [f64], l: usize) -> CellRef<'a> {
        let [w, u, b] = self.cell_ranges(l);
        CellRef {
            kind: self.kind,
            input_dim: self.layer_input(l),
            hidden: self.hidden,
            w: &params[w],
            u: &params[u],
            b: &params[b],
        }
    }

    /// Uniform(−1/√H, 1/√H) everywhere; LSTM forget-gate biases start at 1.
    pub fn init(&self, seed: u64) -> Vec<f64> {
        let mut rng = RngStream::new(seed);
        let bound = 1.0 / (self.hidden as f64).sqrt();
        let mut params: Vec<f64> = (0..self.n_params()).map(|_| rng.uniform(-bound, bound)).collect();
        if self.kind == CellKind::Lstm {
            for l in 0..self.layers {
                let [_, _, b] = self.cell_ranges(l);
                let h = self.hidden;
                params[b.start + h..b.start + 2 * h].iter_mut().for_each(|v| *v = 1.0);
            }
        }
        params
    }
}

struct Trace {
    /// Per layer, per step.
    steps: Vec<Vec<Step>>,
    pooled: Vec<f64>,
    probs: Vec<f64>,
}

fn run_forward<S: AsRef<[f64]>>(params: &[f64], shape: &SeqShape, pooling: Pooling, seq: &[S]) -> Trace {
    let h = shape.hidden;
    let zeros = vec![0.0; h];
    let mut steps: Vec<Vec<Step>> = Vec::with_capacity(shape.layers);
    for l in 0..shape.layers {
        let cell = shape.cell(params, l);
        let mut layer: Vec<Step> = Vec::with_capacity(seq.len());
        for t in 0..seq.len() {
            let x: &[f64] = if l == 0 { seq[t].as_ref() } else { &steps[l - 1][t].h };
            let (hp, cp) = match layer.last() {
                Some(s) => (&s.h[..], if s.c.is_empty() { &zeros[..] } else { &s.c[..] }),
                None => (&zeros[..], &zeros[..]),
            };
            let s = cell.forward(x, hp, cp);
            layer.push(s);
        }
        steps.push(layer);
    }
    let top = &steps[shape.layers - 1];
    let pooled = match pooling {
        Pooling::Last => top[top.len() - 1].h.clone(),
        Pooling::Mean => {
            let mut m = vec![0.0; h];
            for s in top {
                for (a, v) in m.iter_mut().zip(&s.h) {
                    *a += v / top.len() as f64;
                }
            }
            m
        }
    };
    let o = shape.output_offset();
    let bias = o + shape.n_classes * h;
    let logits: Vec<f64> = (0..shape.n_classes)
        .map(|c| {
            params[bias + c]
                + params[o + c * h..o + (c + 1) * h]
                    .iter()
                    .zip(&pooled)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
        })
        .collect();
    Trace {
        steps,
        pooled,
        probs: softmax(&logits),
    }
}

/// Adds `scale ×` the cross-entropy gradient of one sequence and returns its loss.
fn backprop<S: AsRef<[f64]>>(
    params: &[f64],
    shape: &SeqShape,
    pooling: Pooling,
    seq: &[S],
    target: usize,
    scale: f64,
    grad: &mut [f64],
) -> f64 {
    let trace = run_forward(params, shape, pooling, seq);
    let h = shape.hidden;
    let t_len = seq.len();
    let o = shape.output_offset();
    let bias = o + shape.n_classes * h;
    let mut d_pooled = vec![0.0; h];
    for c in 0..shape.n_classes {
        let dl = scale * (trace.probs[c] - if c == target { 1.0 } else { 0.0 });
        grad[bias + c] += dl;
        for k in 0..h {
            grad[o + c * h + k] += dl * trace.pooled[k];
            d_pooled[k] += dl * params[o + c * h + k];
        }
    }
    // Gradient arriving at each top-layer hidden state from above.
    let mut from_above: Vec<Vec<f64>> = vec![vec![0.0; h]; t_len];
    match pooling {
        Pooling::Last => from_above[t_len - 1].copy_from_slice(&d_pooled),
        Pooling::Mean => {
            for d in &mut from_above {
                for (a, v) in d.iter_mut().zip(&d_pooled) {
                    *a = v / t_len as f64;
                }
            }
        }
    }

    let zeros = vec![0.0; h];
    for l in (0..shape.layers).rev() {
        let cell = shape.cell(params, l);
        let [wr, ur, br] = shape.cell_ranges(l);
        let (head, rest) = grad.split_at_mut(ur.start);
        let (gu, gb_rest) = rest.split_at_mut(br.start - ur.start);
        let mut g = CellGrad {
            w: &mut head[wr],
            u: gu,
            b: &mut gb_rest[..br.len()],
        };
        let in_dim = shape.layer_input(l);
        let mut below: Vec<Vec<f64>> = if l > 0 { vec![vec![0.0; in_dim]; t_len] } else { Vec::new() };
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let layer = &trace.steps[l];
        for t in (0..t_len).rev() {
            let dh: Vec<f64> = dh_next.iter().zip(&from_above[t]).map(|(a, b)| a + b).collect();
            let x: &[f64] = if l == 0 { seq[t].as_ref() } else { &trace.steps[l - 1][t].h };
            let (hp, cp) = if t > 0 {
                let s = &layer[t - 1];
                (&s.h[..], if s.c.is_empty() { &zeros[..] } else { &s.c[..] })
            } else {
                (&zeros[..], &zeros[..])
            };
            let mut dh_prev = vec![0.0; h];
            let mut dc_prev = vec![0.0; h];
            let dx = if l > 0 { Some(&mut below[t][..]) } else { None };
            cell.backward(x, hp, cp, &layer[t], &dh, &dc_next, &mut g, &mut dh_prev, &mut dc_prev, dx);
            dh_next = dh_prev;
            dc_next = dc_prev;
        }
        from_above = below;
    }
    -trace.probs[target].max(f64::MIN_POSITIVE).ln()
}

/// Mean cross-entropy over `(seqs, targets)` and its gradient with respect
/// to the flat parameter vector. Each sequence must have at least one step.
pub fn sequence_objective<S: AsRef<[f64]>>(
    params: &[f64],
    shape: &SeqShape,
    pooling: Pooling,
    seqs: &[Vec<S>],
    targets: &[usize],
) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; params.len()];
    let n = seqs.len() as f64;
    let loss = seqs
        .iter()
        .zip(targets)
        .map(|(s, &t)| backprop(params, shape, pooling, s, t, 1.0 / n, &mut grad))
        .sum::<f64>()
        / n;
    (loss, grad)
}

/// Class probabilities for one sequence.
pub fn sequence_probs<S: AsRef<[f64]>>(params: &[f64], shape: &SeqShape, pooling: Pooling, seq: &[S]) -> Vec<f64> {
    run_forward(params, shape, pooling, seq).probs
}

/// Token vectors for `u`: OOV tokens map to zeros, input is cut at
/// `max_len` tokens, and an empty utterance becomes one zero step.
pub fn embed_sequence<'a>(u: &Utterance, table: &'a EmbeddingTable, zeros: &'a [f64], max_len: usize) -> Vec<&'a [f64]> {
    let mut seq: Vec<&[f64]> = u
        .tokens
        .iter()
        .take(max_len)
        .map(|t| table.lookup(t).unwrap_or(zeros))
        .collect();
    if seq.is_empty() {
        seq.push(zeros);
    }
    seq
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceModel {
    labels: Vec<String>,
    config: SeqConfig,
    shape: SeqShape,
    table: EmbeddingTable,
    params: Vec<f64>,
    history: TrainHistory,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

fn clip(grad: &mut [f64], max_norm: f64) {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= s);
    }
}

/// Record order independent of the input order: by label, then tokens.
fn canonical_order(ds: &LabeledDataset) -> Vec<usize> {
    let recs = ds.records();
    let mut idx: Vec<usize> = (0..recs.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ra, rb) = (&recs[a], &recs[b]);
        match ra.label.cmp(&rb.label) {
            Ordering::Equal => ra.utterance.tokens.cmp(&rb.utterance.tokens),
            o => o,
        }
    });
    idx
}

/// Trains a stacked `kind` network on `ds` with `table` frozen as input.
pub fn train_sequence_model(
    kind: CellKind,
    ds: &LabeledDataset,
    table: &EmbeddingTable,
    cfg: &SeqConfig,
    seed: u64,
) -> Result<(SequenceModel, TrainHistory)> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let labels = ds.labels().to_vec();
    if labels.len() < 2 {
        return Err(Error::Degenerate(format!("need at least 2 classes, found {}", labels.len())));
    }
    let order = canonical_order(ds);
    let zeros = vec![0.0; table.dim()];
    let recs = ds.records();
    let seqs: Vec<Vec<&[f64]>> = order
        .iter()
        .map(|&i| embed_sequence(&recs[i].utterance, table, &zeros, cfg.max_len))
        .collect();
    let targets: Vec<usize> = order
        .iter()
        .map(|&i| labels.binary_search(&recs[i].label).expect("label from dataset"))
        .collect();
    let label_strings: Vec<String> = targets.iter().map(|&t| labels[t].clone()).collect();

    let shape = SeqShape {
        kind,
        input_dim: table.dim(),
        hidden: cfg.hidden,
        layers: cfg.layers,
        n_classes: labels.len(),
    };
    let root = RngStream::new(seed);
    let (train_idx, val_idx) = stratified_indices(&label_strings, cfg.validation_fraction, root.derive_str("validation").seed())?;
    let train_idx = if train_idx.is_empty() { val_idx.clone() } else { train_idx };
    let eval_idx = if val_idx.is_empty() { train_idx.clone() } else { val_idx };

    let mut params = shape.init(root.derive_str("init").seed());
    let mut best_params = params.clone();
    let mut adam = Adam::new(params.len());
    let mut grad = vec![0.0; params.len()];
    let mut shuffle = root.derive_str("shuffle");
    let mut batch_order = train_idx.clone();
    let mut history = TrainHistory::default();

    for _ in 0..cfg.max_epochs {
        shuffle.shuffle(&mut batch_order);
        let mut epoch_loss = 0.0;
        for batch in batch_order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                epoch_loss += backprop(&params, &shape, cfg.pooling, &seqs[i], targets[i], scale, &mut grad);
            }
            clip(&mut grad, cfg.clip_norm);
            adam.step(&mut params, &grad, cfg.lr);
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("{kind} weights diverged")));
        }
        let preds: Vec<usize> = eval_idx
            .iter()
            .map(|&i| argmax(&sequence_probs(&params, &shape, cfg.pooling, &seqs[i])))
            .collect();
        let golds: Vec<usize> = eval_idx.iter().map(|&i| targets[i]).collect();
        let f1 = macro_f1_indices(&preds, &golds, labels.len());
        let prev_best = history.val_f1.get(history.best_epoch).copied();
        history.push(epoch_loss / train_idx.len() as f64, f1);
        if prev_best.is_none_or(|b| f1 > b) {
            best_params.copy_from_slice(&params);
        }
        if let StopDecision::StopAndRestore { .. } = early_stop(&history, cfg.patience) {
            break;
        }
    }
    let model = SequenceModel {
        labels,
        config: cfg.clone(),
        shape,
        table: table.clone(),
        params: best_params,
        history: history.clone(),
    };
    Ok((model, history))
}

impl SequenceModel {
    pub fn from_parts(labels: Vec<String>, config: SeqConfig, shape: SeqShape, table: EmbeddingTable, params: Vec<f64>) -> Result<Self> {
        Error::check_dim(shape.n_params(), params.len())?;
        Error::check_dim(shape.n_classes, labels.len())?;
        Error::check_dim(shape.input_dim, table.dim())?;
        Ok(SequenceModel {
            labels,
            config,
            shape,
            table,
            params,
            history: TrainHistory::default(),
        })
    }

    pub fn kind(&self) -> CellKind {
        self.shape.kind
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn shape(&self) -> &SeqShape {
        &self.shape
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn history(&self) -> &TrainHistory {
        &self.history
    }

    pub fn predict_scores(&self, u: &Utterance) -> Vec<f64> {
        let zeros = vec![0.0; self.table.dim()];
        let seq = embed_sequence(u, &self.table, &zeros, self.config.max_len);
        sequence_probs(&self.params, &self.shape, self.config.pooling, &seq)
    }

    pub fn predict(&self, u: &Utterance) -> String {
        self.labels[argmax(&self.predict_scores(u))].clone()
    }

    pub fn predict_all(&self, ds: &LabeledDataset) -> Vec<String> {
        ds.utterances().map(|u| self.predict(u)).collect()
    }
}

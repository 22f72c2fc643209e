//! Two-hidden-layer ReLU network with a softmax output, trained by
//! mini-batch SGD with momentum and early stopping on validation macro-F1.

use serde::{Deserialize, Serialize};

use crate::data::stratified_indices;
use crate::error::{Error, Result};
use crate::harness::macro_f1_indices;
use crate::numerics::{argmax, softmax, Features, RngStream};
use crate::recurrent::{early_stop, StopDecision, TrainHistory};

use super::common::{prepare, Classifier};
use super::config::TrainConfig;

/// Layer widths `[input, h1, h2, classes]`. Parameters are stored flat as
/// `W1 b1 W2 b2 W3 b3`, each `W` input-major (`in × out`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FfnnShape(pub [usize; 4]);

impl FfnnShape {
    pub fn n_params(&self) -> usize {
        (0..3).map(|l| (self.0[l] + 1) * self.0[l + 1]).sum()
    }

    /// `(weights_offset, bias_offset)` of layer `l`.
    fn offsets(&self, l: usize) -> (usize, usize) {
        let start: usize = (0..l).map(|k| (self.0[k] + 1) * self.0[k + 1]).sum();
        (start, start + self.0[l] * self.0[l + 1])
    }

    fn is_weight(&self, i: usize) -> bool {
        (0..3).any(|l| {
            let (w, b) = self.offsets(l);
            (w..b).contains(&i)
        })
    }
}

struct Activations {
    h1: Vec<f64>,
    h2: Vec<f64>,
    probs: Vec<f64>,
}

fn dense_layer(params: &[f64], shape: &FfnnShape, l: usize, input: &[f64], relu: bool) -> Vec<f64> {
    let (w, b) = shape.offsets(l);
    let out_dim = shape.0[l + 1];
    let mut z = params[b..b + out_dim].to_vec();
    for (i, &a) in input.iter().enumerate() {
        if a != 0.0 {
            let row = &params[w + i * out_dim..w + (i + 1) * out_dim];
            for (zo, wo) in z.iter_mut().zip(row) {
                *zo += a * wo;
            }
        }
    }
    if relu {
        z.iter_mut().for_each(|v| *v = v.max(0.0));
    }
    z
}

fn forward(params: &[f64], shape: &FfnnShape, x: &Features) -> Activations {
    let (w, b) = shape.offsets(0);
    let h = shape.0[1];
    let mut h1 = params[b..b + h].to_vec();
    let mut add_row = |i: usize, v: f64| {
        for (zo, wo) in h1.iter_mut().zip(&params[w + i * h..w + (i + 1) * h]) {
            *zo += v * wo;
        }
    };
    match x {
        Features::Dense(d) => d.iter().enumerate().filter(|(_, v)| **v != 0.0).for_each(|(i, &v)| add_row(i, v)),
        Features::Sparse(s) => s.iter().for_each(|(i, v)| add_row(i, v)),
    }
    h1.iter_mut().for_each(|v| *v = v.max(0.0));
    let h2 = dense_layer(params, shape, 1, &h1, true);
    let logits = dense_layer(params, shape, 2, &h2, false);
    Activations {
        h1,
        h2,
        probs: softmax(&logits),
    }
}

/// Adds `scale ×` the cross-entropy gradient of one example to `grad` and
/// returns its loss.
fn backprop(params: &[f64], shape: &FfnnShape, x: &Features, target: usize, scale: f64, grad: &mut [f64]) -> f64 {
    let act = forward(params, shape, x);
    let mut delta: Vec<f64> = act.probs.clone();
    delta[target] -= 1.0;
    let inputs = [&act.h1, &act.h2];
    for l in (1..3).rev() {
        let (w, b) = shape.offsets(l);
        let out_dim = shape.0[l + 1];
        let input = inputs[l - 1];
        for (g, d) in grad[b..b + out_dim].iter_mut().zip(&delta) {
            *g += scale * d;
        }
        let mut back = vec![0.0; shape.0[l]];
        for (i, &a) in input.iter().enumerate() {
            let row = w + i * out_dim..w + (i + 1) * out_dim;
            back[i] = params[row.clone()].iter().zip(&delta).map(|(p, d)| p * d).sum();
            if a != 0.0 {
                for (g, d) in grad[row].iter_mut().zip(&delta) {
                    *g += scale * a * d;
                }
            }
        }
        // ReLU derivative: zero where the activation was clamped.
        for (bk, &a) in back.iter_mut().zip(input) {
            if a <= 0.0 {
                *bk = 0.0;
            }
        }
        delta = back;
    }
    let (w, b) = shape.offsets(0);
    let h = shape.0[1];
    for (g, d) in grad[b..b + h].iter_mut().zip(&delta) {
        *g += scale * d;
    }
    let mut add = |i: usize, v: f64| {
        for (g, d) in grad[w + i * h..w + (i + 1) * h].iter_mut().zip(&delta) {
            *g += scale * v * d;
        }
    };
    match x {
        Features::Dense(dv) => dv.iter().enumerate().filter(|(_, v)| **v != 0.0).for_each(|(i, &v)| add(i, v)),
        Features::Sparse(s) => s.iter().for_each(|(i, v)| add(i, v)),
    }
    -act.probs[target].max(f64::MIN_POSITIVE).ln()
}

/// Mean cross-entropy over `(x, targets)` plus `λ/2` times the squared
/// norm of all weight matrices, and its gradient.
pub fn ffnn_objective(
    params: &[f64],
    shape: &FfnnShape,
    x: &[Features],
    targets: &[usize],
    lambda: f64,
) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; params.len()];
    let n = x.len() as f64;
    let mut loss = 0.0;
    for (xi, &t) in x.iter().zip(targets) {
        loss += backprop(params, shape, xi, t, 1.0 / n, &mut grad) / n;
    }
    for (i, (g, p)) in grad.iter_mut().zip(params).enumerate() {
        if shape.is_weight(i) {
            *g += lambda * p;
            loss += 0.5 * lambda * p * p;
        }
    }
    (loss, grad)
}

/// He-normal hidden layers and a zero output layer.
pub fn ffnn_init(shape: &FfnnShape, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed);
    let mut params = vec![0.0; shape.n_params()];
    for l in 0..2 {
        let (w, b) = shape.offsets(l);
        let std = (2.0 / shape.0[l].max(1) as f64).sqrt();
        for p in &mut params[w..b] {
            *p = rng.normal() * std;
        }
    }
    params
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ffnn {
    labels: Vec<String>,
    shape: FfnnShape,
    params: Vec<f64>,
    history: TrainHistory,
}

pub fn train_ffnn(x: &[Features], y: &[String], cfg: &TrainConfig, seed: u64) -> Result<Ffnn> {
    cfg.validate()?;
    let p = prepare(x, y, 2)?;
    let shape = FfnnShape([p.dim, cfg.hidden.0, cfg.hidden.1, p.labels.len()]);
    let root = RngStream::new(seed);
    let (train_idx, val_idx) = stratified_indices(y, cfg.validation_fraction, root.derive_str("validation").seed())?;
    let train_idx = if train_idx.is_empty() { val_idx.clone() } else { train_idx };

    let mut params = ffnn_init(&shape, root.derive_str("init").seed());
    let mut velocity = vec![0.0; params.len()];
    let mut grad = vec![0.0; params.len()];
    let mut order = train_idx.clone();
    let mut shuffle = root.derive_str("shuffle");
    let mut lr = cfg.lr;
    let mut history = TrainHistory::default();
    let mut best_params = params.clone();
    let weight_mask: Vec<bool> = (0..params.len()).map(|i| shape.is_weight(i)).collect();

    for _ in 0..cfg.epochs {
        shuffle.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                epoch_loss += backprop(&params, &shape, &x[i], p.targets[i], scale, &mut grad);
            }
            for (((w, v), g), &decay) in params.iter_mut().zip(&mut velocity).zip(&grad).zip(&weight_mask) {
                let g = if decay { g + cfg.lambda * *w } else { *g };
                *v = cfg.momentum * *v - lr * g;
                *w += *v;
            }
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("FFNN weights diverged".into()));
        }
        lr *= cfg.lr_decay;
        let eval_idx = if val_idx.is_empty() { &train_idx } else { &val_idx };
        let preds: Vec<usize> = eval_idx.iter().map(|&i| argmax(&forward(&params, &shape, &x[i]).probs)).collect();
        let golds: Vec<usize> = eval_idx.iter().map(|&i| p.targets[i]).collect();
        let f1 = macro_f1_indices(&preds, &golds, p.labels.len());
        let prev_best = history.val_f1.get(history.best_epoch).copied();
        history.push(epoch_loss / train_idx.len() as f64, f1);
        if prev_best.is_none_or(|b| f1 > b) {
            best_params.copy_from_slice(&params);
        }
        if let StopDecision::StopAndRestore { .. } = early_stop(&history, cfg.patience) {
            break;
        }
    }
    Ok(Ffnn {
        labels: p.labels,
        shape,
        params: best_params,
        history,
    })
}

impl Ffnn {
    pub fn from_parts(labels: Vec<String>, shape: FfnnShape, params: Vec<f64>) -> Result<Self> {
        Error::check_dim(shape.n_params(), params.len())?;
        Error::check_dim(shape.0[3], labels.len())?;
        Ok(Ffnn {
            labels,
            shape,
            params,
            history: TrainHistory::default(),
        })
    }

    pub fn shape(&self) -> FfnnShape {
        self.shape
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn history(&self) -> &TrainHistory {
        &self.history
    }
}

impl Classifier for Ffnn {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn input_dim(&self) -> usize {
        self.shape.0[0]
    }

    fn scores_unchecked(&self, x: &Features) -> Vec<f64> {
        forward(&self.params, &self.shape, x).probs
    }
}

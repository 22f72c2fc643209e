use serde::{Deserialize, Serialize};

/// Per-epoch training loss and validation macro-F1.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub val_f1: Vec<f64>,
    /// Zero-based epoch whose weights were kept.
    pub best_epoch: usize,
}

impl TrainHistory {
    pub fn epochs(&self) -> usize {
        self.val_f1.len()
    }

    pub fn push(&mut self, loss: f64, f1: f64) {
        self.train_loss.push(loss);
        self.val_f1.push(f1);
        self.best_epoch = best_epoch(&self.val_f1);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    /// Stop and restore the weights of this zero-based epoch.
    StopAndRestore { best: usize },
}

/// First epoch reaching the maximum score; later equal scores are not
/// improvements.
pub fn best_epoch(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Stops once the validation score has not strictly improved for
/// `patience` consecutive epochs.
pub fn early_stop(history: &TrainHistory, patience: usize) -> StopDecision {
    let scores = &history.val_f1;
    if scores.is_empty() {
        return StopDecision::Continue;
    }
    let best = best_epoch(scores);
    if scores.len() - 1 - best >= patience.max(1) {
        StopDecision::StopAndRestore { best }
    } else {
        StopDecision::Continue
    }
}

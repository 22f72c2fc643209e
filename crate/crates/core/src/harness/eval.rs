use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confusion matrix (gold × predicted) with per-class and averaged scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub labels: Vec<String>,
    pub confusion: Vec<Vec<usize>>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub macro_f1: f64,
    pub accuracy: f64,
}

/// Scores `preds` against `golds` over `label_set`.
///
/// Per-class F1 is `2PR/(P+R)`, zero when `P+R = 0`. Every class in
/// `label_set` enters the macro mean, including classes that never occur.
pub fn evaluate(preds: &[String], golds: &[String], label_set: &[String]) -> Result<EvalReport> {
    if preds.len() != golds.len() {
        return Err(Error::arg(format!(
            "{} predictions for {} gold labels",
            preds.len(),
            golds.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::arg("nothing to evaluate"));
    }
    let index: HashMap<&str, usize> = label_set
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    if index.len() != label_set.len() {
        return Err(Error::arg("label set has duplicates"));
    }
    let lookup = |l: &String| {
        index
            .get(l.as_str())
            .copied()
            .ok_or_else(|| Error::arg(format!("label {l:?} not in label set")))
    };
    let p: Vec<usize> = preds.iter().map(lookup).collect::<Result<_>>()?;
    let g: Vec<usize> = golds.iter().map(lookup).collect::<Result<_>>()?;
    Ok(report_from_indices(&p, &g, label_set))
}

fn report_from_indices(preds: &[usize], golds: &[usize], labels: &[String]) -> EvalReport {
    let c = labels.len();
    let mut confusion = vec![vec![0usize; c]; c];
    for (&p, &g) in preds.iter().zip(golds) {
        confusion[g][p] += 1;
    }
    let mut precision = vec![0.0; c];
    let mut recall = vec![0.0; c];
    let mut f1 = vec![0.0; c];
    for k in 0..c {
        let tp = confusion[k][k] as f64;
        let predicted: usize = (0..c).map(|g| confusion[g][k]).sum();
        let actual: usize = confusion[k].iter().sum();
        precision[k] = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        recall[k] = if actual > 0 { tp / actual as f64 } else { 0.0 };
        let denom = precision[k] + recall[k];
        f1[k] = if denom > 0.0 {
            2.0 * precision[k] * recall[k] / denom
        } else {
            0.0
        };
    }
    let macro_f1 = f1.iter().sum::<f64>() / c as f64;
    let correct: usize = (0..c).map(|k| confusion[k][k]).sum();
    EvalReport {
        labels: labels.to_vec(),
        confusion,
        precision,
        recall,
        f1,
        macro_f1,
        accuracy: correct as f64 / preds.len() as f64,
    }
}

/// Macro-F1 over class indices `0..n_classes`.
pub fn macro_f1_indices(preds: &[usize], golds: &[usize], n_classes: usize) -> f64 {
    let labels: Vec<String> = (0..n_classes).map(|i| i.to_string()).collect();
    report_from_indices(preds, golds, &labels).macro_f1
}

impl EvalReport {
    /// Human-readable summary: per-class table, averages, confusion matrix.
    pub fn to_text(&self) -> String {
        let width = self.labels.iter().map(String::len).max().unwrap_or(5).max(5);
        let mut out = String::new();
        writeln!(out, "{:<width$}  precision  recall  f1      support", "class").unwrap();
        for (k, l) in self.labels.iter().enumerate() {
            let support: usize = self.confusion[k].iter().sum();
            writeln!(
                out,
                "{l:<width$}  {:<9.4}  {:<6.4}  {:<6.4}  {support}",
                self.precision[k], self.recall[k], self.f1[k]
            )
            .unwrap();
        }
        writeln!(out).unwrap();
        writeln!(out, "macro-F1  {:.4}", self.macro_f1).unwrap();
        writeln!(out, "accuracy  {:.4}", self.accuracy).unwrap();
        writeln!(out).unwrap();
        writeln!(out, "confusion (rows = gold, cols = predicted)").unwrap();
        for (k, row) in self.confusion.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|n| format!("{n:>5}")).collect();
            writeln!(out, "{:<width$} {}", self.labels[k], cells.join("")).unwrap();
        }
        out
    }
}

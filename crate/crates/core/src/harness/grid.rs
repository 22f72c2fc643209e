//! Runs every (classifier, encoder) and (recurrent cell, embedding) pair on
//! one stratified split and writes score tables plus a manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::classifiers::{train_model, Classifier};
use crate::data::{generate_codemix, load_dataset, stratified_split, LabeledDataset};
use crate::encoders::{
    fit_encoder, load_sentence_vectors, load_word_embeddings, EmbeddingTable, Encoder, EncoderResources,
};
use crate::error::{Error, Result};
use crate::numerics::rng::{cell_seed, label_hash, mix_seed};
use crate::numerics::Features;
use crate::recurrent::train_sequence_model;

use super::eval::evaluate;
use super::spec::{format_grid_spec, DatasetSource, EmbeddingSource, GridSpec};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Scores for one cell, both ×100 and rounded to two decimals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellScore {
    pub macro_f1: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub outcome: std::result::Result<CellScore, String>,
    pub seconds: f64,
}

impl GridCell {
    pub fn macro_f1(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|s| s.macro_f1)
    }
}

/// Rows are models, columns are representations.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub cells: Vec<Vec<GridCell>>,
}

impl ScoreTable {
    pub fn get(&self, row: &str, col: &str) -> Option<&GridCell> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.cols.iter().position(|x| x == col)?;
        Some(&self.cells[r][c])
    }

    pub fn macro_f1(&self, row: &str, col: &str) -> Option<f64> {
        self.get(row, col).and_then(GridCell::macro_f1)
    }

    pub fn failures(&self) -> Vec<(&str, &str, &str)> {
        let mut out = Vec::new();
        for (r, row) in self.cells.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                if let Err(e) = &cell.outcome {
                    out.push((self.rows[r].as_str(), self.cols[c].as_str(), e.as_str()));
                }
            }
        }
        out
    }

    /// Tab-separated macro-F1 table; failed cells read `NA`.
    pub fn to_tsv(&self, corner: &str) -> String {
        let mut s = String::from(corner);
        for c in &self.cols {
            write!(s, "\t{c}").unwrap();
        }
        s.push('\n');
        for (name, row) in self.rows.iter().zip(&self.cells) {
            s.push_str(name);
            for cell in row {
                match cell.macro_f1() {
                    Some(v) => write!(s, "\t{v:.2}").unwrap(),
                    None => s.push_str("\tNA"),
                }
            }
            s.push('\n');
        }
        s
    }

    /// One line per cell with accuracy and any error. Wall times go to the
    /// manifest so result files stay byte-stable across reruns.
    pub fn cells_tsv(&self) -> String {
        let mut s = String::from("row\tcolumn\tmacro_f1\taccuracy\terror\n");
        for (name, row) in self.rows.iter().zip(&self.cells) {
            for (col, cell) in self.cols.iter().zip(row) {
                match &cell.outcome {
                    Ok(v) => writeln!(s, "{name}\t{col}\t{:.2}\t{:.2}\t", v.macro_f1, v.accuracy),
                    Err(e) => writeln!(s, "{name}\t{col}\tNA\tNA\t{e}"),
                }
                .unwrap();
            }
        }
        s
    }

    /// Aligned table; `*` marks the best score in each column.
    pub fn to_text(&self, title: &str) -> String {
        let best: Vec<Option<f64>> = (0..self.cols.len())
            .map(|c| {
                self.cells
                    .iter()
                    .filter_map(|row| row[c].macro_f1())
                    .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
            })
            .collect();
        let name_w = self.rows.iter().map(String::len).max().unwrap_or(0).max(4);
        let widths: Vec<usize> = self.cols.iter().map(|c| c.len().max(7)).collect();
        let mut s = format!("{title}\n\n{:name_w$}", "");
        for (c, w) in self.cols.iter().zip(&widths) {
            write!(s, "  {c:>w$}").unwrap();
        }
        s.push('\n');
        for (name, row) in self.rows.iter().zip(&self.cells) {
            write!(s, "{name:name_w$}").unwrap();
            for ((cell, w), b) in row.iter().zip(&widths).zip(&best) {
                let text = match cell.macro_f1() {
                    Some(v) if Some(v) == *b => format!("*{v:.2}"),
                    Some(v) => format!("{v:.2}"),
                    None => "FAILED".into(),
                };
                write!(s, "  {text:>w$}").unwrap();
            }
            s.push('\n');
        }
        let failures = self.failures();
        if !failures.is_empty() {
            s.push_str("\nfailed cells:\n");
            for (r, c, e) in failures {
                writeln!(s, "  {r} / {c}: {e}").unwrap();
            }
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct GridReport {
    pub spec: GridSpec,
    pub labels: Vec<String>,
    pub dataset_digest: String,
    pub train_digest: String,
    pub test_digest: String,
    pub n_train: usize,
    pub n_test: usize,
    pub classic: Option<ScoreTable>,
    pub recurrent: Option<ScoreTable>,
    /// `(stage, seconds)` in execution order.
    pub timing: Vec<(String, f64)>,
}

fn score(pct: f64) -> f64 {
    (pct * 10000.0).round() / 100.0
}

fn load(spec: &GridSpec) -> Result<LabeledDataset> {
    let ds = match &spec.dataset {
        DatasetSource::Codemix { seed, per_intent } => generate_codemix(*seed, *per_intent),
        DatasetSource::Path(p) => load_dataset(p)?,
    };
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(expected) = &spec.expected_dataset_digest {
        let actual = ds.digest();
        if &actual != expected {
            return Err(Error::Data(format!(
                "dataset digest {actual} does not match recorded {expected}"
            )));
        }
    }
    Ok(ds)
}

fn evaluate_cell(
    labels: &[String],
    gold: &[String],
    run: impl FnOnce() -> Result<Vec<String>>,
) -> GridCell {
    let start = Instant::now();
    let outcome = run()
        .and_then(|pred| evaluate(&pred, gold, labels))
        .map(|r| CellScore {
            macro_f1: score(r.macro_f1),
            accuracy: score(r.accuracy),
        })
        .map_err(|e| e.to_string());
    GridCell {
        outcome,
        seconds: start.elapsed().as_secs_f64(),
    }
}

type EncodedSplits = (Vec<Features>, Vec<Features>);

/// Runs `spec` with at most `jobs` cells in parallel (0 means all cores).
/// Failing cells are recorded, not fatal; a dataset that cannot be loaded
/// aborts the run. Results do not depend on `jobs`.
pub fn run_grid(spec: &GridSpec, jobs: usize) -> Result<GridReport> {
    spec.validate()?;
    let total = Instant::now();
    let mut timing = Vec::new();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::arg(format!("thread pool: {e}")))?;

    let ds = load(spec)?;
    let (train, test) = stratified_split(&ds, spec.test_fraction, spec.split_seed)?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::Data(format!(
            "split left {} train and {} test records",
            train.len(),
            test.len()
        )));
    }
    info!("dataset: {} records, {} train, {} test", ds.len(), train.len(), test.len());
    let labels = ds.labels().to_vec();
    let gold = test.label_strings();
    let train_y = train.label_strings();

    let mut resources = EncoderResources::new(mix_seed(spec.seed, label_hash("encoders")));
    if let Some(p) = &spec.external_words {
        resources.external_words = Some(Arc::new(load_word_embeddings(p)?));
    }
    if let Some(p) = &spec.external_sentences {
        resources.external_sentences = Some(Arc::new(load_sentence_vectors(p)?));
    }

    let classic = if spec.encoders.is_empty() {
        None
    } else {
        let mut columns: Vec<std::result::Result<EncodedSplits, String>> = Vec::new();
        for enc in &spec.encoders {
            let start = Instant::now();
            let fitted = fit_encoder(&enc.spec, &train, &mut resources).map(|f| {
                let (a, b) = pool.install(|| {
                    rayon::join(
                        || train.utterances().map(|u| f.encode(u)).collect::<Vec<_>>(),
                        || f.encode_all(&test),
                    )
                });
                (a, b)
            });
            if let Err(e) = &fitted {
                warn!("encoder {} failed: {e}", enc.name);
            }
            columns.push(fitted.map_err(|e| e.to_string()));
            timing.push((format!("encoder.{}", enc.name), start.elapsed().as_secs_f64()));
            info!("encoder {} ready", enc.name);
        }
        let pairs: Vec<(usize, usize)> = (0..spec.classifiers.len())
            .flat_map(|r| (0..spec.encoders.len()).map(move |c| (r, c)))
            .collect();
        let flat: Vec<GridCell> = pool.install(|| {
            pairs
                .par_iter()
                .map(|&(r, c)| {
                    let row = &spec.classifiers[r];
                    let cell = evaluate_cell(&labels, &gold, || {
                        let (xtr, xte) = columns[c].as_ref().map_err(|e| Error::Data(format!("encoder: {e}")))?;
                        let model = train_model(row.kind, xtr, &train_y, &row.config, cell_seed(spec.seed, r, c))?;
                        model.predict_all(xte)
                    });
                    info!("{} / {}: {:?}", row.name, spec.encoders[c].name, cell.macro_f1());
                    cell
                })
                .collect()
        });
        Some(assemble(
            spec.classifiers.iter().map(|c| c.name.clone()).collect(),
            spec.encoders.iter().map(|e| e.name.clone()).collect(),
            flat,
            &mut timing,
        ))
    };

    let recurrent = if spec.recurrent.is_empty() {
        None
    } else {
        let mut tables: Vec<std::result::Result<Arc<EmbeddingTable>, String>> = Vec::new();
        for emb in &spec.recurrent_embeddings {
            let start = Instant::now();
            let table = match &emb.source {
                EmbeddingSource::Sgns(cfg) => resources.sgns_table(&train, cfg),
                EmbeddingSource::ExternalWords => resources
                    .external_words
                    .clone()
                    .ok_or_else(|| Error::arg("external word embeddings not provided")),
            };
            tables.push(table.map_err(|e| e.to_string()));
            timing.push((format!("embedding.{}", emb.name), start.elapsed().as_secs_f64()));
        }
        let master = mix_seed(spec.seed, label_hash("recurrent"));
        let pairs: Vec<(usize, usize)> = (0..spec.recurrent.len())
            .flat_map(|r| (0..spec.recurrent_embeddings.len()).map(move |c| (r, c)))
            .collect();
        let flat: Vec<GridCell> = pool.install(|| {
            pairs
                .par_iter()
                .map(|&(r, c)| {
                    let row = &spec.recurrent[r];
                    let cell = evaluate_cell(&labels, &gold, || {
                        let table = tables[c].as_ref().map_err(|e| Error::Data(format!("embeddings: {e}")))?;
                        let (model, _) =
                            train_sequence_model(row.kind, &train, table, &row.config, cell_seed(master, r, c))?;
                        Ok(model.predict_all(&test))
                    });
                    info!("{} / {}: {:?}", row.name, spec.recurrent_embeddings[c].name, cell.macro_f1());
                    cell
                })
                .collect()
        });
        Some(assemble(
            spec.recurrent.iter().map(|c| c.name.clone()).collect(),
            spec.recurrent_embeddings.iter().map(|e| e.name.clone()).collect(),
            flat,
            &mut timing,
        ))
    };

    timing.push(("total".into(), total.elapsed().as_secs_f64()));
    Ok(GridReport {
        spec: spec.clone(),
        labels,
        dataset_digest: ds.digest(),
        train_digest: train.digest(),
        test_digest: test.digest(),
        n_train: train.len(),
        n_test: test.len(),
        classic,
        recurrent,
        timing,
    })
}

fn assemble(rows: Vec<String>, cols: Vec<String>, flat: Vec<GridCell>, timing: &mut Vec<(String, f64)>) -> ScoreTable {
    let mut it = flat.into_iter();
    let cells: Vec<Vec<GridCell>> = rows
        .iter()
        .map(|_| it.by_ref().take(cols.len()).collect())
        .collect();
    for (r, row) in rows.iter().zip(&cells) {
        for (c, cell) in cols.iter().zip(row) {
            timing.push((format!("cell.{r}.{c}"), cell.seconds));
        }
    }
    ScoreTable { rows, cols, cells }
}

impl GridReport {
    /// Normalized spec followed by `[manifest]`, `[outputs]` (file digests)
    /// and `[timing]`. Feeding the manifest back as a spec reproduces the run.
    pub fn manifest(&self, outputs: &[(String, String)]) -> String {
        let mut s = format_grid_spec(&self.spec);
        writeln!(s, "\n[manifest]").unwrap();
        writeln!(s, "tool_version = {TOOL_VERSION}").unwrap();
        writeln!(s, "dataset_digest = {}", self.dataset_digest).unwrap();
        writeln!(s, "train_digest = {}", self.train_digest).unwrap();
        writeln!(s, "test_digest = {}", self.test_digest).unwrap();
        writeln!(s, "n_train = {}", self.n_train).unwrap();
        writeln!(s, "n_test = {}", self.n_test).unwrap();
        writeln!(s, "labels = {}", self.labels.join(",")).unwrap();
        if !outputs.is_empty() {
            writeln!(s, "\n[outputs]").unwrap();
            for (name, digest) in outputs {
                writeln!(s, "{name} = {digest}").unwrap();
            }
        }
        writeln!(s, "\n[timing]").unwrap();
        for (k, v) in &self.timing {
            writeln!(s, "{k} = {v:.3}").unwrap();
        }
        s
    }

    /// Writes `results.{tsv,txt}`, `cells.tsv`, the recurrent counterparts
    /// when present, and `manifest.txt` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut outputs = Vec::new();
        let mut put = |name: &str, body: String| {
            let p = dir.join(name);
            outputs.push((name.to_string(), sha256_hex(body.as_bytes())));
            fs::write(&p, body).map_err(|e| Error::io(p, e))
        };
        if let Some(t) = &self.classic {
            put("results.tsv", t.to_tsv("classifier"))?;
            put("results.txt", t.to_text("macro-F1 x100, classifier by representation"))?;
            put("cells.tsv", t.cells_tsv())?;
        }
        if let Some(t) = &self.recurrent {
            put("recurrent.tsv", t.to_tsv("model"))?;
            put("recurrent.txt", t.to_text("macro-F1 x100, recurrent model by input embedding"))?;
            put("recurrent_cells.tsv", t.cells_tsv())?;
        }
        let manifest = self.manifest(&outputs);
        let p = dir.join(MANIFEST_FILE);
        fs::write(&p, manifest).map_err(|e| Error::io(p, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::spec::parse_grid_spec_str;

    const SPEC: &str = "[grid]\nseed = 4\n[dataset]\nper_intent = 12\n\
        [encoders]\nCount = count\nTfidf = tfidf\nLsa = count-lsa rank=3\n\
        [classifiers]\nLR = logreg\nKNN = knn k=500\nCos = cosine\n";

    #[test]
    fn failures_are_isolated_and_jobs_do_not_matter() {
        let spec = parse_grid_spec_str(SPEC, Path::new("/")).unwrap();
        let a = run_grid(&spec, 1).unwrap();
        let b = run_grid(&spec, 4).unwrap();
        let (ta, tb) = (a.classic.as_ref().unwrap(), b.classic.as_ref().unwrap());
        assert_eq!(ta.rows, tb.rows);
        for (ra, rb) in ta.cells.iter().zip(&tb.cells) {
            for (ca, cb) in ra.iter().zip(rb) {
                assert_eq!(ca.outcome, cb.outcome);
            }
        }
        assert_eq!(ta.failures().len(), 3, "{}", ta.to_text(""));
        assert!(ta.failures().iter().all(|(r, _, _)| *r == "KNN"));
        assert!(ta.macro_f1("LR", "Tfidf").unwrap() > 50.0);
        assert_eq!(a.manifest(&[]).lines().next(), Some("[grid]"));
    }

    #[test]
    fn manifest_reruns_identically() {
        let spec = parse_grid_spec_str(SPEC, Path::new("/")).unwrap();
        let a = run_grid(&spec, 2).unwrap();
        let again = parse_grid_spec_str(&a.manifest(&[]), Path::new("/")).unwrap();
        assert_eq!(again.expected_dataset_digest.as_deref(), Some(a.dataset_digest.as_str()));
        let b = run_grid(&again, 2).unwrap();
        assert_eq!(a.classic.unwrap().to_tsv("c"), b.classic.unwrap().to_tsv("c"));

        let mut wrong = again.clone();
        wrong.expected_dataset_digest = Some("0000".into());
        assert!(matches!(run_grid(&wrong, 1), Err(Error::Data(_))));
    }

    #[test]
    fn unreadable_dataset_aborts() {
        let text = "[grid]\nseed = 1\n[dataset]\npath = /nonexistent/x.tsv\n\
                    [encoders]\nA = count\n[classifiers]\nB = cosine\n";
        let spec = parse_grid_spec_str(text, Path::new("/")).unwrap();
        assert!(matches!(run_grid(&spec, 1), Err(Error::Io { .. })));
    }
}

//! Plain-text grid specifications.
//!
//! ```text
//! [grid]
//! seed = 1
//!
//! [dataset]
//! source = codemix
//! per_intent = 200
//!
//! [encoders]
//! Tfidf = tfidf
//! SG25-Avg = sgns-avg dim=25
//!
//! [classifiers]
//! Linear SVM = linear-svm
//! KNN = knn k=5
//! ```
//!
//! Sections: `[grid]`, `[dataset]`, `[external]`, `[encoders]`,
//! `[classifiers]`, `[recurrent]`, `[recurrent-embeddings]`. Row sections
//! map a display name to a kind followed by `key=value` parameters. The
//! `[manifest]`, `[outputs]` and `[timing]` sections written by a run are accepted so a
//! manifest can be fed back as a spec; a recorded dataset digest is checked
//! on rerun.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{ModelKind, TrainConfig};
use crate::encoders::{EncoderSpec, SgnsConfig, DEFAULT_RANK};
use crate::error::{Error, Result};
use crate::numerics::rng::{label_hash, mix_seed};
use crate::recurrent::{CellKind, Pooling, SeqConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DatasetSource {
    Codemix { seed: u64, per_intent: usize },
    Path(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EmbeddingSource {
    Sgns(SgnsConfig),
    ExternalWords,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedEncoder {
    pub name: String,
    pub spec: EncoderSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedClassifier {
    pub name: String,
    pub kind: ModelKind,
    pub config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedRecurrent {
    pub name: String,
    pub kind: CellKind,
    pub config: SeqConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedEmbedding {
    pub name: String,
    pub source: EmbeddingSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub seed: u64,
    pub dataset: DatasetSource,
    pub test_fraction: f64,
    pub split_seed: u64,
    pub external_words: Option<PathBuf>,
    pub external_sentences: Option<PathBuf>,
    pub encoders: Vec<NamedEncoder>,
    pub classifiers: Vec<NamedClassifier>,
    pub recurrent: Vec<NamedRecurrent>,
    pub recurrent_embeddings: Vec<NamedEmbedding>,
    /// Dataset digest recorded by an earlier run, checked before training.
    pub expected_dataset_digest: Option<String>,
}

/// One test record for every ten training records.
pub const DEFAULT_TEST_FRACTION: f64 = 1.0 / 11.0;
pub const DEFAULT_PER_INTENT: usize = 200;

/// Split seed used when a spec does not set one.
pub fn default_split_seed(seed: u64) -> u64 {
    mix_seed(seed, label_hash("split"))
}

impl GridSpec {
    /// Empty grid over the synthetic corpus.
    pub fn new(seed: u64) -> Self {
        GridSpec {
            seed,
            dataset: DatasetSource::Codemix {
                seed,
                per_intent: DEFAULT_PER_INTENT,
            },
            test_fraction: DEFAULT_TEST_FRACTION,
            split_seed: default_split_seed(seed),
            external_words: None,
            external_sentences: None,
            encoders: Vec::new(),
            classifiers: Vec::new(),
            recurrent: Vec::new(),
            recurrent_embeddings: Vec::new(),
            expected_dataset_digest: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let classic = !self.encoders.is_empty() || !self.classifiers.is_empty();
        let recurrent = !self.recurrent.is_empty() || !self.recurrent_embeddings.is_empty();
        if classic && (self.encoders.is_empty() || self.classifiers.is_empty()) {
            return Err(Error::arg("a grid needs both [encoders] and [classifiers]"));
        }
        if recurrent && (self.recurrent.is_empty() || self.recurrent_embeddings.is_empty()) {
            return Err(Error::arg("a recurrent grid needs both [recurrent] and [recurrent-embeddings]"));
        }
        if !classic && !recurrent {
            return Err(Error::arg("spec defines no grid rows or columns"));
        }
        if !(0.0..1.0).contains(&self.test_fraction) || self.test_fraction == 0.0 {
            return Err(Error::arg(format!("test_fraction must lie in (0, 1), got {}", self.test_fraction)));
        }
        let needs_words = self.encoders.iter().any(|e| {
            matches!(e.spec, EncoderSpec::ExternalWordAvg | EncoderSpec::ExternalWordIdfAvg)
        }) || self
            .recurrent_embeddings
            .iter()
            .any(|e| e.source == EmbeddingSource::ExternalWords);
        if needs_words && self.external_words.is_none() {
            return Err(Error::arg("external word embeddings used but [external] words not set"));
        }
        let needs_sentences = self
            .encoders
            .iter()
            .any(|e| e.spec == EncoderSpec::ExternalSentence);
        if needs_sentences && self.external_sentences.is_none() {
            return Err(Error::arg("external sentence vectors used but [external] sentences not set"));
        }
        Ok(())
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::parse(line, msg)
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.parse()
        .map_err(|_| format!("invalid value {v:?} for `{key}`"))
}

fn parse_bool(key: &str, v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("invalid value {v:?} for `{key}` (expected true/false)")),
    }
}

fn parse_auto<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<Option<T>, String> {
    if v == "auto" {
        Ok(None)
    } else {
        parse_num(key, v).map(Some)
    }
}

fn fmt_auto<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or("auto".into(), |x| x.to_string())
}

pub(crate) fn classifier_keys(kind: ModelKind) -> &'static [&'static str] {
    match kind {
        ModelKind::LinearSvm => &["lambda", "lr", "lr_decay", "epochs"],
        ModelKind::KernelSvm => &["gamma", "c", "smo_tolerance", "smo_max_iter"],
        ModelKind::LogReg => &["lambda", "gd_iterations"],
        ModelKind::Knn => &["k"],
        ModelKind::RandomForest => &["trees", "max_depth", "min_samples_split", "max_features", "bootstrap"],
        ModelKind::DecisionTree => &["max_depth", "min_samples_split"],
        ModelKind::Ffnn => &[
            "hidden",
            "lambda",
            "lr",
            "lr_decay",
            "epochs",
            "batch_size",
            "momentum",
            "patience",
            "validation_fraction",
        ],
        ModelKind::Cosine => &[],
    }
}

fn set_train(cfg: &mut TrainConfig, key: &str, v: &str) -> std::result::Result<(), String> {
    match key {
        "lambda" => cfg.lambda = parse_num(key, v)?,
        "lr" => cfg.lr = parse_num(key, v)?,
        "lr_decay" => cfg.lr_decay = parse_num(key, v)?,
        "epochs" => cfg.epochs = parse_num(key, v)?,
        "gd_iterations" => cfg.gd_iterations = parse_num(key, v)?,
        "k" => cfg.k = parse_num(key, v)?,
        "trees" => cfg.trees = parse_num(key, v)?,
        "max_depth" => cfg.max_depth = parse_num(key, v)?,
        "min_samples_split" => cfg.min_samples_split = parse_num(key, v)?,
        "max_features" => cfg.max_features = parse_auto(key, v)?,
        "bootstrap" => cfg.bootstrap = parse_bool(key, v)?,
        "gamma" => cfg.gamma = parse_auto(key, v)?,
        "c" => cfg.c = parse_num(key, v)?,
        "smo_tolerance" => cfg.smo_tolerance = parse_num(key, v)?,
        "smo_max_iter" => cfg.smo_max_iter = parse_num(key, v)?,
        "hidden" => {
            let (a, b) = v
                .split_once(',')
                .ok_or_else(|| format!("`hidden` expects two sizes like 128,128, got {v:?}"))?;
            cfg.hidden = (parse_num(key, a.trim())?, parse_num(key, b.trim())?);
        }
        "batch_size" => cfg.batch_size = parse_num(key, v)?,
        "momentum" => cfg.momentum = parse_num(key, v)?,
        "patience" => cfg.patience = parse_num(key, v)?,
        "validation_fraction" => cfg.validation_fraction = parse_num(key, v)?,
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

fn get_train(cfg: &TrainConfig, key: &str) -> String {
    match key {
        "lambda" => cfg.lambda.to_string(),
        "lr" => cfg.lr.to_string(),
        "lr_decay" => cfg.lr_decay.to_string(),
        "epochs" => cfg.epochs.to_string(),
        "gd_iterations" => cfg.gd_iterations.to_string(),
        "k" => cfg.k.to_string(),
        "trees" => cfg.trees.to_string(),
        "max_depth" => cfg.max_depth.to_string(),
        "min_samples_split" => cfg.min_samples_split.to_string(),
        "max_features" => fmt_auto(&cfg.max_features),
        "bootstrap" => cfg.bootstrap.to_string(),
        "gamma" => fmt_auto(&cfg.gamma),
        "c" => cfg.c.to_string(),
        "smo_tolerance" => cfg.smo_tolerance.to_string(),
        "smo_max_iter" => cfg.smo_max_iter.to_string(),
        "hidden" => format!("{},{}", cfg.hidden.0, cfg.hidden.1),
        "batch_size" => cfg.batch_size.to_string(),
        "momentum" => cfg.momentum.to_string(),
        "patience" => cfg.patience.to_string(),
        "validation_fraction" => cfg.validation_fraction.to_string(),
        _ => unreachable!("keys come from classifier_keys"),
    }
}

const SEQ_KEYS: [&str; 10] = [
    "hidden",
    "layers",
    "lr",
    "clip_norm",
    "batch_size",
    "max_epochs",
    "patience",
    "validation_fraction",
    "max_len",
    "pooling",
];

fn set_seq(cfg: &mut SeqConfig, key: &str, v: &str) -> std::result::Result<(), String> {
    match key {
        "hidden" => cfg.hidden = parse_num(key, v)?,
        "layers" => cfg.layers = parse_num(key, v)?,
        "lr" => cfg.lr = parse_num(key, v)?,
        "clip_norm" => cfg.clip_norm = parse_num(key, v)?,
        "batch_size" => cfg.batch_size = parse_num(key, v)?,
        "max_epochs" => cfg.max_epochs = parse_num(key, v)?,
        "patience" => cfg.patience = parse_num(key, v)?,
        "validation_fraction" => cfg.validation_fraction = parse_num(key, v)?,
        "max_len" => cfg.max_len = parse_num(key, v)?,
        "pooling" => {
            cfg.pooling = match v {
                "last" => Pooling::Last,
                "mean" => Pooling::Mean,
                _ => return Err(format!("invalid value {v:?} for `pooling` (expected last/mean)")),
            }
        }
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

fn get_seq(cfg: &SeqConfig, key: &str) -> String {
    match key {
        "hidden" => cfg.hidden.to_string(),
        "layers" => cfg.layers.to_string(),
        "lr" => cfg.lr.to_string(),
        "clip_norm" => cfg.clip_norm.to_string(),
        "batch_size" => cfg.batch_size.to_string(),
        "max_epochs" => cfg.max_epochs.to_string(),
        "patience" => cfg.patience.to_string(),
        "validation_fraction" => cfg.validation_fraction.to_string(),
        "max_len" => cfg.max_len.to_string(),
        "pooling" => match cfg.pooling {
            Pooling::Last => "last".into(),
            Pooling::Mean => "mean".into(),
        },
        _ => unreachable!("keys come from SEQ_KEYS"),
    }
}


fn set_sgns(cfg: &mut SgnsConfig, key: &str, v: &str) -> std::result::Result<(), String> {
    match key {
        "dim" => cfg.dim = parse_num(key, v)?,
        "window" => cfg.window = parse_num(key, v)?,
        "negatives" => cfg.negatives = parse_num(key, v)?,
        "epochs" => cfg.epochs = parse_num(key, v)?,
        "lr" => cfg.lr = parse_num(key, v)?,
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

fn fmt_sgns(cfg: &SgnsConfig) -> String {
    format!(
        "dim={} window={} negatives={} epochs={} lr={}",
        cfg.dim, cfg.window, cfg.negatives, cfg.epochs, cfg.lr
    )
}

type KindAndPairs<'a> = (&'a str, Vec<(&'a str, &'a str)>);

/// `kind` followed by `key=value` pairs.
fn split_kind(value: &str) -> std::result::Result<KindAndPairs<'_>, String> {
    let mut parts = value.split_whitespace();
    let kind = parts.next().ok_or("missing kind")?;
    let params = parts
        .map(|p| p.split_once('=').ok_or_else(|| format!("expected key=value, got {p:?}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((kind, params))
}

/// Parses an encoder column definition such as `tfidf-lsa rank=100`.
pub fn parse_encoder(value: &str) -> std::result::Result<EncoderSpec, String> {
    let (kind, params) = split_kind(value)?;
    let no_params = |spec: EncoderSpec| {
        if let Some((k, _)) = params.first() {
            Err(format!("unknown key `{k}` for encoder {kind}"))
        } else {
            Ok(spec)
        }
    };
    let rank = || -> std::result::Result<usize, String> {
        let mut rank = DEFAULT_RANK;
        for (k, v) in &params {
            match *k {
                "rank" => rank = parse_num(k, v)?,
                _ => return Err(format!("unknown key `{k}` for encoder {kind}")),
            }
        }
        Ok(rank)
    };
    let sgns = || -> std::result::Result<SgnsConfig, String> {
        let mut cfg = SgnsConfig::default();
        for (k, v) in &params {
            set_sgns(&mut cfg, k, v).map_err(|e| format!("{e} for encoder {kind}"))?;
        }
        Ok(cfg)
    };
    match kind {
        "count" => no_params(EncoderSpec::Count),
        "tfidf" => no_params(EncoderSpec::Tfidf),
        "count-lsa" => Ok(EncoderSpec::CountLsa { rank: rank()? }),
        "tfidf-lsa" => Ok(EncoderSpec::TfidfLsa { rank: rank()? }),
        "sgns-avg" => Ok(EncoderSpec::SgnsAvg(sgns()?)),
        "sgns-idf-avg" => Ok(EncoderSpec::SgnsIdfAvg(sgns()?)),
        "external-sentence" => no_params(EncoderSpec::ExternalSentence),
        "external-word-avg" => no_params(EncoderSpec::ExternalWordAvg),
        "external-word-idf-avg" => no_params(EncoderSpec::ExternalWordIdfAvg),
        _ => Err(format!("unknown encoder kind {kind:?}")),
    }
}

pub fn format_encoder(spec: &EncoderSpec) -> String {
    match spec {
        EncoderSpec::Count => "count".into(),
        EncoderSpec::Tfidf => "tfidf".into(),
        EncoderSpec::CountLsa { rank } => format!("count-lsa rank={rank}"),
        EncoderSpec::TfidfLsa { rank } => format!("tfidf-lsa rank={rank}"),
        EncoderSpec::SgnsAvg(c) => format!("sgns-avg {}", fmt_sgns(c)),
        EncoderSpec::SgnsIdfAvg(c) => format!("sgns-idf-avg {}", fmt_sgns(c)),
        EncoderSpec::ExternalSentence => "external-sentence".into(),
        EncoderSpec::ExternalWordAvg => "external-word-avg".into(),
        EncoderSpec::ExternalWordIdfAvg => "external-word-idf-avg".into(),
    }
}

/// Parses a classifier row such as `knn k=3`.
pub fn parse_classifier(value: &str) -> std::result::Result<(ModelKind, TrainConfig), String> {
    let (kind, params) = split_kind(value)?;
    let kind: ModelKind = kind.parse().map_err(|e: Error| e.to_string())?;
    let mut cfg = TrainConfig::default();
    for (k, v) in params {
        if !classifier_keys(kind).contains(&k) {
            return Err(format!("unknown key `{k}` for classifier {kind}"));
        }
        set_train(&mut cfg, k, v)?;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok((kind, cfg))
}

pub fn format_classifier(kind: ModelKind, cfg: &TrainConfig) -> String {
    let mut s = kind.name().to_string();
    for k in classifier_keys(kind) {
        write!(s, " {k}={}", get_train(cfg, k)).unwrap();
    }
    s
}

/// Parses a recurrent row such as `gru hidden=32`.
pub fn parse_recurrent(value: &str) -> std::result::Result<(CellKind, SeqConfig), String> {
    let (kind, params) = split_kind(value)?;
    let kind: CellKind = kind.parse().map_err(|e: Error| e.to_string())?;
    let mut cfg = SeqConfig::default();
    for (k, v) in params {
        set_seq(&mut cfg, k, v).map_err(|e| format!("{e} for recurrent {kind}"))?;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok((kind, cfg))
}

pub fn format_recurrent(kind: CellKind, cfg: &SeqConfig) -> String {
    let mut s = kind.name().to_string();
    for k in SEQ_KEYS {
        write!(s, " {k}={}", get_seq(cfg, k)).unwrap();
    }
    s
}

/// Parses a recurrent input column: `sgns dim=25` or `external-words`.
pub fn parse_embedding_source(value: &str) -> std::result::Result<EmbeddingSource, String> {
    let (kind, params) = split_kind(value)?;
    match kind {
        "sgns" => {
            let mut cfg = SgnsConfig::default();
            for (k, v) in params {
                set_sgns(&mut cfg, k, v).map_err(|e| format!("{e} for embeddings sgns"))?;
            }
            Ok(EmbeddingSource::Sgns(cfg))
        }
        "external-words" => match params.first() {
            Some((k, _)) => Err(format!("unknown key `{k}` for embeddings external-words")),
            None => Ok(EmbeddingSource::ExternalWords),
        },
        _ => Err(format!("unknown embedding source {kind:?} (known: sgns, external-words)")),
    }
}

pub fn format_embedding_source(src: &EmbeddingSource) -> String {
    match src {
        EmbeddingSource::Sgns(c) => format!("sgns {}", fmt_sgns(c)),
        EmbeddingSource::ExternalWords => "external-words".into(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Grid,
    Dataset,
    External,
    Encoders,
    Classifiers,
    Recurrent,
    RecurrentEmbeddings,
    Manifest,
    Ignored,
}

/// Parses spec text. Relative paths are resolved against `base`.
pub fn parse_grid_spec_str(content: &str, base: &Path) -> Result<GridSpec> {
    let mut section = Section::None;
    let mut seed: Option<u64> = None;
    let mut source: Option<String> = None;
    let mut data_seed: Option<u64> = None;
    let mut per_intent: Option<usize> = None;
    let mut path: Option<PathBuf> = None;
    let mut test_fraction = DEFAULT_TEST_FRACTION;
    let mut split_seed: Option<u64> = None;
    let mut spec = GridSpec::new(0);
    let mut names: Vec<(Section, String)> = Vec::new();
    let resolve = |p: &str| {
        let p = PathBuf::from(p);
        if p.is_absolute() {
            p
        } else {
            base.join(p)
        }
    };

    for (i, raw) in content.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = match name.trim() {
                "grid" => Section::Grid,
                "dataset" => Section::Dataset,
                "external" => Section::External,
                "encoders" => Section::Encoders,
                "classifiers" => Section::Classifiers,
                "recurrent" => Section::Recurrent,
                "recurrent-embeddings" => Section::RecurrentEmbeddings,
                "manifest" => Section::Manifest,
                "timing" | "outputs" | "run" => Section::Ignored,
                other => return Err(perr(line_no, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| perr(line_no, format!("expected `key = value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(perr(line_no, "empty key"));
        }
        let num = |k: &str, v: &str| -> Result<u64> { parse_num(k, v).map_err(|e| perr(line_no, e)) };
        let unknown = |sec: &str| perr(line_no, format!("unknown key `{key}` in [{sec}]"));
        match section {
            Section::None => return Err(perr(line_no, format!("key `{key}` outside any section"))),
            Section::Grid => match key {
                "seed" => seed = Some(num(key, value)?),
                _ => return Err(unknown("grid")),
            },
            Section::Dataset => match key {
                "source" => source = Some(value.to_string()),
                "seed" => data_seed = Some(num(key, value)?),
                "per_intent" => per_intent = Some(num(key, value)? as usize),
                "path" => path = Some(resolve(value)),
                "test_fraction" => test_fraction = parse_num(key, value).map_err(|e| perr(line_no, e))?,
                "split_seed" => split_seed = Some(num(key, value)?),
                _ => return Err(unknown("dataset")),
            },
            Section::External => match key {
                "words" => spec.external_words = Some(resolve(value)),
                "sentences" => spec.external_sentences = Some(resolve(value)),
                _ => return Err(unknown("external")),
            },
            Section::Manifest => {
                if key == "dataset_digest" {
                    spec.expected_dataset_digest = Some(value.to_string());
                }
            }
            Section::Ignored => {}
            rows => {
                if names.iter().any(|(s, n)| *s == rows && n == key) {
                    return Err(perr(line_no, format!("duplicate name `{key}`")));
                }
                names.push((rows, key.to_string()));
                let name = key.to_string();
                let row_err = |e: String| perr(line_no, format!("`{key}`: {e}"));
                match rows {
                    Section::Encoders => spec.encoders.push(NamedEncoder {
                        name,
                        spec: parse_encoder(value).map_err(row_err)?,
                    }),
                    Section::Classifiers => {
                        let (kind, config) = parse_classifier(value).map_err(row_err)?;
                        spec.classifiers.push(NamedClassifier { name, kind, config });
                    }
                    Section::Recurrent => {
                        let (kind, config) = parse_recurrent(value).map_err(row_err)?;
                        spec.recurrent.push(NamedRecurrent { name, kind, config });
                    }
                    Section::RecurrentEmbeddings => spec.recurrent_embeddings.push(NamedEmbedding {
                        name,
                        source: parse_embedding_source(value).map_err(row_err)?,
                    }),
                    _ => unreachable!("scalar sections handled above"),
                }
            }
        }
    }

    let seed = seed.ok_or_else(|| Error::arg("seed required"))?;
    spec.seed = seed;
    spec.dataset = match source.as_deref().unwrap_or(if path.is_some() { "path" } else { "codemix" }) {
        "codemix" => DatasetSource::Codemix {
            seed: data_seed.unwrap_or(seed),
            per_intent: per_intent.unwrap_or(DEFAULT_PER_INTENT),
        },
        "path" => DatasetSource::Path(path.ok_or_else(|| Error::arg("dataset source `path` needs `path = ...`"))?),
        other => return Err(Error::arg(format!("unknown dataset source {other:?} (known: codemix, path)"))),
    };
    spec.test_fraction = test_fraction;
    spec.split_seed = split_seed.unwrap_or_else(|| default_split_seed(seed));
    spec.validate()?;
    Ok(spec)
}

pub fn parse_grid_spec(path: impl AsRef<Path>) -> Result<GridSpec> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    let base = std::path::absolute(parent.unwrap_or(Path::new(".")))
        .map_err(|e| Error::io(path, e))?;
    parse_grid_spec_str(&content, &base)
}

/// Canonical spec text with every parameter explicit; parses back to `spec`.
pub fn format_grid_spec(spec: &GridSpec) -> String {
    let mut s = String::new();
    writeln!(s, "[grid]\nseed = {}\n", spec.seed).unwrap();
    writeln!(s, "[dataset]").unwrap();
    match &spec.dataset {
        DatasetSource::Codemix { seed, per_intent } => {
            writeln!(s, "source = codemix\nseed = {seed}\nper_intent = {per_intent}").unwrap()
        }
        DatasetSource::Path(p) => writeln!(s, "source = path\npath = {}", p.display()).unwrap(),
    }
    writeln!(s, "test_fraction = {}\nsplit_seed = {}", spec.test_fraction, spec.split_seed).unwrap();
    if spec.external_words.is_some() || spec.external_sentences.is_some() {
        writeln!(s, "\n[external]").unwrap();
        if let Some(p) = &spec.external_words {
            writeln!(s, "words = {}", p.display()).unwrap();
        }
        if let Some(p) = &spec.external_sentences {
            writeln!(s, "sentences = {}", p.display()).unwrap();
        }
    }
    let mut block = |title: &str, rows: Vec<(String, String)>| {
        if !rows.is_empty() {
            writeln!(s, "\n[{title}]").unwrap();
            for (n, v) in rows {
                writeln!(s, "{n} = {v}").unwrap();
            }
        }
    };
    block(
        "encoders",
        spec.encoders.iter().map(|e| (e.name.clone(), format_encoder(&e.spec))).collect(),
    );
    block(
        "classifiers",
        spec.classifiers
            .iter()
            .map(|c| (c.name.clone(), format_classifier(c.kind, &c.config)))
            .collect(),
    );
    block(
        "recurrent",
        spec.recurrent
            .iter()
            .map(|r| (r.name.clone(), format_recurrent(r.kind, &r.config)))
            .collect(),
    );
    block(
        "recurrent-embeddings",
        spec.recurrent_embeddings
            .iter()
            .map(|e| (e.name.clone(), format_embedding_source(&e.source)))
            .collect(),
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<GridSpec> {
        parse_grid_spec_str(text, Path::new("/specs"))
    }

    #[test]
    fn minimal_spec() {
        let g = parse("[grid]\nseed = 3\n[encoders]\nTfidf = tfidf\n[classifiers]\nLR = logreg\n").unwrap();
        assert_eq!((g.encoders.len(), g.classifiers.len()), (1, 1));
        assert_eq!(g.seed, 3);
        assert_eq!(g.dataset, DatasetSource::Codemix { seed: 3, per_intent: 200 });
    }

    #[test]
    fn missing_seed() {
        let err = parse("[encoders]\nTfidf = tfidf\n[classifiers]\nLR = logreg\n").unwrap_err();
        assert!(err.to_string().ends_with("seed required"), "{err}");
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse("[grid]\nseed = 1\nbogus = 2\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = parse("[grid]\nseed=1\n[encoders]\nX = tfidf-lsa rnak=5\n[classifiers]\nL = logreg\n").unwrap_err();
        assert!(err.to_string().contains("rnak"), "{err}");
        let err = parse("[grid]\nseed=1\n[encoders]\nX = tfidf\n[classifiers]\nL = knn trees=5\n").unwrap_err();
        assert!(err.to_string().contains("trees"), "{err}");
    }

    #[test]
    fn comments_duplicates_and_paths() {
        let text = "# grid\n[grid]\nseed = 1\n[dataset]\npath = data/x.tsv\n[encoders]\nA = count\nA = tfidf\n";
        let err = parse(text).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        let g = parse("[grid]\nseed=1\n[dataset]\npath = d.tsv\n[encoders]\nA = count\n[classifiers]\nB = cosine\n").unwrap();
        assert_eq!(g.dataset, DatasetSource::Path(PathBuf::from("/specs/d.tsv")));
    }

    #[test]
    fn half_grids_are_rejected() {
        assert!(parse("[grid]\nseed = 1\n[encoders]\nA = count\n").is_err());
        assert!(parse("[grid]\nseed = 1\n[recurrent]\nG = gru\n").is_err());
        assert!(parse("[grid]\nseed = 1\n[encoders]\nU = external-sentence\n[classifiers]\nB = cosine\n").is_err());
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = "[grid]\nseed = 9\n[dataset]\nper_intent = 20\ntest_fraction = 0.25\n\
                    [external]\nwords = w.vec\nsentences = s.vec\n\
                    [encoders]\nCount = count\nTfidf-Lsa = tfidf-lsa rank=7\nSG = sgns-idf-avg dim=8 epochs=2\n\
                    E = external-word-avg\nU = external-sentence\n\
                    [classifiers]\nLinear SVM = linear-svm lambda=0.001\nSVM = svm gamma=0.5\n\
                    RF = random-forest trees=10 max_features=auto bootstrap=false\nNN = ffnn hidden=8,4\n\
                    [recurrent]\nGRU = gru hidden=16 pooling=mean\n\
                    [recurrent-embeddings]\nSG25 = sgns dim=25\nELMO = external-words\n\
                    [manifest]\ndataset_digest = abc\n[timing]\nx = 1\n";
        let g = parse(text).unwrap();
        assert_eq!(g.expected_dataset_digest.as_deref(), Some("abc"));
        let canon = format_grid_spec(&g);
        let mut again = parse(&canon).unwrap();
        again.expected_dataset_digest = Some("abc".into());
        assert_eq!(again, g);
        assert_eq!(format_grid_spec(&again), canon);
    }
}

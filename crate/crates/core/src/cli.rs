//! Command-line front end.
//!
//! Every command that writes files also writes `<out>.manifest` (grid runs:
//! `manifest.txt` in the output directory) recording the command, every
//! option value and a digest of each output. `replay` reruns a manifest and
//! checks the outputs byte for byte.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::classifiers::{ModelKind, TrainConfig};
use crate::data::{generate_codemix, generate_order_task, load_dataset, LabeledDataset};
use crate::encoders::{
    load_sentence_vectors, load_word_embeddings, sgns_train, stand_in_tables, write_sentence_vectors,
    write_word_embeddings, EncoderResources, EncoderSpec, SgnsConfig,
};
use crate::error::{Error, Result};
use crate::harness::{
    evaluate, fit_pipeline, parse_classifier, parse_embedding_source, parse_encoder, parse_grid_spec,
    parse_recurrent, run_grid, sha256_hex, EmbeddingSource, Pipeline, TOOL_VERSION,
};
use crate::numerics::rng::{label_hash, mix_seed};
use crate::recurrent::{train_sequence_model, CellKind, SeqConfig};

#[derive(Debug, Parser)]
#[command(name = "intentgrid", version, about = "Intent detection models and benchmark grids for code-mixed text")]
pub struct Cli {
    /// More log output (-v debug, -vv trace)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    /// Only log errors
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic labeled corpus as TSV
    GenData(GenDataArgs),
    /// Train skip-gram embeddings on a corpus and write a word-vector file
    Embed(EmbedArgs),
    /// Fit one encoder and classifier (or a recurrent model) and save it
    Train(TrainArgs),
    /// Classify lines of text with a saved model
    Predict(PredictArgs),
    /// Score a saved model on a labeled corpus
    Eval(EvalArgs),
    /// Run a classifier x representation grid from a spec file
    Grid(GridArgs),
    /// Rerun a manifest and check that every output is byte-identical
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Task {
    /// Code-mixed utterances over seven intents
    Codemix,
    /// Two-class task decided only by token order
    Order,
}

#[derive(Debug, Args)]
struct GenDataArgs {
    /// Generator seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Utterances per class
    #[arg(long, default_value_t = 200)]
    per_intent: usize,
    /// Which corpus to generate
    #[arg(long, value_enum, default_value_t = Task::Codemix)]
    task: Task,
    /// Output TSV path (required)
    #[arg(long)]
    out: PathBuf,
    /// Also write stand-in external vectors (words.vec, sentences.vec) into this directory (default: none)
    #[arg(long)]
    stand_in_embeddings: Option<PathBuf>,
    /// Dimension of stand-in word vectors
    #[arg(long, default_value_t = 512)]
    word_dim: usize,
    /// Dimension of stand-in sentence vectors
    #[arg(long, default_value_t = 512)]
    sentence_dim: usize,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    /// Training corpus TSV (required)
    #[arg(long)]
    data: PathBuf,
    /// Output word-vector file (required)
    #[arg(long)]
    out: PathBuf,
    /// Vector dimension
    #[arg(long, default_value_t = 100)]
    dim: usize,
    /// Maximum context window
    #[arg(long, default_value_t = 5)]
    window: usize,
    /// Noise samples per pair
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    /// Passes over the corpus
    #[arg(long, default_value_t = 15)]
    epochs: usize,
    /// Initial learning rate
    #[arg(long, default_value_t = 0.025)]
    lr: f64,
    /// Training seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Training corpus TSV (required)
    #[arg(long)]
    data: PathBuf,
    /// Output model artifact (required)
    #[arg(long)]
    out: PathBuf,
    /// Classifier (linear-svm, svm, logreg, knn, random-forest, decision-tree, ffnn, cosine) or recurrent cell (rnn, gru, lstm)
    #[arg(long, default_value = "logreg")]
    model: String,
    /// Encoder for classifiers, e.g. "tfidf-lsa rank=100"
    #[arg(long, default_value = "tfidf")]
    encoder: String,
    /// Input embeddings for recurrent models: "sgns dim=.." or "external-words"
    #[arg(long, default_value = "sgns dim=100")]
    embeddings: String,
    /// Model hyperparameter as key=value, repeatable (default: none)
    #[arg(long = "param")]
    params: Vec<String>,
    /// External word-vector file (default: none)
    #[arg(long)]
    words: Option<PathBuf>,
    /// External sentence-vector file (default: none)
    #[arg(long)]
    sentences: Option<PathBuf>,
    /// Training seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Saved model artifact (required)
    #[arg(long)]
    model: PathBuf,
    /// Text file with one utterance per line (default: none, reads stdin)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file for `label<TAB>text` lines (default: none, writes stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Saved model artifact (required)
    #[arg(long)]
    model: PathBuf,
    /// Labeled corpus TSV (required)
    #[arg(long)]
    data: PathBuf,
    /// Write the report here (default: none, writes stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Grid spec file, or a manifest from an earlier run (required)
    #[arg(long)]
    spec: PathBuf,
    /// Output directory (required)
    #[arg(long)]
    out: PathBuf,
    /// Parallel cell workers (default: number of processors)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    /// Manifest written by an earlier run
    manifest: PathBuf,
    /// Write outputs into this directory instead of their recorded paths (default: none)
    #[arg(long)]
    into: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Errors are printed as one line on stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Info,
        (false, 1) => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .format_target(false)
        .try_init();
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenData(a) => gen_data(a),
        Command::Embed(a) => embed(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Eval(a) => eval(a),
        Command::Grid(a) => grid(a),
        Command::Replay(a) => replay(a),
    }
}

fn absolute(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).map_err(|e| Error::io(p, e))
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn file_digest(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

/// Writes `<out>.manifest` for a finished command.
fn write_manifest(command: &str, options: &[(&str, String)], out: &Path, outputs: &[PathBuf]) -> Result<()> {
    let mut s = format!("[run]\ncommand = {command}\ntool_version = {TOOL_VERSION}\n\n[options]\n");
    for (k, v) in options {
        writeln!(s, "{k} = {v}").unwrap();
    }
    s.push_str("\n[outputs]\n");
    for p in outputs {
        writeln!(s, "{} = {}", p.display(), file_digest(p)?).unwrap();
    }
    write_file(&manifest_path(out), &s)
}

fn path_opt(key: &'static str, p: &Option<PathBuf>) -> Result<Option<(&'static str, String)>> {
    p.as_deref()
        .map(|p| Ok((key, absolute(p)?.display().to_string())))
        .transpose()
}

fn gen_data(a: GenDataArgs) -> Result<()> {
    let out = absolute(&a.out)?;
    let ds = match a.task {
        Task::Codemix => generate_codemix(a.seed, a.per_intent),
        Task::Order => generate_order_task(a.seed, a.per_intent),
    };
    write_file(&out, &ds.to_tsv())?;
    info!("wrote {} records to {}", ds.len(), out.display());
    let mut outputs = vec![out.clone()];
    let mut options = vec![
        ("seed", a.seed.to_string()),
        ("per-intent", a.per_intent.to_string()),
        ("task", a.task.to_possible_value().expect("no skipped variants").get_name().to_string()),
        ("out", out.display().to_string()),
        ("word-dim", a.word_dim.to_string()),
        ("sentence-dim", a.sentence_dim.to_string()),
    ];
    if let Some(dir) = &a.stand_in_embeddings {
        let dir = absolute(dir)?;
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let (words, sentences) = stand_in_tables(&ds, a.word_dim, a.sentence_dim, mix_seed(a.seed, label_hash("stand-in")))?;
        let (wp, sp) = (dir.join("words.vec"), dir.join("sentences.vec"));
        write_word_embeddings(&words, &wp)?;
        write_sentence_vectors(&sentences, &sp)?;
        info!("wrote stand-in vectors to {}", dir.display());
        outputs.extend([wp, sp]);
        options.push(("stand-in-embeddings", dir.display().to_string()));
    }
    write_manifest("gen-data", &options, &out, &outputs)
}

fn embed(a: EmbedArgs) -> Result<()> {
    let (data, out) = (absolute(&a.data)?, absolute(&a.out)?);
    let ds = load_dataset(&data)?;
    let cfg = SgnsConfig {
        dim: a.dim,
        window: a.window,
        negatives: a.negatives,
        epochs: a.epochs,
        lr: a.lr,
    };
    let table = sgns_train(&ds, &cfg, a.seed)?;
    write_word_embeddings(&table, &out)?;
    info!("wrote {} vectors of dimension {} to {}", table.len(), table.dim(), out.display());
    let options = [
        ("data", data.display().to_string()),
        ("out", out.display().to_string()),
        ("dim", a.dim.to_string()),
        ("window", a.window.to_string()),
        ("negatives", a.negatives.to_string()),
        ("epochs", a.epochs.to_string()),
        ("lr", a.lr.to_string()),
        ("seed", a.seed.to_string()),
    ];
    write_manifest("embed", &options, &out, std::slice::from_ref(&out))
}

enum TrainPlan {
    Vector(EncoderSpec, ModelKind, TrainConfig),
    Sequence(EmbeddingSource, CellKind, SeqConfig),
}

fn train(a: TrainArgs) -> Result<()> {
    let (data, out) = (absolute(&a.data)?, absolute(&a.out)?);
    let params = a.params.join(" ");
    let plan = if let Ok(kind) = a.model.parse::<ModelKind>() {
        let (kind, cfg) = parse_classifier(&format!("{kind} {params}")).map_err(Error::Argument)?;
        TrainPlan::Vector(parse_encoder(&a.encoder).map_err(Error::Argument)?, kind, cfg)
    } else if let Ok(kind) = a.model.parse::<CellKind>() {
        let (kind, cfg) = parse_recurrent(&format!("{kind} {params}")).map_err(Error::Argument)?;
        let source = parse_embedding_source(&a.embeddings).map_err(Error::Argument)?;
        if source == EmbeddingSource::ExternalWords && a.words.is_none() {
            return Err(Error::arg("--embeddings external-words needs --words"));
        }
        TrainPlan::Sequence(source, kind, cfg)
    } else {
        return Err(Error::arg(format!(
            "unknown model {:?} (classifiers: {}; recurrent: rnn, gru, lstm)",
            a.model,
            ModelKind::ALL.map(ModelKind::name).join(", ")
        )));
    };

    let ds = load_dataset(&data)?;
    let mut resources = EncoderResources::new(mix_seed(a.seed, label_hash("encoders")));
    if let Some(p) = &a.words {
        resources.external_words = Some(Arc::new(load_word_embeddings(p)?));
    }
    if let Some(p) = &a.sentences {
        resources.external_sentences = Some(Arc::new(load_sentence_vectors(p)?));
    }
    let pipeline = match plan {
        TrainPlan::Vector(encoder, kind, cfg) => fit_pipeline(&ds, &encoder, kind, &cfg, &mut resources, a.seed)?,
        TrainPlan::Sequence(source, kind, cfg) => {
            let table = match source {
                EmbeddingSource::Sgns(c) => resources.sgns_table(&ds, &c)?,
                EmbeddingSource::ExternalWords => resources.external_words.clone().expect("checked above"),
            };
            let (model, history) = train_sequence_model(kind, &ds, &table, &cfg, a.seed)?;
            info!("trained {} epochs, best validation macro-F1 {:.4}", history.epochs(), history.val_f1[history.best_epoch]);
            Pipeline::sequence(model)
        }
    };
    pipeline.save(&out)?;
    info!("saved model to {}", out.display());
    let mut options = vec![
        ("data", data.display().to_string()),
        ("out", out.display().to_string()),
        ("model", a.model.clone()),
        ("encoder", a.encoder.clone()),
        ("embeddings", a.embeddings.clone()),
    ];
    options.extend(a.params.iter().map(|p| ("param", p.clone())));
    options.extend(path_opt("words", &a.words)?);
    options.extend(path_opt("sentences", &a.sentences)?);
    options.push(("seed", a.seed.to_string()));
    write_manifest("train", &options, &out, std::slice::from_ref(&out))
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = absolute(&a.model)?;
    let pipeline = Pipeline::load(&model)?;
    let input: Box<dyn BufRead> = match &a.input {
        Some(p) => Box::new(BufReader::new(fs::File::open(p).map_err(|e| Error::io(p, e))?)),
        None => Box::new(io::stdin().lock()),
    };
    let out_path = a.out.as_deref().map(absolute).transpose()?;
    let mut sink: Box<dyn Write> = match &out_path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).map_err(|e| Error::io(p, e))?)),
        None => Box::new(io::stdout().lock()),
    };
    let err_path = out_path.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    let in_path = a.input.clone().unwrap_or_else(|| PathBuf::from("<stdin>"));
    for line in input.lines() {
        let line = line.map_err(|e| Error::io(&in_path, e))?;
        let text = line.trim_end_matches('\r');
        writeln!(sink, "{}\t{text}", pipeline.predict_text(text)).map_err(|e| Error::io(&err_path, e))?;
        if out_path.is_none() {
            sink.flush().map_err(|e| Error::io(&err_path, e))?;
        }
    }
    sink.flush().map_err(|e| Error::io(&err_path, e))?;
    drop(sink);
    if let Some(out) = out_path {
        let mut options = vec![("model", model.display().to_string())];
        options.extend(path_opt("input", &a.input)?);
        options.push(("out", out.display().to_string()));
        write_manifest("predict", &options, &out, std::slice::from_ref(&out))?;
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let (model, data) = (absolute(&a.model)?, absolute(&a.data)?);
    let pipeline = Pipeline::load(&model)?;
    let ds: LabeledDataset = load_dataset(&data)?;
    let mut labels: Vec<String> = pipeline.labels().to_vec();
    labels.extend(ds.labels().iter().cloned());
    labels.sort();
    labels.dedup();
    let report = evaluate(&pipeline.predict_all(&ds), &ds.label_strings(), &labels)?;
    let text = report.to_text();
    match &a.out {
        Some(out) => {
            let out = absolute(out)?;
            write_file(&out, &text)?;
            let options = [
                ("model", model.display().to_string()),
                ("data", data.display().to_string()),
                ("out", out.display().to_string()),
            ];
            write_manifest("eval", &options, &out, std::slice::from_ref(&out))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn grid(a: GridArgs) -> Result<()> {
    let spec = parse_grid_spec(&a.spec)?;
    let report = run_grid(&spec, a.jobs.unwrap_or(0))?;
    report.write(&a.out)?;
    if let Some(t) = &report.classic {
        eprint!("{}", t.to_text("macro-F1 x100"));
    }
    if let Some(t) = &report.recurrent {
        eprint!("{}", t.to_text("macro-F1 x100, recurrent"));
    }
    info!("results in {}", a.out.display());
    Ok(())
}

struct Manifest {
    command: Option<String>,
    options: Vec<(String, String)>,
    outputs: Vec<(String, String)>,
    is_grid: bool,
}

fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut m = Manifest {
        command: None,
        options: Vec::new(),
        outputs: Vec::new(),
        is_grid: false,
    };
    let mut section = String::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(s) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = s.to_string();
            m.is_grid |= section == "grid";
            continue;
        }
        let (k, v) = line
            .split_once(" = ")
            .or_else(|| line.split_once('='))
            .ok_or_else(|| Error::parse(i + 1, format!("expected `key = value`, got {line:?}")))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        match section.as_str() {
            "run" if k == "command" => m.command = Some(v),
            "options" => m.options.push((k, v)),
            "outputs" => m.outputs.push((k, v)),
            _ => {}
        }
    }
    if m.outputs.is_empty() {
        return Err(Error::Data(format!("{} records no outputs", path.display())));
    }
    Ok(m)
}

fn check_outputs(expected: &[(PathBuf, String)]) -> Result<()> {
    for (path, digest) in expected {
        let actual = file_digest(path)?;
        if &actual != digest {
            return Err(Error::Data(format!("{} differs from the recorded run", path.display())));
        }
        println!("reproduced\t{}", path.display());
    }
    Ok(())
}

fn replay(a: ReplayArgs) -> Result<()> {
    let m = read_manifest(&a.manifest)?;
    if m.is_grid {
        let dir = match &a.into {
            Some(d) => d.clone(),
            None => absolute(&a.manifest)?
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_default(),
        };
        let spec = parse_grid_spec(&a.manifest)?;
        // Writing the new manifest over the one being replayed is fine: it
        // has been fully read.
        run_grid(&spec, 0)?.write(&dir)?;
        let expected: Vec<_> = m.outputs.into_iter().map(|(n, d)| (dir.join(n), d)).collect();
        return check_outputs(&expected);
    }
    let command = m
        .command
        .ok_or_else(|| Error::Data(format!("{} names no command", a.manifest.display())))?;
    let mut remap: Vec<(PathBuf, PathBuf)> = Vec::new();
    let mut argv: Vec<String> = vec!["intentgrid".into(), command.clone()];
    for (k, v) in &m.options {
        let mut v = v.clone();
        if let (Some(into), "out" | "stand-in-embeddings") = (&a.into, k.as_str()) {
            let old = PathBuf::from(&v);
            let new = into.join(old.file_name().ok_or_else(|| Error::Data(format!("bad path {v:?}")))?);
            v = absolute(&new)?.display().to_string();
            remap.push((old, PathBuf::from(&v)));
        }
        argv.push(format!("--{k}"));
        argv.push(v);
    }
    if let Some(into) = &a.into {
        fs::create_dir_all(into).map_err(|e| Error::io(into, e))?;
    }
    let cli = Cli::try_parse_from(&argv).map_err(|e| Error::Data(format!("manifest options rejected: {}", e.kind())))?;
    run(cli.command)?;
    let expected: Vec<_> = m
        .outputs
        .into_iter()
        .map(|(p, d)| {
            let p = PathBuf::from(p);
            let mapped = remap
                .iter()
                .find_map(|(old, new)| p.strip_prefix(old).ok().map(|rest| if rest.as_os_str().is_empty() { new.clone() } else { new.join(rest) }))
                .unwrap_or(p);
            (mapped, d)
        })
        .collect();
    check_outputs(&expected)
}

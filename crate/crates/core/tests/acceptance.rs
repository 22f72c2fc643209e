//! Acceptance gate. Runs each criterion, prints one PASS/FAIL line with its
//! runtime and exits nonzero if any failed.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use intentgrid::classifiers::{
    ffnn_objective, gini, softmax_objective, train_decision_tree, train_model, Classifier, FfnnShape, ModelKind,
    Node, TrainConfig,
};
use intentgrid::cli::run_cli;
use intentgrid::data::{
    build_vocabulary, generate_order_task, stratified_indices, stratified_split, LabeledDataset, Utterance,
};
use intentgrid::encoders::{fit_encoder, tfidf_encode, tfidf_fit, EmbeddingTable, Encoder, EncoderResources, EncoderSpec};
use intentgrid::harness::evaluate;
use intentgrid::numerics::{truncated_svd, DenseVector, Features, Matrix, RngStream};
use intentgrid::recurrent::{
    gru_cell, lstm_cell, rnn_cell, sequence_objective, train_sequence_model, CellKind, CellParams, Pooling,
    SeqConfig, SeqShape,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- gradients

fn central_diff(f: &dyn Fn(&[f64]) -> f64, theta: &[f64], h: f64) -> Vec<f64> {
    let mut p = theta.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + h;
            let up = f(&p);
            p[i] = orig - h;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

fn normal_vec(rng: &mut RngStream, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.normal()).collect()
}

fn dense_points(rng: &mut RngStream, n: usize, d: usize) -> Vec<Features> {
    (0..n)
        .map(|_| Features::Dense(DenseVector::from(normal_vec(rng, d, 1.0))))
        .collect()
}

fn gradient_suite() -> Check {
    const POINTS: u64 = 10;
    const TOL: f64 = 1e-4;
    let mut worst: Vec<(String, f64)> = Vec::new();
    let mut record = |name: &str, err: f64| -> Result<(), String> {
        match worst.iter_mut().find(|(n, _)| n == name) {
            Some((_, w)) => *w = w.max(err),
            None => worst.push((name.to_string(), err)),
        }
        ensure(err <= TOL, || format!("{name}: relative error {err:.2e}"))
    };

    for seed in 0..POINTS {
        let mut rng = RngStream::new(100 + seed);
        let (n, d, c) = (7, 4, 3);
        let x = dense_points(&mut rng, n, d);
        let t: Vec<usize> = (0..n).map(|i| i % c).collect();
        let params = normal_vec(&mut rng, c * (d + 1), 0.5);
        let f = |p: &[f64]| softmax_objective(p, &x, &t, c, 0.01).0;
        let (_, g) = softmax_objective(&params, &x, &t, c, 0.01);
        record("logreg", max_rel_err(&g, &central_diff(&f, &params, 1e-5)))?;

        let shape = FfnnShape([d, 5, 4, c]);
        let params = normal_vec(&mut rng, shape.n_params(), 0.5);
        let f = |p: &[f64]| ffnn_objective(p, &shape, &x, &t, 0.01).0;
        let (_, g) = ffnn_objective(&params, &shape, &x, &t, 0.01);
        record("ffnn", max_rel_err(&g, &central_diff(&f, &params, 1e-5)))?;

        for kind in CellKind::ALL {
            let shape = SeqShape {
                kind,
                input_dim: 3,
                hidden: 4,
                layers: 2,
                n_classes: 3,
            };
            let seqs: Vec<Vec<Vec<f64>>> = (0..4)
                .map(|_| (0..1 + rng.below(8)).map(|_| normal_vec(&mut rng, 3, 1.0)).collect())
                .collect();
            let t: Vec<usize> = (0..seqs.len()).map(|i| i % 3).collect();
            let pooling = if seed % 2 == 0 { Pooling::Last } else { Pooling::Mean };
            let params = normal_vec(&mut rng, shape.n_params(), 0.5);
            let f = |p: &[f64]| sequence_objective(p, &shape, pooling, &seqs, &t).0;
            let (_, g) = sequence_objective(&params, &shape, pooling, &seqs, &t);
            record(kind.name(), max_rel_err(&g, &central_diff(&f, &params, 1e-5)))?;
        }
    }
    let summary: Vec<String> = worst.iter().map(|(n, e)| format!("{n} {e:.1e}")).collect();
    Ok(format!("max relative error over {POINTS} points each: {}", summary.join(", ")))
}

// ------------------------------------------------------------- numeric oracles

fn svd_oracle() -> Result<(), String> {
    for seed in 0..20u64 {
        let mut rng = RngStream::new(seed);
        let (m, n) = (1 + rng.below(8), 1 + rng.below(6));
        let data = normal_vec(&mut rng, m * n, 1.0);
        let ours = truncated_svd(&Matrix::from_vec(m, n, data.clone()).unwrap(), m.min(n)).map_err(|e| e.to_string())?;
        let a = DMatrix::from_row_slice(m, n, &data);
        let mut eig: Vec<f64> = (a.transpose() * &a)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .collect();
        eig.sort_by(|x, y| y.total_cmp(x));
        for (i, s) in ours.s.iter().enumerate() {
            ensure((s - eig[i]).abs() <= 1e-8, || {
                format!("svd {m}x{n} seed {seed}: sigma_{i} {s} vs oracle {}", eig[i])
            })?;
        }
        for r in 0..m {
            for c in 0..n {
                let rec: f64 = (0..ours.s.len()).map(|k| ours.u.get(r, k) * ours.s[k] * ours.v.get(c, k)).sum();
                ensure((rec - a[(r, c)]).abs() <= 1e-8, || format!("svd {m}x{n} seed {seed}: reconstruction off"))?;
            }
        }
    }
    Ok(())
}

fn macro_f1_oracle(preds: &[usize], golds: &[usize], c: usize) -> f64 {
    let mut conf = vec![vec![0usize; c]; c];
    for (&p, &g) in preds.iter().zip(golds) {
        conf[g][p] += 1;
    }
    let mut total = 0.0;
    for (k, row) in conf.iter().enumerate() {
        let tp = row[k] as f64;
        let predicted: usize = conf.iter().map(|r| r[k]).sum();
        let actual: usize = row.iter().sum();
        let p = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
        let r = if actual == 0 { 0.0 } else { tp / actual as f64 };
        total += if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    }
    total / c as f64
}

fn f1_oracle_check() -> Result<(), String> {
    let mut rng = RngStream::new(7);
    for trial in 0..1000 {
        let c = 2 + rng.below(5);
        let n = 1 + rng.below(40);
        let golds: Vec<usize> = (0..n).map(|_| rng.below(c)).collect();
        let preds: Vec<usize> = (0..n).map(|_| rng.below(c)).collect();
        let names: Vec<String> = (0..c).map(|k| format!("L{k}")).collect();
        let s = |v: &[usize]| v.iter().map(|&k| names[k].clone()).collect::<Vec<_>>();
        let got = evaluate(&s(&preds), &s(&golds), &names).map_err(|e| e.to_string())?.macro_f1;
        let want = macro_f1_oracle(&preds, &golds, c);
        ensure(got.to_bits() == want.to_bits(), || format!("macro-F1 trial {trial}: {got} vs {want}"))?;
    }
    Ok(())
}

fn lattice_points(rng: &mut RngStream, n: usize, d: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    while out.len() < n {
        let p: Vec<f64> = (0..d).map(|_| rng.below(5) as f64 - 2.0).collect();
        if p.iter().any(|v| *v != 0.0) {
            out.push(p);
        }
    }
    out
}

fn neighbor_oracles() -> Result<(), String> {
    let mut rng = RngStream::new(11);
    let train = lattice_points(&mut rng, 60, 3);
    let labels: Vec<String> = (0..train.len()).map(|_| format!("c{}", rng.below(4))).collect();
    let queries = lattice_points(&mut rng, 100, 3);
    let feats = |v: &[Vec<f64>]| -> Vec<Features> { v.iter().map(|p| Features::Dense(DenseVector::from(p.clone()))).collect() };
    let (x, q) = (feats(&train), feats(&queries));
    let k = 5;
    let cfg = TrainConfig { k, ..Default::default() };
    let knn = train_model(ModelKind::Knn, &x, &labels, &cfg, 0).map_err(|e| e.to_string())?;
    let cos = train_model(ModelKind::Cosine, &x, &labels, &cfg, 0).map_err(|e| e.to_string())?;

    for (qi, query) in queries.iter().enumerate() {
        // exhaustive K-NN: majority vote, vote ties to the label of the
        // nearest tied neighbor, distance ties to the lower index
        let mut order: Vec<(f64, usize)> = train
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let top = &order[..k];
        let votes = |l: &str| top.iter().filter(|(_, i)| labels[*i] == l).count();
        let max_votes = top.iter().map(|(_, i)| votes(&labels[*i])).max().unwrap();
        let want = top
            .iter()
            .map(|(_, i)| &labels[*i])
            .find(|l| votes(l) == max_votes)
            .unwrap();
        let got = knn.predict(&q[qi]).map_err(|e| e.to_string())?;
        ensure(&got == want, || format!("knn query {qi}: {got} vs {want}"))?;

        // exhaustive cosine 1-NN, ties to the lower index
        let cosine = |p: &[f64]| {
            let dot: f64 = p.iter().zip(query).map(|(a, b)| a * b).sum();
            let na = p.iter().map(|a| a * a).sum::<f64>().sqrt();
            let nb = query.iter().map(|a| a * a).sum::<f64>().sqrt();
            (dot / (na * nb)).clamp(-1.0, 1.0)
        };
        let mut best = 0;
        for i in 1..train.len() {
            if cosine(&train[i]) > cosine(&train[best]) {
                best = i;
            }
        }
        let got = cos.predict(&q[qi]).map_err(|e| e.to_string())?;
        ensure(got == labels[best], || format!("cosine query {qi}: {got} vs {}", labels[best]))?;
    }
    Ok(())
}

fn numeric_oracles() -> Check {
    svd_oracle()?;
    f1_oracle_check()?;
    neighbor_oracles()?;
    Ok("svd on 20 matrices, macro-F1 on 1000 sets, knn and cosine on 100 queries".into())
}

// ---------------------------------------------------------------- hand values

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn hand_values() -> Check {
    // tf-idf on ["a b", "b"], encoding "a b"
    let ds = LabeledDataset::from_pairs([("x", "a b"), ("x", "b")]);
    let vocab = build_vocabulary(&ds, 1);
    let v = tfidf_encode(&vocab, &tfidf_fit(&ds), &Utterance::new("a b"));
    let (ia, ib) = ((3.0f64 / 2.0).ln() + 1.0, 1.0);
    let n = (ia * ia + ib * ib).sqrt();
    let (a, b) = (v.get(vocab.index_of("a").unwrap()), v.get(vocab.index_of("b").unwrap()));
    ensure((a - ia / n).abs() < 1e-12 && (b - ib / n).abs() < 1e-12, || format!("tfidf ({a}, {b})"))?;

    // Gini
    ensure(gini(&[4, 0]) == 0.0, || "gini of a pure node".into())?;
    ensure((gini(&[5, 5]) - 0.5).abs() < 1e-12, || "gini of a 50/50 node".into())?;
    let x: Vec<Features> = [0.0, 1.0].iter().map(|&v| Features::Dense(DenseVector::from(vec![v]))).collect();
    let tree = train_decision_tree(&x, &["A".into(), "B".into()], &TrainConfig::default()).map_err(|e| e.to_string())?;
    let splits: Vec<f64> = tree
        .tree()
        .nodes()
        .iter()
        .filter_map(|n| match n {
            Node::Split { threshold, .. } => Some(*threshold),
            Node::Leaf { .. } => None,
        })
        .collect();
    ensure(splits == [0.5], || format!("two-point tree splits {splits:?}"))?;
    // A A A B: one split at 2.5, the pure A side stays a leaf
    let x: Vec<Features> = (0..4).map(|v| Features::Dense(DenseVector::from(vec![v as f64]))).collect();
    let y: Vec<String> = ["A", "A", "A", "B"].iter().map(|s| s.to_string()).collect();
    let tree = train_decision_tree(&x, &y, &TrainConfig::default()).map_err(|e| e.to_string())?;
    let nodes = tree.tree().nodes();
    ensure(nodes.len() == 3, || format!("pure side split further: {nodes:?}"))?;
    ensure(
        matches!(nodes[0], Node::Split { threshold, .. } if threshold == 2.5),
        || format!("root {:?}", nodes[0]),
    )?;
    ensure(
        train_decision_tree(&x, &vec!["A".to_string(); 4], &TrainConfig::default()).is_err(),
        || "single-class training accepted".into(),
    )?;

    // scalar cells, all weights 1 and biases 0
    let one = DenseVector::from(vec![1.0]);
    let zero = DenseVector::from(vec![0.0]);
    let rnn = rnn_cell(&one, &zero, &CellParams::constant(CellKind::Rnn, 1, 1, 1.0)).unwrap().as_slice()[0];
    ensure((rnn - 1f64.tanh()).abs() < 1e-6, || format!("rnn h' {rnn}"))?;
    let gru = gru_cell(&one, &one, &CellParams::constant(CellKind::Gru, 1, 1, 1.0)).unwrap().as_slice()[0];
    let (z, r) = (sigmoid(2.0), sigmoid(2.0));
    let gru_want = (1.0 - z) + z * (1.0 + r).tanh();
    ensure((gru - gru_want).abs() < 1e-9, || format!("gru h' {gru} vs {gru_want}"))?;
    let (h, c) = lstm_cell(&one, (&zero, &zero), &CellParams::constant(CellKind::Lstm, 1, 1, 1.0)).unwrap();
    let c_want = sigmoid(1.0) * 1f64.tanh();
    let h_want = sigmoid(1.0) * c_want.tanh();
    let (h, c) = (h.as_slice()[0], c.as_slice()[0]);
    ensure((c - c_want).abs() < 1e-9 && (h - h_want).abs() < 1e-9, || format!("lstm ({h}, {c})"))?;

    // macro-F1 on golds (A,A,B,B), preds (A,B,B,B)
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let rep = evaluate(&s(&["A", "B", "B", "B"]), &s(&["A", "A", "B", "B"]), &s(&["A", "B"])).map_err(|e| e.to_string())?;
    ensure((rep.macro_f1 - 0.7333).abs() < 1e-4, || format!("macro-F1 {}", rep.macro_f1))?;

    Ok(format!(
        "tfidf ({a:.6}, {b:.6}), gini 0/0.5, split 0.5, rnn {rnn:.6}, gru {gru:.6}, lstm c {c:.6} h {h:.6}, macro-F1 {:.4}",
        rep.macro_f1
    ))
}

// -------------------------------------------------------------- separability

fn to_dataset(points: Vec<(Vec<f64>, String)>) -> (Vec<Features>, Vec<String>) {
    points
        .into_iter()
        .map(|(p, l)| (Features::Dense(DenseVector::from(p)), l))
        .unzip()
}

fn blobs(seed: u64, n: usize) -> (Vec<Features>, Vec<String>) {
    let centers = [(0.0, 5.0), (-5.0, -3.0), (5.0, -3.0)];
    let mut rng = RngStream::new(seed);
    to_dataset(
        (0..n)
            .map(|i| {
                let (cx, cy) = centers[i % 3];
                (vec![cx + rng.normal(), cy + rng.normal()], format!("blob{}", i % 3))
            })
            .collect(),
    )
}

fn xor(seed: u64, n: usize) -> (Vec<Features>, Vec<String>) {
    let corners = [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)];
    let mut rng = RngStream::new(seed);
    to_dataset(
        (0..n)
            .map(|i| {
                let (cx, cy) = corners[i % 4];
                let label = if cx * cy > 0.0 { "even" } else { "odd" };
                (vec![cx + 0.25 * rng.normal(), cy + 0.25 * rng.normal()], label.to_string())
            })
            .collect(),
    )
}

fn held_out_f1(kind: ModelKind, x: &[Features], y: &[String], seed: u64) -> Result<f64, String> {
    let (tr, te) = stratified_indices(y, 0.25, seed).map_err(|e| e.to_string())?;
    let pick = |idx: &[usize]| -> (Vec<Features>, Vec<String>) { idx.iter().map(|&i| (x[i].clone(), y[i].clone())).unzip() };
    let ((xtr, ytr), (xte, yte)) = (pick(&tr), pick(&te));
    let model = train_model(kind, &xtr, &ytr, &TrainConfig::default(), seed).map_err(|e| format!("{kind}: {e}"))?;
    let mut labels = y.to_vec();
    labels.sort();
    labels.dedup();
    let pred = model.predict_all(&xte).map_err(|e| e.to_string())?;
    Ok(evaluate(&pred, &yte, &labels).map_err(|e| e.to_string())?.macro_f1)
}

fn separability() -> Check {
    let (x, y) = blobs(21, 200);
    let mut worst = (f64::INFINITY, ModelKind::Cosine);
    for kind in ModelKind::ALL {
        let f1 = held_out_f1(kind, &x, &y, 5)?;
        ensure(f1 >= 0.95, || format!("blobs {kind}: macro-F1 {f1:.4}"))?;
        if f1 < worst.0 {
            worst = (f1, kind);
        }
    }
    let (x, y) = xor(22, 200);
    let svm = held_out_f1(ModelKind::KernelSvm, &x, &y, 5)?;
    let ffnn = held_out_f1(ModelKind::Ffnn, &x, &y, 5)?;
    let linear = held_out_f1(ModelKind::LinearSvm, &x, &y, 5)?;
    ensure(svm >= 0.95, || format!("xor svm {svm:.4}"))?;
    ensure(ffnn >= 0.95, || format!("xor ffnn {ffnn:.4}"))?;
    ensure(linear <= 0.75, || format!("xor linear-svm {linear:.4}"))?;
    Ok(format!(
        "blobs worst {} {:.4}; xor svm {svm:.4}, ffnn {ffnn:.4}, linear-svm {linear:.4}",
        worst.1, worst.0
    ))
}

// ------------------------------------------------------------ temporal signal

fn temporal() -> Check {
    let mut lines = Vec::new();
    for seed in 1..=3u64 {
        let ds = generate_order_task(seed, 300);
        let (train, test) = stratified_split(&ds, 0.2, seed).map_err(|e| e.to_string())?;
        let labels = ds.labels().to_vec();
        let gold = test.label_strings();
        let table = EmbeddingTable::random(build_vocabulary(&train, 1), 16, seed);
        let cfg = SeqConfig {
            hidden: 32,
            ..Default::default()
        };
        let mut rec = Vec::new();
        for kind in [CellKind::Gru, CellKind::Lstm] {
            let (model, _) = train_sequence_model(kind, &train, &table, &cfg, seed).map_err(|e| e.to_string())?;
            let f1 = evaluate(&model.predict_all(&test), &gold, &labels).map_err(|e| e.to_string())?.macro_f1;
            ensure(f1 >= 0.95, || format!("seed {seed} {kind}: {f1:.4}"))?;
            rec.push(f1);
        }
        let mut bow_max: f64 = 0.0;
        let mut res = EncoderResources::new(seed);
        for spec in [
            EncoderSpec::Count,
            EncoderSpec::Tfidf,
            EncoderSpec::CountLsa { rank: 100 },
            EncoderSpec::TfidfLsa { rank: 100 },
        ] {
            let enc = fit_encoder(&spec, &train, &mut res).map_err(|e| e.to_string())?;
            let (x, xt) = (enc.encode_all(&train), enc.encode_all(&test));
            for kind in [ModelKind::LinearSvm, ModelKind::LogReg] {
                let model = train_model(kind, &x, &train.label_strings(), &TrainConfig::default(), seed)
                    .map_err(|e| e.to_string())?;
                let pred = model.predict_all(&xt).map_err(|e| e.to_string())?;
                let f1 = evaluate(&pred, &gold, &labels).map_err(|e| e.to_string())?.macro_f1;
                ensure(f1 <= 0.6, || format!("seed {seed} {spec:?} + {kind}: {f1:.4}"))?;
                bow_max = bow_max.max(f1);
            }
        }
        lines.push(format!("seed {seed}: gru {:.3} lstm {:.3} bow<= {bow_max:.3}", rec[0], rec[1]));
    }
    Ok(lines.join("; "))
}

// ---------------------------------------------------------- grid and replays

const GRID_SPEC: &str = "\
[grid]
seed = {SEED}

[dataset]
source = codemix
seed = {SEED}
per_intent = 200

[external]
words = words.vec
sentences = sentences.vec

[encoders]
Count = count
Tfidf = tfidf
Count-Lsa = count-lsa
Tfidf-Lsa = tfidf-lsa
SG25-Avg = sgns-avg dim=25
SG25-IdfAvg = sgns-idf-avg dim=25
SG512-Avg = sgns-avg dim=512
SG512-IdfAvg = sgns-idf-avg dim=512
USE = external-sentence
ELMO = external-word-avg

[classifiers]
Linear SVM = linear-svm
SVM = svm
Logistic Regression = logreg
KNN = knn
Random Forest = random-forest
Decision Tree = decision-tree
FFNN = ffnn
Cosine = cosine

[recurrent]
RNN = rnn
GRU = gru
LSTM = lstm

[recurrent-embeddings]
SG25 = sgns dim=25
SG512 = sgns dim=512
ELMO = external-words
";

fn cli(args: &[&str]) -> Result<(), String> {
    let mut argv = vec!["intentgrid", "-q"];
    argv.extend_from_slice(args);
    match run_cli(&argv) {
        0 => Ok(()),
        code => Err(format!("`{}` exited {code}", args.join(" "))),
    }
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

type Scores = (Vec<String>, Vec<String>, Vec<Vec<Option<f64>>>);

/// Parses a score TSV into (rows, cols, values); `NA` becomes None.
fn read_scores(path: &Path) -> Result<Scores, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    let cols: Vec<String> = lines.next().unwrap_or("").split('\t').skip(1).map(String::from).collect();
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for line in lines {
        let mut f = line.split('\t');
        rows.push(f.next().unwrap_or("").to_string());
        values.push(f.map(|v| v.parse().ok()).collect());
    }
    Ok((rows, cols, values))
}

fn same_bytes(a: &Path, b: &Path) -> Result<(), String> {
    let (x, y) = (fs::read(a).map_err(|e| e.to_string())?, fs::read(b).map_err(|e| e.to_string())?);
    ensure(x == y, || format!("{} and {} differ", a.display(), b.display()))
}

const RESULT_FILES: [&str; 6] = [
    "results.tsv",
    "results.txt",
    "cells.tsv",
    "recurrent.tsv",
    "recurrent.txt",
    "recurrent_cells.tsv",
];

fn grid_replication(root: &Path) -> Check {
    let mut lines = Vec::new();
    let mut slowest = Duration::ZERO;
    for seed in 1..=3u64 {
        let dir = root.join(format!("seed{seed}"));
        let data = dir.join("codemix.tsv");
        cli(&["gen-data", "--seed", &seed.to_string(), "--per-intent", "200", "--out", s(&data), "--stand-in-embeddings", s(&dir)])?;
        let spec = dir.join("grid.cfg");
        fs::write(&spec, GRID_SPEC.replace("{SEED}", &seed.to_string())).map_err(|e| e.to_string())?;
        let out = dir.join("out");
        let start = Instant::now();
        cli(&["grid", "--spec", s(&spec), "--out", s(&out)])?;
        slowest = slowest.max(start.elapsed());

        let (rows, cols, v) = read_scores(&out.join("results.tsv"))?;
        ensure(rows.len() == 8 && cols.len() == 10, || format!("seed {seed}: classic grid {}x{}", rows.len(), cols.len()))?;
        ensure(v.iter().flatten().all(|c| c.is_some()), || format!("seed {seed}: classic grid has failed cells"))?;
        let (rrows, rcols, rv) = read_scores(&out.join("recurrent.tsv"))?;
        ensure(rrows.len() == 3 && rcols.len() == 3, || format!("seed {seed}: recurrent grid {}x{}", rrows.len(), rcols.len()))?;
        ensure(rv.iter().flatten().all(|c| c.is_some()), || format!("seed {seed}: recurrent grid has failed cells"))?;

        let best = |v: &[Vec<Option<f64>>]| v.iter().flatten().flatten().copied().fold(f64::MIN, f64::max);
        let (classic, recurrent) = (best(&v), best(&rv));
        ensure(recurrent >= classic - 1.0, || format!("seed {seed}: best recurrent {recurrent} < best classic {classic} - 1"))?;
        lines.push(format!("seed {seed}: best recurrent {recurrent:.2} vs classic {classic:.2}"));

        if seed == 1 {
            let again = dir.join("rerun");
            cli(&["grid", "--spec", s(&spec), "--out", s(&again)])?;
            for f in RESULT_FILES {
                same_bytes(&out.join(f), &again.join(f))?;
            }
            lines.push("rerun byte-identical".into());
        }
    }
    ensure(slowest < Duration::from_secs(15 * 60), || format!("slowest grid took {:.0}s", slowest.as_secs_f64()))?;
    lines.push(format!("slowest grid {:.0}s", slowest.as_secs_f64()));
    Ok(lines.join("; "))
}

/// Replays a manifest into a fresh directory and compares every output with
/// the original byte for byte.
fn replay_matches(manifest: &Path, into: &Path, outputs: &[PathBuf]) -> Result<(), String> {
    cli(&["replay", s(manifest), "--into", s(into)])?;
    for o in outputs {
        let name = o.file_name().unwrap();
        let copy = if into.join(name).exists() { into.join(name) } else { into.join(o.parent().unwrap().file_name().unwrap()).join(name) };
        same_bytes(o, &copy)?;
    }
    Ok(())
}

fn cli_determinism(root: &Path, grid_root: &Path) -> Check {
    let dir = root.join("runs");
    let data = dir.join("small.tsv");
    cli(&["gen-data", "--seed", "4", "--per-intent", "40", "--out", s(&data), "--stand-in-embeddings", s(&dir.join("ext"))])?;
    let emb = dir.join("sg.vec");
    cli(&["embed", "--data", s(&data), "--out", s(&emb), "--dim", "16", "--epochs", "3"])?;
    let model = dir.join("model.json");
    cli(&["train", "--data", s(&data), "--out", s(&model), "--model", "random-forest", "--encoder", "tfidf-lsa rank=30", "--param", "trees=20"])?;
    let seq = dir.join("gru.json");
    cli(&["train", "--data", s(&data), "--out", s(&seq), "--model", "gru", "--embeddings", "sgns dim=16", "--param", "hidden=16"])?;
    let input = dir.join("input.txt");
    let texts: Vec<String> = fs::read_to_string(&data)
        .map_err(|e| e.to_string())?
        .lines()
        .filter_map(|l| l.split_once('\t').map(|(_, t)| t.to_string()))
        .collect();
    fs::write(&input, texts.join("\n")).map_err(|e| e.to_string())?;
    let pred = dir.join("pred.tsv");
    cli(&["predict", "--model", s(&seq), "--input", s(&input), "--out", s(&pred)])?;
    let report = dir.join("eval.txt");
    cli(&["eval", "--model", s(&model), "--data", s(&data), "--out", s(&report)])?;

    let runs: [(&Path, Vec<PathBuf>); 6] = [
        (&data, vec![data.clone(), dir.join("ext/words.vec"), dir.join("ext/sentences.vec")]),
        (&emb, vec![emb.clone()]),
        (&model, vec![model.clone()]),
        (&seq, vec![seq.clone()]),
        (&pred, vec![pred.clone()]),
        (&report, vec![report.clone()]),
    ];
    for (i, (out, outputs)) in runs.iter().enumerate() {
        let manifest = PathBuf::from(format!("{}.manifest", out.display()));
        replay_matches(&manifest, &root.join(format!("replay{i}")), outputs)?;
    }

    let grid_out = grid_root.join("seed1/out");
    let into = root.join("grid-replay");
    cli(&["replay", s(&grid_out.join("manifest.txt")), "--into", s(&into)])?;
    for f in RESULT_FILES {
        same_bytes(&grid_out.join(f), &into.join(f))?;
    }
    Ok("gen-data, embed, train x2, predict, eval and grid manifests replay byte-identically".into())
}

// ---------------------------------------------------------------------- main

fn run(name: &str, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    let secs = start.elapsed().as_secs_f64();
    match &result {
        Ok(detail) => println!("PASS  {name} ({secs:.1}s): {detail}"),
        Err(why) => println!("FAIL  {name} ({secs:.1}s): {why}"),
    }
    result.is_ok()
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; a name filter
    // that matches nothing here skips the gate.
    if let Some(filter) = std::env::args().skip(1).find(|a| !a.starts_with('-')) {
        if !"acceptance".contains(filter.as_str()) {
            return;
        }
    }
    let tmp = tempfile::tempdir().expect("temp dir");
    let grid_root = tmp.path().join("grid");
    type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Check + 'a>);
    let checks: [Criterion; 7] = [
        ("1 gradient suite", Box::new(gradient_suite)),
        ("2 numeric oracles", Box::new(numeric_oracles)),
        ("3 hand values", Box::new(hand_values)),
        ("4 separability", Box::new(separability)),
        ("5 temporal signal", Box::new(temporal)),
        ("6 grid replication", Box::new(|| grid_replication(&grid_root))),
        ("7 manifest determinism", Box::new(|| cli_determinism(tmp.path(), &grid_root))),
    ];
    // ACCEPTANCE_ONLY=1,4 runs a subset; criterion 7 replays the grid from 6.
    let only: Option<Vec<String>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').map(|s| s.trim().to_string()).collect());
    let mut failed = 0;
    let mut ran = 0;
    for (name, f) in checks {
        if let Some(only) = &only {
            if !only.iter().any(|n| name.split(' ').next() == Some(n.as_str())) {
                continue;
            }
        }
        ran += 1;
        if !run(name, f) {
            failed += 1;
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

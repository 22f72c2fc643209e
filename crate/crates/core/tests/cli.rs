use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_intentgrid"));
    c.arg("-q");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_data_writes_balanced_tsv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.tsv");
    ok(&["gen-data", "--seed", "3", "--per-intent", "100", "--out", p(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 700);
    assert!(dir.path().join("d.tsv.manifest").exists());
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(run(&["--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["train", "--data", "x.tsv", "--out", "m.json", "--model", "nope"]).status.code(), Some(1));
}

#[test]
fn help_succeeds_for_every_command() {
    for cmd in ["gen-data", "embed", "train", "predict", "eval", "grid", "replay"] {
        let out = run(&[cmd, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}");
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn missing_files_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.tsv");
    let model = dir.path().join("m.json");
    let code = run(&["train", "--data", p(&missing), "--out", p(&model)]).status.code();
    assert_eq!(code, Some(2));
    assert_eq!(run(&["predict", "--model", p(&model)]).status.code(), Some(2));
}

#[test]
fn train_then_predict_from_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.tsv");
    let model = dir.path().join("m.json");
    ok(&["gen-data", "--seed", "2", "--per-intent", "20", "--out", p(&data)]);
    ok(&["train", "--data", p(&data), "--out", p(&model), "--model", "logreg"]);

    let mut child = bin()
        .args(["predict", "--model", p(&model)])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"play some music\nbook a table for two\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].ends_with("\tplay some music"), "{}", lines[0]);

    let report = dir.path().join("eval.txt");
    ok(&["eval", "--model", p(&model), "--data", p(&data), "--out", p(&report)]);
    assert!(fs::read_to_string(&report).unwrap().contains("macro"));
}

const SMALL_GRID: &str = "[grid]\nseed = 5\n[dataset]\nsource = codemix\nseed = 5\nper_intent = 25\n\
[encoders]\nCount = count\nTfidf = tfidf\n[classifiers]\nLogReg = logreg\nKNN = knn k=3\nCosine = cosine\n";

#[test]
fn grid_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("g.cfg");
    fs::write(&spec, SMALL_GRID).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["grid", "--spec", p(&spec), "--out", p(&a), "--jobs", "1"]);
    ok(&["grid", "--spec", p(&spec), "--out", p(&b), "--jobs", "2"]);
    for f in ["results.tsv", "results.txt", "cells.tsv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let tsv = fs::read_to_string(a.join("results.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 4);

    let c = dir.path().join("c");
    let manifest = a.join("manifest.txt");
    ok(&["replay", p(&manifest), "--into", p(&c)]);
    assert_eq!(fs::read(a.join("results.tsv")).unwrap(), fs::read(c.join("results.tsv")).unwrap());
}

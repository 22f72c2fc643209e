use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::tokenize::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub text: String,
    pub tokens: Vec<String>,
}

impl Utterance {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Utterance { text, tokens }
    }

    /// Utterance with pre-split tokens, bypassing the tokenizer.
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        Utterance {
            text: tokens.join(" "),
            tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub utterance: Utterance,
    pub label: String,
}

/// Ordered labeled utterances plus their distinct label set (sorted).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledDataset {
    records: Vec<Record>,
    labels: Vec<String>,
}

impl LabeledDataset {
    pub fn new(records: Vec<Record>) -> Self {
        let labels: BTreeSet<&str> = records.iter().map(|r| r.label.as_str()).collect();
        let labels = labels.into_iter().map(str::to_owned).collect();
        LabeledDataset { records, labels }
    }

    /// Builds a dataset from `(label, text)` pairs, tokenizing each text.
    pub fn from_pairs<L, T>(pairs: impl IntoIterator<Item = (L, T)>) -> Self
    where
        L: Into<String>,
        T: Into<String>,
    {
        LabeledDataset::new(
            pairs
                .into_iter()
                .map(|(label, text)| Record {
                    utterance: Utterance::new(text),
                    label: label.into(),
                })
                .collect(),
        )
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn utterances(&self) -> impl Iterator<Item = &Utterance> {
        self.records.iter().map(|r| &r.utterance)
    }

    pub fn label_strings(&self) -> Vec<String> {
        self.records.iter().map(|r| r.label.clone()).collect()
    }

    /// Records at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset::new(indices.iter().map(|&i| self.records[i].clone()).collect())
    }

    pub fn count_by_label(&self) -> Vec<(String, usize)> {
        self.labels
            .iter()
            .map(|l| (l.clone(), self.records.iter().filter(|r| &r.label == l).count()))
            .collect()
    }

    /// `label<TAB>text` lines, LF-terminated.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.label);
            out.push('\t');
            out.push_str(&r.utterance.text.replace(['\n', '\r'], " "));
            out.push('\n');
        }
        out
    }

    pub fn parse_tsv(content: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (i, raw) in content.split('\n').enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() {
                continue;
            }
            let (label, text) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected `label<TAB>text`"))?;
            if label.trim().is_empty() {
                return Err(Error::parse(i + 1, "empty label"));
            }
            records.push(Record {
                utterance: Utterance::new(text),
                label: label.to_owned(),
            });
        }
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(LabeledDataset::new(records))
    }

    pub fn load_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        LabeledDataset::parse_tsv(&content)
    }

    pub fn save_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    /// SHA-256 of the TSV serialization, hex-encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_tsv().as_bytes()))
    }
}

/// Reads a TSV dataset file (`label<TAB>text` per line).
pub fn load_dataset(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    LabeledDataset::load_tsv(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_line_readback() {
        let ds = LabeledDataset::parse_tsv("RateBook\trate this book 5\nGetWeather\tkal ka mausam?\n")
            .unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.labels(), &["GetWeather".to_string(), "RateBook".to_string()]);
        assert_eq!(ds.records()[1].utterance.tokens, vec!["kal", "ka", "mausam"]);
    }

    #[test]
    fn missing_tab_names_line() {
        let err = LabeledDataset::parse_tsv("A\tok\nbroken line\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn duplicates_retained_and_empty_rejected() {
        let ds = LabeledDataset::parse_tsv("A\tsame\nA\tsame\n").unwrap();
        assert_eq!(ds.len(), 2);
        assert!(matches!(LabeledDataset::parse_tsv(""), Err(Error::EmptyDataset)));
        assert!(matches!(LabeledDataset::parse_tsv("\n\n"), Err(Error::EmptyDataset)));
    }

    #[test]
    fn load_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.tsv");
        std::fs::write(&path, "RateBook\tGive the novel 4 stars\r\nGetWeather\tweather\n").unwrap();
        let ds = load_dataset(&path).unwrap();
        assert_eq!(ds.records()[0].utterance.text, "Give the novel 4 stars");
        assert!(load_dataset(dir.path().join("missing.tsv")).is_err());
    }

    proptest! {
        #[test]
        fn tsv_round_trip(rows in proptest::collection::vec(("[A-Za-z]{1,8}", "[^\t\r\n]{0,30}"), 1..20)) {
            let ds = LabeledDataset::from_pairs(rows.clone());
            let back = LabeledDataset::parse_tsv(&ds.to_tsv());
            // all-blank texts still produce a line because the label is present
            let back = back.unwrap();
            prop_assert_eq!(back.records(), ds.records());
            let again = LabeledDataset::parse_tsv(&back.to_tsv()).unwrap();
            prop_assert_eq!(again, back);
        }
    }
}

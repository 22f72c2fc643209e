//! Precomputed word-level and sentence-level vector files.
//!
//! Word file: first line `V D`, then `token v1 .. vD` per line.
//! Sentence file: same header, then `normalized-text<TAB>v1 .. vD` per line.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::{normalize_text, LabeledDataset, Utterance, Vocabulary};
use crate::error::{Error, Result};
use crate::numerics::rng::{label_hash, mix_seed};
use crate::numerics::{DenseVector, Matrix, RngStream};

use super::embedding::EmbeddingTable;

/// Sentence vectors keyed by normalized text.
#[derive(Debug, Serialize, Deserialize)]
pub struct SentenceVectorTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
    #[serde(skip)]
    misses: AtomicUsize,
}

impl Clone for SentenceVectorTable {
    fn clone(&self) -> Self {
        SentenceVectorTable {
            dim: self.dim,
            vectors: self.vectors.clone(),
            misses: AtomicUsize::new(0),
        }
    }
}

impl PartialEq for SentenceVectorTable {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vectors == other.vectors
    }
}

impl SentenceVectorTable {
    pub fn new(dim: usize) -> Self {
        SentenceVectorTable {
            dim,
            vectors: BTreeMap::new(),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn insert(&mut self, text: &str, vector: Vec<f64>) -> Result<()> {
        Error::check_dim(self.dim, vector.len())?;
        self.vectors.insert(normalize_text(text), DenseVector::try_new(vector)?.into_vec());
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Vector for `text`; unknown sentences map to the zero vector and are
    /// counted in [`Self::misses`].
    pub fn lookup(&self, text: &str) -> DenseVector {
        match self.vectors.get(&normalize_text(text)) {
            Some(v) => DenseVector::from(v.clone()),
            None => {
                let n = self.misses.fetch_add(1, Ordering::Relaxed) + 1;
                warn!("sentence vector missing for {text:?} ({n} miss(es) so far)");
                DenseVector::zeros(self.dim)
            }
        }
    }

    pub fn encode(&self, u: &Utterance) -> DenseVector {
        self.lookup(&u.text)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingLevel {
    Word,
    Sentence,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExternalEmbeddings {
    Word(EmbeddingTable),
    Sentence(SentenceVectorTable),
}

fn parse_header(line: Option<&str>) -> Result<(usize, usize)> {
    let line = line.ok_or_else(|| Error::parse(1, "missing `V D` header"))?;
    let mut it = line.split_whitespace();
    let parse = |s: Option<&str>| -> Result<usize> {
        s.and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(1, format!("bad header {line:?}, expected `V D`")))
    };
    let v = parse(it.next())?;
    let d = parse(it.next())?;
    if it.next().is_some() {
        return Err(Error::parse(1, "header has extra fields"));
    }
    Ok((v, d))
}

fn parse_values<'a>(fields: impl Iterator<Item = &'a str>, dim: usize, line: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = fields
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line, format!("bad value {f:?}")))
        })
        .collect::<Result<_>>()?;
    if values.len() != dim {
        return Err(Error::parse(
            line,
            format!("expected {dim} values, found {}", values.len()),
        ));
    }
    Ok(values)
}

pub fn parse_word_embeddings(content: &str) -> Result<EmbeddingTable> {
    let mut lines = content.lines();
    let (n, dim) = parse_header(lines.next())?;
    let mut tokens = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let token = fields.next().expect("nonblank line");
        data.extend(parse_values(fields, dim, lineno)?);
        tokens.push(token.to_string());
    }
    if tokens.len() != n {
        return Err(Error::parse(
            content.lines().count(),
            format!("header declares {n} rows, found {}", tokens.len()),
        ));
    }
    let vocab = Vocabulary::from_tokens(tokens);
    if vocab.len() != n || vocab.tokens().iter().enumerate().any(|(i, t)| vocab.index_of(t) != Some(i)) {
        return Err(Error::parse(1, "duplicate token in embedding file"));
    }
    EmbeddingTable::new(vocab, Matrix::from_vec(n, dim, data)?)
}

pub fn parse_sentence_vectors(content: &str) -> Result<SentenceVectorTable> {
    let mut lines = content.lines();
    let (n, dim) = parse_header(lines.next())?;
    let mut table = SentenceVectorTable::new(dim);
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(lineno, "expected `text<TAB>values`"))?;
        let values = parse_values(rest.split(' ').filter(|f| !f.is_empty()), dim, lineno)?;
        table.insert(key, values)?;
        rows += 1;
    }
    if rows != n {
        return Err(Error::parse(
            content.lines().count(),
            format!("header declares {n} rows, found {rows}"),
        ));
    }
    Ok(table)
}

pub fn load_external_embeddings(path: impl AsRef<Path>, level: EmbeddingLevel) -> Result<ExternalEmbeddings> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(match level {
        EmbeddingLevel::Word => ExternalEmbeddings::Word(parse_word_embeddings(&content)?),
        EmbeddingLevel::Sentence => ExternalEmbeddings::Sentence(parse_sentence_vectors(&content)?),
    })
}

pub fn load_word_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    match load_external_embeddings(path, EmbeddingLevel::Word)? {
        ExternalEmbeddings::Word(t) => Ok(t),
        ExternalEmbeddings::Sentence(_) => unreachable!(),
    }
}

pub fn load_sentence_vectors(path: impl AsRef<Path>) -> Result<SentenceVectorTable> {
    match load_external_embeddings(path, EmbeddingLevel::Sentence)? {
        ExternalEmbeddings::Sentence(t) => Ok(t),
        ExternalEmbeddings::Word(_) => unreachable!(),
    }
}

fn push_values(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        // shortest representation that parses back to the same bits
        write!(out, "{v}").unwrap();
    }
}

pub fn format_word_embeddings(table: &EmbeddingTable) -> String {
    let mut out = format!("{} {}\n", table.len(), table.dim());
    for (i, t) in table.vocab().tokens().iter().enumerate() {
        out.push_str(t);
        out.push(' ');
        push_values(&mut out, table.vectors().row(i));
        out.push('\n');
    }
    out
}

pub fn format_sentence_vectors(table: &SentenceVectorTable) -> String {
    let mut out = format!("{} {}\n", table.len(), table.dim());
    for (k, v) in &table.vectors {
        out.push_str(k);
        out.push('\t');
        push_values(&mut out, v);
        out.push('\n');
    }
    out
}

pub fn write_word_embeddings(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_word_embeddings(table)).map_err(|e| Error::io(path, e))
}

pub fn write_sentence_vectors(table: &SentenceVectorTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_sentence_vectors(table)).map_err(|e| Error::io(path, e))
}

fn hashed_unit_vector(seed: u64, token: &str, dim: usize) -> Vec<f64> {
    let mut rng = RngStream::new(mix_seed(seed, label_hash(token)));
    let v: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Stand-in tables for externally pretrained encoders: a word table with a
/// seeded random unit vector per corpus token, and a sentence table whose
/// rows are normalized means of a second set of random token vectors plus
/// small noise. Covers every utterance in `ds`.
pub fn stand_in_tables(
    ds: &LabeledDataset,
    word_dim: usize,
    sentence_dim: usize,
    seed: u64,
) -> Result<(EmbeddingTable, SentenceVectorTable)> {
    let vocab = crate::data::build_vocabulary(ds, 1);
    let word_seed = mix_seed(seed, label_hash("word"));
    let mut data = Vec::with_capacity(vocab.len() * word_dim);
    for t in vocab.tokens() {
        data.extend(hashed_unit_vector(word_seed, t, word_dim));
    }
    let words = EmbeddingTable::new(
        Vocabulary::from_tokens(vocab.tokens().to_vec()),
        Matrix::from_vec(vocab.len(), word_dim, data)?,
    )?;

    let sent_seed = mix_seed(seed, label_hash("sentence"));
    let mut noise = RngStream::new(mix_seed(seed, label_hash("noise")));
    let mut sentences = SentenceVectorTable::new(sentence_dim);
    for u in ds.utterances() {
        let mut acc = vec![0.0; sentence_dim];
        for t in &u.tokens {
            for (a, x) in acc.iter_mut().zip(hashed_unit_vector(sent_seed, t, sentence_dim)) {
                *a += x;
            }
        }
        for a in acc.iter_mut() {
            *a += 0.05 * noise.normal() / (sentence_dim as f64).sqrt();
        }
        let n = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
        sentences.insert(&u.text, acc.into_iter().map(|x| x / n).collect())?;
    }
    Ok((words, sentences))
}

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;

/// Token → dense index map with per-token document frequencies.
///
/// Indices follow first occurrence in corpus order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    tokens: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        let index = r
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            tokens: r.tokens,
            df: r.df,
            n_docs: r.n_docs,
            index,
        }
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            tokens: v.tokens,
            df: v.df,
            n_docs: v.n_docs,
        }
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens && self.df == other.df && self.n_docs == other.n_docs
    }
}

impl Vocabulary {
    /// Builds a vocabulary from tokenized documents, keeping tokens whose
    /// document frequency is at least `min_df`.
    pub fn from_documents<'a, I>(docs: I, min_df: usize) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut order: Vec<String> = Vec::new();
        let mut counts: HashMap<String, usize> = HashMap::new();
        let mut n_docs = 0;
        for doc in docs {
            n_docs += 1;
            let mut seen: HashSet<&str> = HashSet::new();
            for t in doc {
                if seen.insert(t.as_str()) {
                    match counts.get_mut(t.as_str()) {
                        Some(c) => *c += 1,
                        None => {
                            counts.insert(t.clone(), 1);
                            order.push(t.clone());
                        }
                    }
                }
            }
        }
        let mut tokens = Vec::new();
        let mut df = Vec::new();
        for t in order {
            let c = counts[&t];
            if c >= min_df.max(1) {
                tokens.push(t);
                df.push(c);
            }
        }
        Vocabulary::from(VocabularyRepr { tokens, df, n_docs })
    }

    /// Builds a vocabulary from an explicit token list (document frequency 1
    /// each, one pseudo-document).
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let df = vec![1; tokens.len()];
        Vocabulary::from(VocabularyRepr {
            tokens,
            df,
            n_docs: 1,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn df(&self, token: &str) -> Option<usize> {
        self.index_of(token).map(|i| self.df[i])
    }

    pub fn df_at(&self, index: usize) -> usize {
        self.df[index]
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }
}

/// Vocabulary over the tokenized records of `ds`.
pub fn build_vocabulary(ds: &LabeledDataset, min_df: usize) -> Vocabulary {
    Vocabulary::from_documents(ds.utterances().map(|u| u.tokens.as_slice()), min_df)
}

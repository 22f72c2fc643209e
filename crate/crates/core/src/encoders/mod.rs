//! Utterance representations: bag-of-words counts and tf-idf, LSA topic
//! vectors, skip-gram embeddings with plain and idf-weighted averaging, and
//! precomputed external word/sentence vectors.

mod bow;
mod embedding;
mod external;
mod lsa;
mod sgns;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bow::{count_encode, smoothed_idf, tfidf_encode, tfidf_fit, IdfTable};
pub use embedding::{avg_encode, idf_avg_encode, EmbeddingTable};
pub use external::{
    format_sentence_vectors, format_word_embeddings, load_external_embeddings,
    load_sentence_vectors, load_word_embeddings, parse_sentence_vectors, parse_word_embeddings,
    stand_in_tables, write_sentence_vectors, write_word_embeddings, EmbeddingLevel,
    ExternalEmbeddings, SentenceVectorTable,
};
pub use lsa::{
    doc_term_matrix, effective_rank, lsa_encode, lsa_fit, LsaProjection, DEFAULT_RANK,
    MIN_SINGULAR_VALUE,
};
pub use sgns::{sgns_train, sgns_train_with_loss, SgnsConfig, SgnsModel};

use crate::data::{build_vocabulary, LabeledDataset, Utterance, Vocabulary};
use crate::error::{Error, Result};
use crate::numerics::rng::mix_seed;
use crate::numerics::Features;

/// A fitted representation: fixed output dimension, pure `encode`.
pub trait Encoder {
    fn dim(&self) -> usize;
    fn encode(&self, u: &Utterance) -> Features;

    fn encode_all(&self, ds: &LabeledDataset) -> Vec<Features> {
        ds.utterances().map(|u| self.encode(u)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BagOfWords {
    Count { vocab: Vocabulary },
    Tfidf { vocab: Vocabulary, idf: IdfTable },
}

impl BagOfWords {
    pub fn fit_count(train: &LabeledDataset) -> Self {
        BagOfWords::Count {
            vocab: build_vocabulary(train, 1),
        }
    }

    pub fn fit_tfidf(train: &LabeledDataset) -> Self {
        let vocab = build_vocabulary(train, 1);
        let idf = IdfTable::from_vocabulary(&vocab);
        BagOfWords::Tfidf { vocab, idf }
    }

    pub fn vocab(&self) -> &Vocabulary {
        match self {
            BagOfWords::Count { vocab } | BagOfWords::Tfidf { vocab, .. } => vocab,
        }
    }

    pub fn encode_sparse(&self, u: &Utterance) -> crate::numerics::SparseVector {
        match self {
            BagOfWords::Count { vocab } => count_encode(vocab, u),
            BagOfWords::Tfidf { vocab, idf } => tfidf_encode(vocab, idf, u),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FittedEncoder {
    Bow(BagOfWords),
    Lsa {
        base: BagOfWords,
        projection: LsaProjection,
    },
    Average {
        table: EmbeddingTable,
        idf: Option<IdfTable>,
    },
    Sentence {
        table: SentenceVectorTable,
    },
}

impl Encoder for FittedEncoder {
    fn dim(&self) -> usize {
        match self {
            FittedEncoder::Bow(b) => b.vocab().len(),
            FittedEncoder::Lsa { projection, .. } => projection.dim(),
            FittedEncoder::Average { table, .. } => table.dim(),
            FittedEncoder::Sentence { table } => table.dim(),
        }
    }

    fn encode(&self, u: &Utterance) -> Features {
        match self {
            FittedEncoder::Bow(b) => Features::Sparse(b.encode_sparse(u)),
            FittedEncoder::Lsa { base, projection } => Features::Dense(
                lsa_encode(projection, &base.encode_sparse(u)).expect("projection fitted on this vocabulary"),
            ),
            FittedEncoder::Average { table, idf: None } => Features::Dense(avg_encode(u, table)),
            FittedEncoder::Average { table, idf: Some(idf) } => {
                Features::Dense(idf_avg_encode(u, table, idf))
            }
            FittedEncoder::Sentence { table } => Features::Dense(table.encode(u)),
        }
    }
}

/// What to fit for one grid column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EncoderSpec {
    Count,
    Tfidf,
    CountLsa { rank: usize },
    TfidfLsa { rank: usize },
    SgnsAvg(SgnsConfig),
    SgnsIdfAvg(SgnsConfig),
    ExternalSentence,
    ExternalWordAvg,
    ExternalWordIdfAvg,
}

/// Shared inputs for fitting encoders: trained skip-gram tables are cached
/// per configuration, external tables are loaded once.
#[derive(Debug, Default)]
pub struct EncoderResources {
    pub seed: u64,
    pub external_words: Option<Arc<EmbeddingTable>>,
    pub external_sentences: Option<Arc<SentenceVectorTable>>,
    sgns_cache: BTreeMap<String, Arc<EmbeddingTable>>,
}

impl EncoderResources {
    pub fn new(seed: u64) -> Self {
        EncoderResources {
            seed,
            ..Default::default()
        }
    }

    /// Skip-gram table for `cfg` trained on `train`, cached by config. The
    /// training seed depends only on the resource seed and the config.
    pub fn sgns_table(&mut self, train: &LabeledDataset, cfg: &SgnsConfig) -> Result<Arc<EmbeddingTable>> {
        let key = serde_json::to_string(cfg).expect("config serializes");
        if let Some(t) = self.sgns_cache.get(&key) {
            return Ok(t.clone());
        }
        let seed = mix_seed(self.seed, crate::numerics::rng::label_hash(&key));
        let table = Arc::new(sgns_train(train, cfg, seed)?);
        self.sgns_cache.insert(key, table.clone());
        Ok(table)
    }

    fn words(&self) -> Result<&EmbeddingTable> {
        self.external_words
            .as_deref()
            .ok_or_else(|| Error::arg("external word embeddings not provided"))
    }
}

/// Fits `spec` on the training split.
pub fn fit_encoder(
    spec: &EncoderSpec,
    train: &LabeledDataset,
    resources: &mut EncoderResources,
) -> Result<FittedEncoder> {
    let lsa = |base: BagOfWords, rank: usize| -> Result<FittedEncoder> {
        let docs: Vec<_> = train.utterances().map(|u| base.encode_sparse(u)).collect();
        let k = effective_rank(rank, docs.len(), base.vocab().len());
        let projection = lsa_fit(&doc_term_matrix(&docs)?, k)?;
        Ok(FittedEncoder::Lsa { base, projection })
    };
    match spec {
        EncoderSpec::Count => Ok(FittedEncoder::Bow(BagOfWords::fit_count(train))),
        EncoderSpec::Tfidf => Ok(FittedEncoder::Bow(BagOfWords::fit_tfidf(train))),
        EncoderSpec::CountLsa { rank } => lsa(BagOfWords::fit_count(train), *rank),
        EncoderSpec::TfidfLsa { rank } => lsa(BagOfWords::fit_tfidf(train), *rank),
        EncoderSpec::SgnsAvg(cfg) => Ok(FittedEncoder::Average {
            table: (*resources.sgns_table(train, cfg)?).clone(),
            idf: None,
        }),
        EncoderSpec::SgnsIdfAvg(cfg) => Ok(FittedEncoder::Average {
            table: (*resources.sgns_table(train, cfg)?).clone(),
            idf: Some(tfidf_fit(train)),
        }),
        EncoderSpec::ExternalSentence => Ok(FittedEncoder::Sentence {
            table: resources
                .external_sentences
                .as_deref()
                .ok_or_else(|| Error::arg("external sentence vectors not provided"))?
                .clone(),
        }),
        EncoderSpec::ExternalWordAvg => Ok(FittedEncoder::Average {
            table: resources.words()?.clone(),
            idf: None,
        }),
        EncoderSpec::ExternalWordIdfAvg => Ok(FittedEncoder::Average {
            table: resources.words()?.clone(),
            idf: Some(tfidf_fit(train)),
        }),
    }
}

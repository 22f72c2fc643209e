//! Corpus ingestion, tokenization, vocabularies, stratified splits and the
//! synthetic code-mix generator.

mod codemix;
mod dataset;
mod order;
mod split;
mod tokenize;
mod vocab;

pub use codemix::{generate_codemix, INTENTS};
pub use dataset::{load_dataset, LabeledDataset, Record, Utterance};
pub use order::{generate_order_task, A_FIRST, B_FIRST};
pub use split::{stratified_indices, stratified_split, stratified_test_counts};
pub use tokenize::{normalize_text, tokenize};
pub use vocab::{build_vocabulary, Vocabulary};

//! Evaluation, grid specifications, the grid runner and saved pipelines.

mod eval;
mod grid;
mod pipeline;
mod spec;

pub use eval::{evaluate, macro_f1_indices, EvalReport};
pub use grid::{run_grid, sha256_hex, CellScore, GridCell, GridReport, ScoreTable, MANIFEST_FILE, TOOL_VERSION};
pub use pipeline::{fit_pipeline, Pipeline, PipelineBody, ARTIFACT_FORMAT, ARTIFACT_VERSION};
pub use spec::{
    default_split_seed, format_classifier, format_embedding_source, format_encoder, format_grid_spec,
    format_recurrent, parse_classifier, parse_embedding_source, parse_encoder, parse_grid_spec,
    parse_grid_spec_str, parse_recurrent, DatasetSource, EmbeddingSource, GridSpec, NamedClassifier,
    NamedEmbedding, NamedEncoder, NamedRecurrent, DEFAULT_PER_INTENT, DEFAULT_TEST_FRACTION,
};

//! Command layer: run specs, config files, run directories with hashed
//! manifests, per-field and per-bucket reports, and the end-to-end
//! commands the `vrk` binary dispatches to.

mod commands;
mod config;
mod manifest;
mod predictions;
mod reports;
mod runspec;

pub use commands::{build_corpus, evaluate_checkpoint, run, RunSummary};
pub use config::{BuildConfig, PipelineConfig, SyntheticSpec, CONFIG_VERSION};
pub use manifest::{hash_bytes, hash_file, FileHash, RunDir, RunManifest};
pub use predictions::{join_predictions, parse_predictions, Prediction};
pub use reports::{
    attach_length_buckets, attach_ocr_coverage, bucket_rows_to_csv, field_report_to_csv,
    report_by_bucket, report_by_field, BucketRow, Bucketer, FieldReport, FieldRow,
};
pub use runspec::{Command, RunSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("config {path}: {message}")]
    Config { path: String, message: String },

    #[error("config version {got} is not supported (expected {expected})")]
    Version { got: u32, expected: u32 },

    #[error("field scope must not be empty")]
    EmptyFieldScope,

    #[error("ablation flags are only valid for train, eval, and ablate runs")]
    AblationFlagsNotApplicable,

    #[error("{command} requires {what}")]
    MissingInput {
        command: &'static str,
        what: &'static str,
    },

    #[error("predictions line {line}: {message}")]
    MalformedPrediction { line: usize, message: String },

    #[error(
        "{count} gold records have no prediction (first: image {image_id}, question {question:?})"
    )]
    MissingPredictions {
        count: usize,
        image_id: String,
        question: String,
    },

    #[error("bucketer {bucketer} requires metadata key {key:?} on every pair")]
    MissingBucketMetadata {
        bucketer: &'static str,
        key: &'static str,
    },

    #[error("no evaluation pairs after joining and scoping")]
    NoPairs,

    #[error(transparent)]
    Data(#[from] crate::data::DataError),

    #[error(transparent)]
    Forge(#[from] crate::forge::ForgeError),

    #[error(transparent)]
    Model(#[from] crate::model::ModelError),

    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

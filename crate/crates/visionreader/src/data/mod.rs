//! Shared domain types: QA records, book metadata, per-image feature
//! bundles, deterministic splits, and the word-level vocabulary.

mod bundle;
mod jsonl;
mod record;
mod split;
mod text;
mod vocab;

pub use bundle::{
    parse_bundles, read_bundles, sort_reading_order, write_bundles, ImageFeatureBundle,
    ObjectRegion, OcrToken,
};
pub use jsonl::{load_dataset, parse_records, save_dataset};
pub use record::{BookMetadata, Category, QARecord, Split, CATEGORIES};
pub use split::assign_splits;
pub use text::{detokenize, normalize_answer, tokenize};
pub use vocab::{build_vocabulary, Vocabulary, BOS_ID, EOS_ID, PAD_ID, SEP_ID, UNK_ID};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: {field} must be non-empty")]
    EmptyField { line: usize, field: &'static str },

    #[error("image {image_id} appears in more than one split")]
    SplitConflict { image_id: String },

    #[error("split ratios must sum to 1 (got {sum})")]
    BadRatios { sum: f64 },

    #[error("image ids must be non-empty and duplicate-free (duplicate: {id})")]
    DuplicateId { id: String },

    #[error("no image ids to split")]
    NoIds,

    #[error("train split is empty; cannot build a vocabulary")]
    EmptyTrainSplit,

    #[error("bbox invalid: {0}")]
    BadBbox(String),

    #[error("{context}: expected dimension {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

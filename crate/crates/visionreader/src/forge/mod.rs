//! Semi-automatic corpus construction: metadata cleaning, the question
//! template bank, QA synthesis per field, and corpus statistics.

mod clean;
mod generate;
mod ingest;
mod stats;
mod templates;

pub use clean::Cleaner;
pub use generate::{derive_record_seed, generate_qa};
pub use ingest::{load_metadata, parse_metadata};
pub use stats::{bucket_by_length, compute_stats, CorpusStats, LengthBucket, LengthField};
pub use templates::{parse_template_bank, QuestionTemplate, TemplateBank};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("template bank line {line}: {message}")]
    MalformedTemplate { line: usize, message: String },

    #[error("no templates for category {category}")]
    MissingTemplates { category: crate::data::Category },

    #[error("metadata line {line}: {message}")]
    MalformedMetadata { line: usize, message: String },

    #[error("invalid extraneous pattern {pattern:?}: {message}")]
    BadPattern { pattern: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

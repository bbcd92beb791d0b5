//! Multimodal input assembly: bounding-box normalization, linear
//! projections of object / OCR / grid features into the model dimension,
//! token embedding of question + OCR text, and concatenation into the
//! encoder input.
//!
//! All projections are bias-free, so every embedding here is linear in its
//! inputs. Visual tokens carry position only through their projected
//! bounding boxes.

mod embed;
mod params;
mod synthetic;

pub use embed::{
    embed_example, embed_grid, embed_objects, embed_ocr, embed_text, fuse, fusion_backward,
    normalize_bbox, AblationFlags, EmbeddedExample, FusedInput, SegmentSpans,
};
pub use params::{FusionConfig, FusionParams};
pub use synthetic::{synthetic_dataset, SyntheticProvider};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("{what}: expected dimension {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("bbox precondition violated: {0}")]
    Bbox(String),

    #[error("question must contain at least one token")]
    EmptyQuestion,

    #[error("segment width {got} does not match model dimension {expected}")]
    Width { expected: usize, got: usize },
}

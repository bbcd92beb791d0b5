//! Desk-scale OCR visual question answering over book covers: dataset
//! construction from listing metadata, multimodal feature fusion into a
//! small transformer encoder-decoder, token-level evaluation metrics, and
//! the analysis harnesses (ablations, buckets, data-fraction sweeps) that
//! go with them.

pub mod analysis;
pub mod data;
pub mod forge;
pub mod fusion;
pub mod math;
pub mod metrics;
pub mod model;

//! The encoder-decoder itself: multi-head attention, post-norm residual
//! blocks, teacher-forced training with early stopping, greedy decoding,
//! and checkpointing.
//!
//! Everything runs in f64 with hand-written backward passes; the gradient
//! test suite checks every parameter tensor against central finite
//! differences, so keep forward and backward in lockstep when touching
//! either.

mod attention;
mod checkpoint;
mod greedy;
mod layers;
mod network;
mod params;
mod sweep;
mod trainer;

pub use attention::{
    mha_backward, mha_forward, multi_head_attention, AttentionCache, AttentionMask, AttentionParams,
};
pub use checkpoint::{Checkpoint, RngState, CHECKPOINT_FORMAT};
pub use greedy::{answer_question, greedy_decode};
pub use layers::{FeedForwardParams, LayerNormParams};
pub use network::{
    cross_entropy_loss, decode_step, decoder_logits, embed_prefix, encode, encode_masked,
    example_loss, example_loss_and_grads, pipeline_loss, positional_encoding, TrainMode,
};
pub use params::{DecoderLayerParams, EncoderLayerParams, ModelParams};
pub use sweep::{nested_train_subsets, run_data_fraction_sweep, FractionOutcome};
pub use trainer::{
    evaluate_split, train, EarlyStopper, EpochStats, StopDecision, TrainData, TrainOutcome,
    TrainSchedule, TrainState,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{what}: expected {expected}, got {got}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{which} split is empty")]
    EmptySplit { which: &'static str },

    #[error("no feature bundle for image {0}")]
    MissingBundle(String),

    #[error("fraction {0} leaves no training images")]
    EmptyFraction(f64),

    #[error("fractions must lie in (0, 1], got {0}")]
    BadFraction(f64),

    #[error("checkpoint rejected: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Fusion(#[from] crate::fusion::FusionError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Architecture hyperparameters for the tiny encoder-decoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_encoder_layers: usize,
    pub n_decoder_layers: usize,
    pub ffn_hidden: usize,
    pub dropout: f64,
    pub max_decode_len: usize,
    pub seed: u64,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.d_model == 0 || self.n_heads == 0 {
            return Err(ModelError::Config(
                "d_model and n_heads must be at least 1".into(),
            ));
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return Err(ModelError::Config(format!(
                "d_model {} is not divisible by n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ModelError::Config(format!(
                "dropout must lie in [0, 1), got {}",
                self.dropout
            )));
        }
        if self.ffn_hidden == 0 {
            return Err(ModelError::Config("ffn_hidden must be at least 1".into()));
        }
        if self.max_decode_len == 0 {
            return Err(ModelError::Config(
                "max_decode_len must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }
}

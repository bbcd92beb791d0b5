use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ModelConfig, ModelError, ModelParams};
use crate::data::Vocabulary;
use crate::fusion::FusionConfig;
use crate::math::Matrix;

pub const CHECKPOINT_FORMAT: &str = "visionreader-ckpt-v1";

/// Serializable snapshot of a seeded rng stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    /// u128 word position, stored as a decimal string.
    pub word_pos: String,
    pub stream: String,
}

impl RngState {
    pub fn fresh(seed: u64) -> Self {
        Self {
            seed,
            word_pos: "0".to_owned(),
            stream: "0".to_owned(),
        }
    }

    pub fn restore(&self) -> Result<ChaCha8Rng, ModelError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let pos: u128 = self
            .word_pos
            .parse()
            .map_err(|_| ModelError::Checkpoint(format!("bad rng word_pos {:?}", self.word_pos)))?;
        let stream: u64 = self
            .stream
            .parse()
            .map_err(|_| ModelError::Checkpoint(format!("bad rng stream {:?}", self.stream)))?;
        rng.set_stream(stream);
        rng.set_word_pos(pos);
        Ok(rng)
    }
}

/// Self-describing training artifact: configs, vocabulary, every parameter
/// tensor as a named array, and the trainer's rng state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub model_config: ModelConfig,
    pub fusion_config: FusionConfig,
    pub vocabulary: Vocabulary,
    pub tensors: BTreeMap<String, Matrix>,
    pub rng: RngState,
}

impl Checkpoint {
    pub fn new(
        model_config: ModelConfig,
        fusion_config: FusionConfig,
        vocabulary: Vocabulary,
        params: &ModelParams,
        rng: RngState,
    ) -> Self {
        let tensors = params
            .named_tensors()
            .into_iter()
            .map(|(name, tensor)| (name, tensor.clone()))
            .collect();
        Self {
            format: CHECKPOINT_FORMAT.to_owned(),
            model_config,
            fusion_config,
            vocabulary,
            tensors,
            rng,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serialization cannot fail")
    }

    /// Parses and validates a checkpoint: header string, config sanity,
    /// and a tensor set that exactly matches the declared architecture.
    pub fn from_json_slice(bytes: &[u8]) -> Result<Self, ModelError> {
        let checkpoint: Checkpoint =
            serde_json::from_slice(bytes).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        if checkpoint.format != CHECKPOINT_FORMAT {
            return Err(ModelError::Checkpoint(format!(
                "unsupported format {:?}, expected {CHECKPOINT_FORMAT:?}",
                checkpoint.format
            )));
        }
        checkpoint.model_config.validate()?;
        checkpoint
            .fusion_config
            .validate()
            .map_err(ModelError::Config)?;
        if checkpoint.model_config.d_model != checkpoint.fusion_config.d_model {
            return Err(ModelError::Checkpoint(format!(
                "model d_model {} disagrees with fusion d_model {}",
                checkpoint.model_config.d_model, checkpoint.fusion_config.d_model
            )));
        }
        // Surface shape problems now rather than on first use.
        checkpoint.params()?;
        Ok(checkpoint)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let bytes = fs::read(path)?;
        Self::from_json_slice(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Reassembles parameters from the named tensors, verifying that the
    /// set of names and every shape match the configs.
    pub fn params(&self) -> Result<ModelParams, ModelError> {
        let mut params = ModelParams::init(
            &self.model_config,
            &self.fusion_config,
            self.vocabulary.len(),
        );
        let expected: Vec<String> = params
            .named_tensors()
            .into_iter()
            .map(|(name, _)| name)
            .collect();
        if expected.len() != self.tensors.len() {
            return Err(ModelError::Checkpoint(format!(
                "checkpoint holds {} tensors, architecture needs {}",
                self.tensors.len(),
                expected.len()
            )));
        }
        for (name, slot) in params.named_tensors_mut() {
            let stored = self
                .tensors
                .get(&name)
                .ok_or_else(|| ModelError::Checkpoint(format!("missing tensor {name:?}")))?;
            if (stored.rows(), stored.cols()) != (slot.rows(), slot.cols()) {
                return Err(ModelError::Checkpoint(format!(
                    "tensor {name:?} has shape {}x{}, expected {}x{}",
                    stored.rows(),
                    stored.cols(),
                    slot.rows(),
                    slot.cols()
                )));
            }
            if !stored.is_finite() {
                return Err(ModelError::Checkpoint(format!(
                    "tensor {name:?} contains a non-finite value"
                )));
            }
            *slot = stored.clone();
        }
        Ok(params)
    }
}

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::fusion::FusionConfig;
use crate::model::{ModelConfig, TrainSchedule};

pub const CONFIG_VERSION: u32 = 1;

fn check_version(path: &Path, version: u32) -> Result<(), AnalysisError> {
    if version != CONFIG_VERSION {
        return Err(AnalysisError::Version {
            got: version,
            expected: CONFIG_VERSION,
        });
    }
    let _ = path;
    Ok(())
}

fn default_min_count() -> usize {
    1
}

fn default_synthetic_images() -> usize {
    40
}

/// Generates a corpus and features from the deterministic provider
/// instead of ingesting metadata files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    #[serde(default = "default_synthetic_images")]
    pub images: usize,
    #[serde(default)]
    pub seed: u64,
    /// 1 makes every title a single token; 2 mixes in two-word titles.
    #[serde(default = "default_title_words")]
    pub max_title_words: usize,
}

fn default_title_words() -> usize {
    2
}

/// Config for `build`: either pre-collected metadata or a synthetic world.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildConfig {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
    /// Template bank path; the bundled bank when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<PathBuf>,
    pub ratios: (f64, f64, f64),
    #[serde(default)]
    pub seed: u64,
    /// Fusion dims drive the synthetic provider's feature shapes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fusion: Option<FusionConfig>,
}

impl BuildConfig {
    pub fn parse(path: &Path, text: &str) -> Result<Self, AnalysisError> {
        let config: BuildConfig =
            serde_json::from_str(text).map_err(|e| AnalysisError::Config {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        check_version(path, config.version)?;
        if config.meta.is_none() && config.synthetic.is_none() {
            return Err(AnalysisError::Config {
                path: path.display().to_string(),
                message: "either meta or synthetic must be given".into(),
            });
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, AnalysisError> {
        let text = fs::read_to_string(path)?;
        Self::parse(path, &text)
    }
}

/// Config for `train`, `eval`, `ablate`, and `sweep`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub version: u32,
    /// Dataset JSONL.
    pub data: PathBuf,
    /// Feature bundle JSONL; absent means the synthetic provider serves
    /// features for every image id in the dataset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundles: Option<PathBuf>,
    #[serde(default)]
    pub synthetic_seed: u64,
    #[serde(default = "default_min_count")]
    pub min_count: usize,
    pub model: ModelConfig,
    pub fusion: FusionConfig,
    #[serde(default)]
    pub schedule: TrainSchedule,
    /// Checkpoint to evaluate; `eval` requires it unless gold/pred files
    /// are being compared directly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn parse(path: &Path, text: &str) -> Result<Self, AnalysisError> {
        let config: PipelineConfig =
            serde_json::from_str(text).map_err(|e| AnalysisError::Config {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        check_version(path, config.version)?;
        config.model.validate().map_err(AnalysisError::Model)?;
        config
            .fusion
            .validate()
            .map_err(|message| AnalysisError::Config {
                path: path.display().to_string(),
                message,
            })?;
        if config.model.d_model != config.fusion.d_model {
            return Err(AnalysisError::Config {
                path: path.display().to_string(),
                message: format!(
                    "model d_model {} disagrees with fusion d_model {}",
                    config.model.d_model, config.fusion.d_model
                ),
            });
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, AnalysisError> {
        let text = fs::read_to_string(path)?;
        Self::parse(path, &text)
    }
}

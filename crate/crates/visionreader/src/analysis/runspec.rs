use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::reports::Bucketer;
use super::AnalysisError;
use crate::data::{Category, Split, CATEGORIES};
use crate::fusion::AblationFlags;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Build,
    Train,
    Eval,
    Ablate,
    Sweep,
    Report,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::Train => "train",
            Command::Eval => "eval",
            Command::Ablate => "ablate",
            Command::Sweep => "sweep",
            Command::Report => "report",
        }
    }
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A fully resolved run request. The default field scope is every
/// category except genre; genre-only evaluation is a separate run with
/// `field_scope = [genre]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSpec {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PathBuf>,
    /// Overrides every seed in the config when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub ablation: AblationFlags,
    pub field_scope: Vec<Category>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fractions: Option<Vec<f64>>,
    /// Which split `eval` decodes.
    #[serde(default = "default_eval_split")]
    pub eval_split: Split,
    /// Gold / prediction files for file-mode eval and report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pred: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bucketer: Option<Bucketer>,
    #[serde(default)]
    pub literal_eq9: bool,
    #[serde(default)]
    pub no_normalize: bool,
    /// Output root; `VRK_RUN_DIR` overrides, then the current directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_root: Option<PathBuf>,
}

fn default_eval_split() -> Split {
    Split::Test
}

pub fn default_field_scope() -> Vec<Category> {
    vec![
        Category::Title,
        Category::Author,
        Category::Publisher,
        Category::Translator,
    ]
}

impl RunSpec {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            config: None,
            seed: None,
            ablation: AblationFlags::default(),
            field_scope: default_field_scope(),
            fractions: None,
            eval_split: Split::Test,
            gold: None,
            pred: None,
            checkpoint: None,
            bucketer: None,
            literal_eq9: false,
            no_normalize: false,
            out_root: None,
        }
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.field_scope.is_empty() {
            return Err(AnalysisError::EmptyFieldScope);
        }
        let ablated = self.ablation.no_object || self.ablation.no_ocr;
        if ablated
            && !matches!(
                self.command,
                Command::Train | Command::Eval | Command::Ablate
            )
        {
            return Err(AnalysisError::AblationFlagsNotApplicable);
        }
        for category in &self.field_scope {
            debug_assert!(CATEGORIES.contains(category));
        }
        Ok(())
    }
}

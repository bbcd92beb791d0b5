use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::math::Matrix;

fn default_share_box() -> bool {
    true
}

/// Source feature dimensions and the target model dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub d_model: usize,
    pub f_obj: usize,
    pub f_det: usize,
    pub f_rec: usize,
    pub f_grid: usize,
    /// Cap on the token-embedded text sequence (question ⊕ sep ⊕ OCR text).
    pub max_text_len: usize,
    pub seed: u64,
    /// Project object and OCR boxes through one shared matrix. Box
    /// normalization already puts both on the same footing; flip this off
    /// for separate projections.
    #[serde(default = "default_share_box")]
    pub share_box_projection: bool,
}

impl FusionConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("d_model", self.d_model),
            ("f_obj", self.f_obj),
            ("f_det", self.f_det),
            ("f_rec", self.f_rec),
            ("f_grid", self.f_grid),
            ("max_text_len", self.max_text_len),
        ] {
            if v == 0 {
                return Err(format!("{name} must be at least 1"));
            }
        }
        Ok(())
    }
}

/// Learnable projections feeding the encoder, plus the token embedding
/// table shared by the text segment and the decoder input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionParams {
    pub w_obj: Matrix,
    pub w_box: Matrix,
    /// Separate OCR box projection; `None` when the config shares `w_box`.
    pub w_box_ocr: Option<Matrix>,
    pub w_det: Matrix,
    pub w_rec: Matrix,
    pub w_grid: Matrix,
    pub token_embedding: Matrix,
}

impl FusionParams {
    /// Seeded uniform init in `[-1/sqrt(d), 1/sqrt(d)]`.
    pub fn init(config: &FusionConfig, vocab_size: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let bound = 1.0 / (config.d_model as f64).sqrt();
        let d = config.d_model;
        let mut mat = |rows: usize, cols: usize| {
            Matrix::from_fn(rows, cols, |_, _| rng.random_range(-bound..bound))
        };
        FusionParams {
            w_obj: mat(config.f_obj, d),
            w_box: mat(4, d),
            w_box_ocr: if config.share_box_projection {
                None
            } else {
                Some(mat(4, d))
            },
            w_det: mat(config.f_det, d),
            w_rec: mat(config.f_rec, d),
            w_grid: mat(config.f_grid, d),
            token_embedding: mat(vocab_size, d),
        }
    }

    pub fn zeros_like(&self) -> Self {
        FusionParams {
            w_obj: self.w_obj.zeros_like(),
            w_box: self.w_box.zeros_like(),
            w_box_ocr: self.w_box_ocr.as_ref().map(Matrix::zeros_like),
            w_det: self.w_det.zeros_like(),
            w_rec: self.w_rec.zeros_like(),
            w_grid: self.w_grid.zeros_like(),
            token_embedding: self.token_embedding.zeros_like(),
        }
    }

    /// The matrix projecting OCR boxes: shared or separate.
    pub fn ocr_box_projection(&self) -> &Matrix {
        self.w_box_ocr.as_ref().unwrap_or(&self.w_box)
    }

    pub fn named_tensors(&self) -> Vec<(String, &Matrix)> {
        let mut out = vec![
            ("fusion.w_obj".to_owned(), &self.w_obj),
            ("fusion.w_box".to_owned(), &self.w_box),
            ("fusion.w_det".to_owned(), &self.w_det),
            ("fusion.w_rec".to_owned(), &self.w_rec),
            ("fusion.w_grid".to_owned(), &self.w_grid),
            ("fusion.token_embedding".to_owned(), &self.token_embedding),
        ];
        if let Some(w) = &self.w_box_ocr {
            out.push(("fusion.w_box_ocr".to_owned(), w));
        }
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        let mut out = vec![
            ("fusion.w_obj".to_owned(), &mut self.w_obj),
            ("fusion.w_box".to_owned(), &mut self.w_box),
            ("fusion.w_det".to_owned(), &mut self.w_det),
            ("fusion.w_rec".to_owned(), &mut self.w_rec),
            ("fusion.w_grid".to_owned(), &mut self.w_grid),
            (
                "fusion.token_embedding".to_owned(),
                &mut self.token_embedding,
            ),
        ];
        if let Some(w) = &mut self.w_box_ocr {
            out.push(("fusion.w_box_ocr".to_owned(), w));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny_config() -> FusionConfig {
        FusionConfig {
            d_model: 8,
            f_obj: 6,
            f_det: 5,
            f_rec: 5,
            f_grid: 7,
            max_text_len: 16,
            seed: 42,
            share_box_projection: true,
        }
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let config = tiny_config();
        let a = FusionParams::init(&config, 12);
        let b = FusionParams::init(&config, 12);
        assert_eq!(a, b);
        let bound = 1.0 / (config.d_model as f64).sqrt();
        for (_, tensor) in a.named_tensors() {
            assert!(tensor.data().iter().all(|v| v.abs() <= bound));
        }
    }

    #[test]
    fn separate_box_projection_adds_a_tensor() {
        let mut config = tiny_config();
        config.share_box_projection = false;
        let params = FusionParams::init(&config, 12);
        assert!(params.w_box_ocr.is_some());
        assert_eq!(params.named_tensors().len(), 7);
        assert_ne!(params.ocr_box_projection(), &params.w_box);
    }

    #[test]
    fn config_rejects_zero_dimensions() {
        let mut config = tiny_config();
        config.f_grid = 0;
        assert!(config.validate().is_err());
    }
}

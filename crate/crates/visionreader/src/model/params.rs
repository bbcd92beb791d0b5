use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AttentionParams, FeedForwardParams, LayerNormParams, ModelConfig};
use crate::fusion::{FusionConfig, FusionParams};
use crate::math::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderLayerParams {
    pub self_attn: AttentionParams,
    pub ln_attn: LayerNormParams,
    pub ffn: FeedForwardParams,
    pub ln_ffn: LayerNormParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderLayerParams {
    pub self_attn: AttentionParams,
    pub ln_self: LayerNormParams,
    pub cross_attn: AttentionParams,
    pub ln_cross: LayerNormParams,
    pub ffn: FeedForwardParams,
    pub ln_ffn: LayerNormParams,
}

/// Every learnable tensor of the model: the fusion projections and token
/// embedding, the encoder and decoder stacks, and the output projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub fusion: FusionParams,
    pub encoder: Vec<EncoderLayerParams>,
    pub decoder: Vec<DecoderLayerParams>,
    /// `d_model × vocab` projection producing logits.
    pub output_proj: Matrix,
}

fn init_attention(rng: &mut ChaCha8Rng, d: usize, heads: usize, bound: f64) -> AttentionParams {
    let hd = d / heads;
    let mut mat =
        |r: usize, c: usize| Matrix::from_fn(r, c, |_, _| rng.random_range(-bound..bound));
    AttentionParams {
        w_q: (0..heads).map(|_| mat(d, hd)).collect(),
        w_k: (0..heads).map(|_| mat(d, hd)).collect(),
        w_v: (0..heads).map(|_| mat(d, hd)).collect(),
        w_o: mat(d, d),
    }
}

fn init_ffn(rng: &mut ChaCha8Rng, d: usize, hidden: usize, bound: f64) -> FeedForwardParams {
    let mut mat =
        |r: usize, c: usize| Matrix::from_fn(r, c, |_, _| rng.random_range(-bound..bound));
    FeedForwardParams {
        w1: mat(d, hidden),
        b1: Matrix::zeros(1, hidden),
        w2: mat(hidden, d),
        b2: Matrix::zeros(1, d),
    }
}

impl ModelParams {
    /// Seeded init: uniform `[-1/sqrt(d), 1/sqrt(d)]` for projections,
    /// identity layer norms, zero biases. Fusion tensors come from the
    /// fusion seed, everything else from the model seed.
    pub fn init(model: &ModelConfig, fusion: &FusionConfig, vocab_size: usize) -> Self {
        assert_eq!(
            model.d_model, fusion.d_model,
            "model and fusion dimensions must agree"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
        let d = model.d_model;
        let bound = 1.0 / (d as f64).sqrt();
        let encoder = (0..model.n_encoder_layers)
            .map(|_| EncoderLayerParams {
                self_attn: init_attention(&mut rng, d, model.n_heads, bound),
                ln_attn: LayerNormParams::identity(d),
                ffn: init_ffn(&mut rng, d, model.ffn_hidden, bound),
                ln_ffn: LayerNormParams::identity(d),
            })
            .collect();
        let decoder = (0..model.n_decoder_layers)
            .map(|_| DecoderLayerParams {
                self_attn: init_attention(&mut rng, d, model.n_heads, bound),
                ln_self: LayerNormParams::identity(d),
                cross_attn: init_attention(&mut rng, d, model.n_heads, bound),
                ln_cross: LayerNormParams::identity(d),
                ffn: init_ffn(&mut rng, d, model.ffn_hidden, bound),
                ln_ffn: LayerNormParams::identity(d),
            })
            .collect();
        let output_proj = Matrix::from_fn(d, vocab_size, |_, _| rng.random_range(-bound..bound));
        ModelParams {
            fusion: FusionParams::init(fusion, vocab_size),
            encoder,
            decoder,
            output_proj,
        }
    }

    pub fn zeros_like(&self) -> Self {
        ModelParams {
            fusion: self.fusion.zeros_like(),
            encoder: self
                .encoder
                .iter()
                .map(|l| EncoderLayerParams {
                    self_attn: l.self_attn.zeros_like(),
                    ln_attn: l.ln_attn.zeros_like(),
                    ffn: l.ffn.zeros_like(),
                    ln_ffn: l.ln_ffn.zeros_like(),
                })
                .collect(),
            decoder: self
                .decoder
                .iter()
                .map(|l| DecoderLayerParams {
                    self_attn: l.self_attn.zeros_like(),
                    ln_self: l.ln_self.zeros_like(),
                    cross_attn: l.cross_attn.zeros_like(),
                    ln_cross: l.ln_cross.zeros_like(),
                    ffn: l.ffn.zeros_like(),
                    ln_ffn: l.ln_ffn.zeros_like(),
                })
                .collect(),
            output_proj: self.output_proj.zeros_like(),
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.output_proj.cols()
    }

    /// Every tensor with a stable dotted name, in a fixed order. The same
    /// names key the checkpoint file.
    pub fn named_tensors(&self) -> Vec<(String, &Matrix)> {
        let mut out = self.fusion.named_tensors();
        for (i, layer) in self.encoder.iter().enumerate() {
            push_attention(&mut out, format!("encoder.{i}.self_attn"), &layer.self_attn);
            push_layer_norm(&mut out, format!("encoder.{i}.ln_attn"), &layer.ln_attn);
            push_ffn(&mut out, format!("encoder.{i}.ffn"), &layer.ffn);
            push_layer_norm(&mut out, format!("encoder.{i}.ln_ffn"), &layer.ln_ffn);
        }
        for (i, layer) in self.decoder.iter().enumerate() {
            push_attention(&mut out, format!("decoder.{i}.self_attn"), &layer.self_attn);
            push_layer_norm(&mut out, format!("decoder.{i}.ln_self"), &layer.ln_self);
            push_attention(
                &mut out,
                format!("decoder.{i}.cross_attn"),
                &layer.cross_attn,
            );
            push_layer_norm(&mut out, format!("decoder.{i}.ln_cross"), &layer.ln_cross);
            push_ffn(&mut out, format!("decoder.{i}.ffn"), &layer.ffn);
            push_layer_norm(&mut out, format!("decoder.{i}.ln_ffn"), &layer.ln_ffn);
        }
        out.push(("output_proj".to_owned(), &self.output_proj));
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        let mut out = self.fusion.named_tensors_mut();
        for (i, layer) in self.encoder.iter_mut().enumerate() {
            push_attention_mut(
                &mut out,
                format!("encoder.{i}.self_attn"),
                &mut layer.self_attn,
            );
            push_layer_norm_mut(&mut out, format!("encoder.{i}.ln_attn"), &mut layer.ln_attn);
            push_ffn_mut(&mut out, format!("encoder.{i}.ffn"), &mut layer.ffn);
            push_layer_norm_mut(&mut out, format!("encoder.{i}.ln_ffn"), &mut layer.ln_ffn);
        }
        for (i, layer) in self.decoder.iter_mut().enumerate() {
            push_attention_mut(
                &mut out,
                format!("decoder.{i}.self_attn"),
                &mut layer.self_attn,
            );
            push_layer_norm_mut(&mut out, format!("decoder.{i}.ln_self"), &mut layer.ln_self);
            push_attention_mut(
                &mut out,
                format!("decoder.{i}.cross_attn"),
                &mut layer.cross_attn,
            );
            push_layer_norm_mut(
                &mut out,
                format!("decoder.{i}.ln_cross"),
                &mut layer.ln_cross,
            );
            push_ffn_mut(&mut out, format!("decoder.{i}.ffn"), &mut layer.ffn);
            push_layer_norm_mut(&mut out, format!("decoder.{i}.ln_ffn"), &mut layer.ln_ffn);
        }
        out.push(("output_proj".to_owned(), &mut self.output_proj));
        out
    }

    pub fn n_scalars(&self) -> usize {
        self.named_tensors().iter().map(|(_, t)| t.len()).sum()
    }
}

fn push_attention<'a>(out: &mut Vec<(String, &'a Matrix)>, prefix: String, p: &'a AttentionParams) {
    for (h, m) in p.w_q.iter().enumerate() {
        out.push((format!("{prefix}.w_q.{h}"), m));
    }
    for (h, m) in p.w_k.iter().enumerate() {
        out.push((format!("{prefix}.w_k.{h}"), m));
    }
    for (h, m) in p.w_v.iter().enumerate() {
        out.push((format!("{prefix}.w_v.{h}"), m));
    }
    out.push((format!("{prefix}.w_o"), &p.w_o));
}

fn push_attention_mut<'a>(
    out: &mut Vec<(String, &'a mut Matrix)>,
    prefix: String,
    p: &'a mut AttentionParams,
) {
    for (h, m) in p.w_q.iter_mut().enumerate() {
        out.push((format!("{prefix}.w_q.{h}"), m));
    }
    for (h, m) in p.w_k.iter_mut().enumerate() {
        out.push((format!("{prefix}.w_k.{h}"), m));
    }
    for (h, m) in p.w_v.iter_mut().enumerate() {
        out.push((format!("{prefix}.w_v.{h}"), m));
    }
    out.push((format!("{prefix}.w_o"), &mut p.w_o));
}

fn push_layer_norm<'a>(
    out: &mut Vec<(String, &'a Matrix)>,
    prefix: String,
    p: &'a LayerNormParams,
) {
    out.push((format!("{prefix}.gain"), &p.gain));
    out.push((format!("{prefix}.bias"), &p.bias));
}

fn push_layer_norm_mut<'a>(
    out: &mut Vec<(String, &'a mut Matrix)>,
    prefix: String,
    p: &'a mut LayerNormParams,
) {
    out.push((format!("{prefix}.gain"), &mut p.gain));
    out.push((format!("{prefix}.bias"), &mut p.bias));
}

fn push_ffn<'a>(out: &mut Vec<(String, &'a Matrix)>, prefix: String, p: &'a FeedForwardParams) {
    out.push((format!("{prefix}.w1"), &p.w1));
    out.push((format!("{prefix}.b1"), &p.b1));
    out.push((format!("{prefix}.w2"), &p.w2));
    out.push((format!("{prefix}.b2"), &p.b2));
}

fn push_ffn_mut<'a>(
    out: &mut Vec<(String, &'a mut Matrix)>,
    prefix: String,
    p: &'a mut FeedForwardParams,
) {
    out.push((format!("{prefix}.w1"), &mut p.w1));
    out.push((format!("{prefix}.b1"), &mut p.b1));
    out.push((format!("{prefix}.w2"), &mut p.w2));
    out.push((format!("{prefix}.b2"), &mut p.b2));
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub fn micro_model_config() -> ModelConfig {
        ModelConfig {
            d_model: 8,
            n_heads: 2,
            n_encoder_layers: 1,
            n_decoder_layers: 1,
            ffn_hidden: 12,
            dropout: 0.0,
            max_decode_len: 6,
            seed: 17,
        }
    }

    pub fn micro_fusion_config() -> FusionConfig {
        FusionConfig {
            d_model: 8,
            f_obj: 6,
            f_det: 5,
            f_rec: 5,
            f_grid: 7,
            max_text_len: 12,
            seed: 23,
            share_box_projection: true,
        }
    }
}

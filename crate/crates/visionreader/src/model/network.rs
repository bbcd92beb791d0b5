use rand_chacha::ChaCha8Rng;

use super::attention::{mha_backward, mha_forward, AttentionCache, AttentionMask};
use super::layers::{
    dropout_backward, dropout_forward, feed_forward, feed_forward_backward, layer_norm_backward,
    layer_norm_forward, DropoutMask, FeedForwardCache, LayerNormCache,
};
use super::{DecoderLayerParams, EncoderLayerParams, ModelError, ModelParams};
use crate::data::{BOS_ID, EOS_ID, PAD_ID};
use crate::fusion::{fusion_backward, EmbeddedExample};
use crate::math::Matrix;

/// Whether a pass is collecting dropout noise or running deterministically.
pub enum TrainMode<'a> {
    Eval,
    Train {
        dropout: f64,
        rng: &'a mut ChaCha8Rng,
    },
}

/// Sinusoidal position encodings for the decoder input. The fused encoder
/// input carries position through bounding boxes instead, so this is only
/// used on the target side.
pub fn positional_encoding(len: usize, d: usize) -> Matrix {
    Matrix::from_fn(len, d, |pos, c| {
        let i = (c / 2) as f64;
        let angle = pos as f64 / 10000f64.powf(2.0 * i / d as f64);
        if c % 2 == 0 {
            angle.sin()
        } else {
            angle.cos()
        }
    })
}

/// Token embedding plus position encoding for a decoder prefix.
pub fn embed_prefix(ids: &[usize], token_embedding: &Matrix) -> Matrix {
    let d = token_embedding.cols();
    let pos = positional_encoding(ids.len(), d);
    Matrix::from_fn(ids.len(), d, |r, c| {
        token_embedding.get(ids[r], c) + pos.get(r, c)
    })
}

pub(crate) struct EncoderLayerCache {
    input: Matrix,
    attn: AttentionCache,
    drop_attn: DropoutMask,
    ln_attn: LayerNormCache,
    ffn: FeedForwardCache,
    drop_ffn: DropoutMask,
    ln_ffn: LayerNormCache,
}

pub(crate) fn encoder_forward(
    x: &Matrix,
    layers: &[EncoderLayerParams],
    dropout: f64,
    mut rng: Option<&mut ChaCha8Rng>,
    key_mask: Option<&AttentionMask>,
) -> Result<(Matrix, Vec<EncoderLayerCache>), ModelError> {
    let mut current = x.clone();
    let mut caches = Vec::with_capacity(layers.len());
    for layer in layers {
        let (attn_out, attn_cache) =
            mha_forward(&current, &current, &current, &layer.self_attn, key_mask)?;
        let (attn_dropped, drop_attn) = dropout_forward(&attn_out, dropout, rng.as_deref_mut());
        let residual1 = current.add(&attn_dropped);
        let (h1, ln_attn) = layer_norm_forward(&residual1, &layer.ln_attn);

        let (ffn_out, ffn_cache) = feed_forward(&h1, &layer.ffn);
        let (ffn_dropped, drop_ffn) = dropout_forward(&ffn_out, dropout, rng.as_deref_mut());
        let residual2 = h1.add(&ffn_dropped);
        let (out, ln_ffn) = layer_norm_forward(&residual2, &layer.ln_ffn);

        caches.push(EncoderLayerCache {
            input: current,
            attn: attn_cache,
            drop_attn,
            ln_attn,
            ffn: ffn_cache,
            drop_ffn,
            ln_ffn,
        });
        current = out;
    }
    Ok((current, caches))
}

pub(crate) fn encoder_backward(
    d_out: &Matrix,
    caches: &[EncoderLayerCache],
    layers: &[EncoderLayerParams],
    grads: &mut [EncoderLayerParams],
) -> Matrix {
    let mut d_current = d_out.clone();
    for ((layer, cache), grad) in layers.iter().zip(caches).zip(grads.iter_mut()).rev() {
        let d_residual2 =
            layer_norm_backward(&d_current, &cache.ln_ffn, &layer.ln_ffn, &mut grad.ln_ffn);
        let d_ffn_dropped = d_residual2.clone();
        let mut d_h1 = d_residual2;
        let d_ffn_out = dropout_backward(&d_ffn_dropped, &cache.drop_ffn);
        d_h1.add_assign(&feed_forward_backward(
            &d_ffn_out,
            &cache.ffn,
            &layer.ffn,
            &mut grad.ffn,
        ));

        let d_residual1 =
            layer_norm_backward(&d_h1, &cache.ln_attn, &layer.ln_attn, &mut grad.ln_attn);
        let d_attn_dropped = d_residual1.clone();
        let mut d_x = d_residual1;
        let d_attn_out = dropout_backward(&d_attn_dropped, &cache.drop_attn);
        let (d_q, d_k, d_v) = mha_backward(
            &d_attn_out,
            &cache.input,
            &cache.input,
            &cache.input,
            &layer.self_attn,
            &cache.attn,
            &mut grad.self_attn,
        );
        d_x.add_assign(&d_q);
        d_x.add_assign(&d_k);
        d_x.add_assign(&d_v);
        d_current = d_x;
    }
    d_current
}

pub(crate) struct DecoderLayerCache {
    input: Matrix,
    self_attn: AttentionCache,
    drop_self: DropoutMask,
    ln_self: LayerNormCache,
    h1: Matrix,
    cross_attn: AttentionCache,
    drop_cross: DropoutMask,
    ln_cross: LayerNormCache,
    ffn: FeedForwardCache,
    drop_ffn: DropoutMask,
    ln_ffn: LayerNormCache,
}

pub(crate) fn decoder_forward(
    y: &Matrix,
    enc_out: &Matrix,
    layers: &[DecoderLayerParams],
    dropout: f64,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<(Matrix, Vec<DecoderLayerCache>), ModelError> {
    let causal = AttentionMask::Causal;
    let mut current = y.clone();
    let mut caches = Vec::with_capacity(layers.len());
    for layer in layers {
        let (self_out, self_cache) = mha_forward(
            &current,
            &current,
            &current,
            &layer.self_attn,
            Some(&causal),
        )?;
        let (self_dropped, drop_self) = dropout_forward(&self_out, dropout, rng.as_deref_mut());
        let residual1 = current.add(&self_dropped);
        let (h1, ln_self) = layer_norm_forward(&residual1, &layer.ln_self);

        let (cross_out, cross_cache) = mha_forward(&h1, enc_out, enc_out, &layer.cross_attn, None)?;
        let (cross_dropped, drop_cross) = dropout_forward(&cross_out, dropout, rng.as_deref_mut());
        let residual2 = h1.add(&cross_dropped);
        let (h2, ln_cross) = layer_norm_forward(&residual2, &layer.ln_cross);

        let (ffn_out, ffn_cache) = feed_forward(&h2, &layer.ffn);
        let (ffn_dropped, drop_ffn) = dropout_forward(&ffn_out, dropout, rng.as_deref_mut());
        let residual3 = h2.add(&ffn_dropped);
        let (out, ln_ffn) = layer_norm_forward(&residual3, &layer.ln_ffn);

        caches.push(DecoderLayerCache {
            input: current,
            self_attn: self_cache,
            drop_self,
            ln_self,
            h1,
            cross_attn: cross_cache,
            drop_cross,
            ln_cross,
            ffn: ffn_cache,
            drop_ffn,
            ln_ffn,
        });
        current = out;
    }
    Ok((current, caches))
}

/// Returns (dY, dEncOut).
pub(crate) fn decoder_backward(
    d_out: &Matrix,
    enc_out: &Matrix,
    caches: &[DecoderLayerCache],
    layers: &[DecoderLayerParams],
    grads: &mut [DecoderLayerParams],
) -> (Matrix, Matrix) {
    let mut d_current = d_out.clone();
    let mut d_enc_out = enc_out.zeros_like();
    for ((layer, cache), grad) in layers.iter().zip(caches).zip(grads.iter_mut()).rev() {
        let d_residual3 =
            layer_norm_backward(&d_current, &cache.ln_ffn, &layer.ln_ffn, &mut grad.ln_ffn);
        let mut d_h2 = d_residual3.clone();
        let d_ffn_out = dropout_backward(&d_residual3, &cache.drop_ffn);
        d_h2.add_assign(&feed_forward_backward(
            &d_ffn_out,
            &cache.ffn,
            &layer.ffn,
            &mut grad.ffn,
        ));

        let d_residual2 =
            layer_norm_backward(&d_h2, &cache.ln_cross, &layer.ln_cross, &mut grad.ln_cross);
        let mut d_h1 = d_residual2.clone();
        let d_cross_out = dropout_backward(&d_residual2, &cache.drop_cross);
        let (d_q, d_k, d_v) = mha_backward(
            &d_cross_out,
            &cache.h1,
            enc_out,
            enc_out,
            &layer.cross_attn,
            &cache.cross_attn,
            &mut grad.cross_attn,
        );
        d_h1.add_assign(&d_q);
        d_enc_out.add_assign(&d_k);
        d_enc_out.add_assign(&d_v);

        let d_residual1 =
            layer_norm_backward(&d_h1, &cache.ln_self, &layer.ln_self, &mut grad.ln_self);
        let mut d_y = d_residual1.clone();
        let d_self_out = dropout_backward(&d_residual1, &cache.drop_self);
        let (d_q, d_k, d_v) = mha_backward(
            &d_self_out,
            &cache.input,
            &cache.input,
            &cache.input,
            &layer.self_attn,
            &cache.self_attn,
            &mut grad.self_attn,
        );
        d_y.add_assign(&d_q);
        d_y.add_assign(&d_k);
        d_y.add_assign(&d_v);
        d_current = d_y;
    }
    (d_current, d_enc_out)
}

/// Deterministic encoder pass over a fused input.
pub fn encode(x: &Matrix, params: &ModelParams) -> Result<Matrix, ModelError> {
    Ok(encoder_forward(x, &params.encoder, 0.0, None, None)?.0)
}

/// Encoder pass with padding rows masked out of every attention lookup.
/// `padding[i]` marks row i of `x` as padding; such rows receive zero
/// attention weight from all queries.
pub fn encode_masked(
    x: &Matrix,
    padding: &[bool],
    params: &ModelParams,
) -> Result<Matrix, ModelError> {
    if padding.len() != x.rows() {
        return Err(ModelError::Shape {
            what: "padding mask length",
            expected: x.rows(),
            got: padding.len(),
        });
    }
    let mask = AttentionMask::KeyPadding(padding.to_vec());
    Ok(encoder_forward(x, &params.encoder, 0.0, None, Some(&mask))?.0)
}

/// Full-sequence decoder logits (one row per prefix position), eval mode.
pub fn decoder_logits(
    prefix_emb: &Matrix,
    enc_out: &Matrix,
    params: &ModelParams,
) -> Result<Matrix, ModelError> {
    let (dec_out, _) = decoder_forward(prefix_emb, enc_out, &params.decoder, 0.0, None)?;
    Ok(dec_out.matmul(&params.output_proj))
}

/// Next-token logits for the final prefix position.
pub fn decode_step(
    prefix_emb: &Matrix,
    enc_out: &Matrix,
    params: &ModelParams,
) -> Result<Vec<f64>, ModelError> {
    if prefix_emb.rows() == 0 {
        return Err(ModelError::Shape {
            what: "decoder prefix rows",
            expected: 1,
            got: 0,
        });
    }
    let logits = decoder_logits(prefix_emb, enc_out, params)?;
    Ok(logits.row(logits.rows() - 1).to_vec())
}

/// Mean cross-entropy over non-padding targets; returns the loss and the
/// gradient with respect to the logits.
pub fn cross_entropy_loss(logits: &Matrix, targets: &[usize]) -> (f64, Matrix) {
    assert_eq!(logits.rows(), targets.len(), "one target per logit row");
    let mut d_logits = logits.zeros_like();
    let valid = targets.iter().filter(|&&t| t != PAD_ID).count();
    if valid == 0 {
        return (0.0, d_logits);
    }
    let weight = 1.0 / valid as f64;
    let mut loss = 0.0;
    for (r, &target) in targets.iter().enumerate() {
        if target == PAD_ID {
            continue;
        }
        let row = logits.row(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_z = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += (log_z - row[target]) * weight;
        let dst = d_logits.row_mut(r);
        for (c, &v) in row.iter().enumerate() {
            let p = (v - log_z).exp();
            dst[c] = (p - if c == target { 1.0 } else { 0.0 }) * weight;
        }
    }
    (loss, d_logits)
}

/// Teacher-forced prefix and targets for an answer: the decoder sees
/// `[bos, a…]` and must predict `[a…, eos]`.
pub(crate) fn teacher_forcing_ids(answer_ids: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut prefix = Vec::with_capacity(answer_ids.len() + 1);
    prefix.push(BOS_ID);
    prefix.extend_from_slice(answer_ids);
    let mut targets = Vec::with_capacity(answer_ids.len() + 1);
    targets.extend_from_slice(answer_ids);
    targets.push(EOS_ID);
    (prefix, targets)
}

/// Forward-only teacher-forced loss for one embedded example. The fused
/// input must have been embedded with the same parameters, or fusion
/// gradients will not correspond; prefer [`pipeline_loss`] when parameters
/// are being perturbed.
pub fn example_loss(
    example: &EmbeddedExample,
    answer_ids: &[usize],
    params: &ModelParams,
) -> Result<f64, ModelError> {
    let (enc_out, _) = encoder_forward(&example.fused.matrix, &params.encoder, 0.0, None, None)?;
    let (prefix, targets) = teacher_forcing_ids(answer_ids);
    let y = embed_prefix(&prefix, &params.fusion.token_embedding);
    let (dec_out, _) = decoder_forward(&y, &enc_out, &params.decoder, 0.0, None)?;
    let logits = dec_out.matmul(&params.output_proj);
    Ok(cross_entropy_loss(&logits, &targets).0)
}

/// Teacher-forced loss from raw inputs: embeds with the given parameters
/// and runs the forward pass. This is the function finite-difference
/// checks should probe, since fusion parameters enter through the
/// embedding.
#[allow(clippy::too_many_arguments)]
pub fn pipeline_loss(
    question_tokens: &[String],
    bundle: &crate::data::ImageFeatureBundle,
    answer_ids: &[usize],
    vocab: &crate::data::Vocabulary,
    params: &ModelParams,
    fusion_config: &crate::fusion::FusionConfig,
    ablation: crate::fusion::AblationFlags,
) -> Result<f64, ModelError> {
    let example = crate::fusion::embed_example(
        question_tokens,
        bundle,
        vocab,
        &params.fusion,
        fusion_config,
        ablation,
    )?;
    example_loss(&example, answer_ids, params)
}

/// Teacher-forced loss plus gradients for every parameter tensor,
/// accumulated into `grads`.
pub fn example_loss_and_grads(
    example: &EmbeddedExample,
    answer_ids: &[usize],
    params: &ModelParams,
    grads: &mut ModelParams,
    mode: TrainMode<'_>,
) -> Result<f64, ModelError> {
    let (dropout, mut rng) = match mode {
        TrainMode::Eval => (0.0, None),
        TrainMode::Train { dropout, rng } => (dropout, Some(rng)),
    };

    let (enc_out, enc_caches) = encoder_forward(
        &example.fused.matrix,
        &params.encoder,
        dropout,
        rng.as_deref_mut(),
        None,
    )?;
    let (prefix, targets) = teacher_forcing_ids(answer_ids);
    let y = embed_prefix(&prefix, &params.fusion.token_embedding);
    let (dec_out, dec_caches) = decoder_forward(&y, &enc_out, &params.decoder, dropout, rng)?;
    let logits = dec_out.matmul(&params.output_proj);
    let (loss, d_logits) = cross_entropy_loss(&logits, &targets);

    grads.output_proj.add_assign(&dec_out.matmul_at(&d_logits));
    let d_dec_out = d_logits.matmul_bt(&params.output_proj);

    let (d_y, d_enc_out) = decoder_backward(
        &d_dec_out,
        &enc_out,
        &dec_caches,
        &params.decoder,
        &mut grads.decoder,
    );
    for (r, &id) in prefix.iter().enumerate() {
        let dst = grads.fusion.token_embedding.row_mut(id);
        for (d, &g) in dst.iter_mut().zip(d_y.row(r)) {
            *d += g;
        }
    }

    let d_x = encoder_backward(&d_enc_out, &enc_caches, &params.encoder, &mut grads.encoder);
    fusion_backward(&d_x, example, &mut grads.fusion);

    Ok(loss)
}

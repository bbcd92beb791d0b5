use super::network::{decode_step, embed_prefix, encode};
use super::{ModelConfig, ModelError, ModelParams};
use crate::data::{tokenize, ImageFeatureBundle, Vocabulary, BOS_ID, EOS_ID};
use crate::fusion::{embed_example, AblationFlags, EmbeddedExample, FusionConfig};

/// Greedy decoding over an already-embedded example: argmax token per
/// step until end-of-sequence or the length cap, detokenized with single
/// spaces.
pub fn greedy_decode(
    example: &EmbeddedExample,
    params: &ModelParams,
    config: &ModelConfig,
    vocab: &Vocabulary,
) -> Result<String, ModelError> {
    let enc_out = encode(&example.fused.matrix, params)?;
    let mut ids = vec![BOS_ID];
    for _ in 0..config.max_decode_len {
        let prefix = embed_prefix(&ids, &params.fusion.token_embedding);
        let logits = decode_step(&prefix, &enc_out, params)?;
        let next = argmax(&logits);
        if next == EOS_ID {
            break;
        }
        ids.push(next);
    }
    Ok(vocab.decode(&ids))
}

/// End-to-end inference for one (question, image) pair.
pub fn answer_question(
    question: &str,
    bundle: &ImageFeatureBundle,
    vocab: &Vocabulary,
    params: &ModelParams,
    model_config: &ModelConfig,
    fusion_config: &FusionConfig,
    ablation: AblationFlags,
) -> Result<String, ModelError> {
    let question_tokens = tokenize(question);
    let example = embed_example(
        &question_tokens,
        bundle,
        vocab,
        &params.fusion,
        fusion_config,
        ablation,
    )?;
    greedy_decode(&example, params, model_config, vocab)
}

/// First index of the maximum, so ties resolve deterministically.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

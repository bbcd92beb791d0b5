use std::collections::HashMap;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::greedy::greedy_decode;
use super::network::{example_loss_and_grads, TrainMode};
use super::{ModelConfig, ModelError, ModelParams, RngState};
use crate::data::{
    build_vocabulary, sort_reading_order, tokenize, ImageFeatureBundle, QARecord, Split, Vocabulary,
};
use crate::fusion::{embed_example, AblationFlags, FusionConfig};
use crate::metrics::{exact_match, token_f1, MetricOptions};

fn default_lr() -> f64 {
    3e-5
}
fn default_batch() -> usize {
    32
}
fn default_epochs() -> usize {
    50
}
fn default_patience() -> usize {
    5
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}

/// Optimization settings. Defaults follow the reference recipe: adaptive
/// moments at learning rate 3e-5, batches of 32, and patience of 5 epochs
/// without a dev exact-match improvement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSchedule {
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_epochs")]
    pub max_epochs: usize,
    #[serde(default = "default_patience")]
    pub patience: usize,
    /// Hard cap on optimizer steps, for overfit-style harnesses.
    #[serde(default)]
    pub max_steps: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        Self {
            learning_rate: default_lr(),
            batch_size: default_batch(),
            max_epochs: default_epochs(),
            patience: default_patience(),
            max_steps: None,
            seed: 0,
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
        }
    }
}

/// One training-log line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_em: f64,
    pub dev_f1: f64,
    pub seconds: f64,
}

/// Early-stopping bookkeeping plus optimizer and rng state at the moment
/// training stopped.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub step: usize,
    pub best_dev_em: f64,
    pub epochs_since_improvement: usize,
    pub moments_m: ModelParams,
    pub moments_v: ModelParams,
    pub rng: RngState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    Continue,
    Stop,
}

/// Halts after `patience` consecutive observations without a strict
/// improvement. Ties keep the earlier best.
#[derive(Debug, Clone)]
pub struct EarlyStopper {
    patience: usize,
    best: Option<f64>,
    since: usize,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: None,
            since: 0,
        }
    }

    pub fn observe(&mut self, value: f64) -> StopDecision {
        let improved = match self.best {
            None => true,
            Some(best) => value > best,
        };
        if improved {
            self.best = Some(value);
            self.since = 0;
            StopDecision::Improved
        } else {
            self.since += 1;
            if self.since >= self.patience {
                StopDecision::Stop
            } else {
                StopDecision::Continue
            }
        }
    }

    pub fn best(&self) -> Option<f64> {
        self.best
    }

    pub fn epochs_since_improvement(&self) -> usize {
        self.since
    }
}

/// Everything the trainer needs: records, a bundle per image, and the
/// vocabulary built from the train split.
#[derive(Debug, Clone)]
pub struct TrainData {
    pub records: Vec<QARecord>,
    pub bundles: HashMap<String, ImageFeatureBundle>,
    pub vocab: Vocabulary,
}

impl TrainData {
    /// Builds the vocabulary from the train split and puts every bundle's
    /// OCR tokens into reading order.
    pub fn new(
        records: Vec<QARecord>,
        bundles: Vec<ImageFeatureBundle>,
        min_count: usize,
    ) -> Result<Self, ModelError> {
        let vocab = build_vocabulary(&records, min_count)
            .map_err(|_| ModelError::EmptySplit { which: "train" })?;
        let mut map = HashMap::with_capacity(bundles.len());
        for mut bundle in bundles {
            sort_reading_order(&mut bundle.ocr);
            map.insert(bundle.image_id.clone(), bundle);
        }
        for record in &records {
            if !map.contains_key(&record.image_id) {
                return Err(ModelError::MissingBundle(record.image_id.clone()));
            }
        }
        Ok(Self {
            records,
            bundles: map,
            vocab,
        })
    }

    pub fn split(&self, split: Split) -> Vec<&QARecord> {
        self.records.iter().filter(|r| r.split == split).collect()
    }

    pub fn bundle(&self, image_id: &str) -> Result<&ImageFeatureBundle, ModelError> {
        self.bundles
            .get(image_id)
            .ok_or_else(|| ModelError::MissingBundle(image_id.to_owned()))
    }
}

/// Greedy-decodes every record and scores against gold answers.
pub fn evaluate_split(
    records: &[&QARecord],
    data: &TrainData,
    params: &ModelParams,
    model_config: &ModelConfig,
    fusion_config: &FusionConfig,
    ablation: AblationFlags,
) -> Result<(f64, f64), ModelError> {
    if records.is_empty() {
        return Ok((0.0, 0.0));
    }
    let opts = MetricOptions::default();
    let mut em_sum = 0.0;
    let mut f1_sum = 0.0;
    for record in records {
        let bundle = data.bundle(&record.image_id)?;
        let example = embed_example(
            &tokenize(&record.question),
            bundle,
            &data.vocab,
            &params.fusion,
            fusion_config,
            ablation,
        )?;
        let prediction = greedy_decode(&example, params, model_config, &data.vocab)?;
        em_sum += exact_match(&record.answer, &prediction, opts);
        f1_sum += token_f1(&record.answer, &prediction, opts).f1;
    }
    let n = records.len() as f64;
    Ok((em_sum / n, f1_sum / n))
}

/// Trained parameters and the per-epoch log. `best_params` is the
/// checkpoint with the highest dev exact match (earliest on ties);
/// `final_params` is the state when training stopped.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub best_params: ModelParams,
    pub final_params: ModelParams,
    pub history: Vec<EpochStats>,
    pub state: TrainState,
}

fn adam_step(
    params: &mut ModelParams,
    grads: &ModelParams,
    m: &mut ModelParams,
    v: &mut ModelParams,
    step: usize,
    schedule: &TrainSchedule,
) {
    let t = step as f64;
    let lr = schedule.learning_rate * (1.0 - schedule.beta2.powf(t)).sqrt()
        / (1.0 - schedule.beta1.powf(t));
    let mut p_tensors = params.named_tensors_mut();
    let g_tensors = grads.named_tensors();
    let mut m_tensors = m.named_tensors_mut();
    let mut v_tensors = v.named_tensors_mut();
    for i in 0..p_tensors.len() {
        let p = &mut p_tensors[i].1;
        let g = &g_tensors[i].1;
        let m = &mut m_tensors[i].1;
        let v = &mut v_tensors[i].1;
        for j in 0..p.len() {
            let grad = g.at(j);
            *m.at_mut(j) = schedule.beta1 * m.at(j) + (1.0 - schedule.beta1) * grad;
            *v.at_mut(j) = schedule.beta2 * v.at(j) + (1.0 - schedule.beta2) * grad * grad;
            *p.at_mut(j) -= lr * m.at(j) / (v.at(j).sqrt() + schedule.eps);
        }
    }
}

fn capture_rng(rng: &ChaCha8Rng, seed: u64) -> RngState {
    RngState {
        seed,
        word_pos: rng.get_word_pos().to_string(),
        stream: rng.get_stream().to_string(),
    }
}

/// Teacher-forced training with per-epoch dev evaluation and early
/// stopping on dev exact match.
pub fn train(
    data: &TrainData,
    model_config: &ModelConfig,
    fusion_config: &FusionConfig,
    schedule: &TrainSchedule,
    ablation: AblationFlags,
) -> Result<TrainOutcome, ModelError> {
    model_config.validate()?;
    fusion_config.validate().map_err(ModelError::Config)?;
    if schedule.batch_size == 0 {
        return Err(ModelError::Config("batch_size must be at least 1".into()));
    }
    let train_records = data.split(Split::Train);
    let dev_records = data.split(Split::Dev);
    if train_records.is_empty() {
        return Err(ModelError::EmptySplit { which: "train" });
    }
    if dev_records.is_empty() {
        return Err(ModelError::EmptySplit { which: "dev" });
    }

    let mut params = ModelParams::init(model_config, fusion_config, data.vocab.len());
    let mut m = params.zeros_like();
    let mut v = params.zeros_like();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(schedule.seed ^ 0x000D_80F0_u64);

    let mut best_params = params.clone();
    let mut stopper = EarlyStopper::new(schedule.patience);
    let mut history = Vec::new();
    let mut step = 0usize;
    let mut halted = false;

    for epoch in 1..=schedule.max_epochs {
        let start = Instant::now();
        let mut order: Vec<usize> = (0..train_records.len()).collect();
        for i in (1..order.len()).rev() {
            let j = shuffle_rng.random_range(0..=i);
            order.swap(i, j);
        }

        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        for batch in order.chunks(schedule.batch_size) {
            if schedule.max_steps.is_some_and(|cap| step >= cap) {
                halted = true;
                break;
            }
            let mut grads = params.zeros_like();
            for &idx in batch {
                let record = train_records[idx];
                let bundle = data.bundle(&record.image_id)?;
                let example = embed_example(
                    &tokenize(&record.question),
                    bundle,
                    &data.vocab,
                    &params.fusion,
                    fusion_config,
                    ablation,
                )?;
                let answer_ids = data.vocab.encode(&tokenize(&record.answer));
                let loss = example_loss_and_grads(
                    &example,
                    &answer_ids,
                    &params,
                    &mut grads,
                    TrainMode::Train {
                        dropout: model_config.dropout,
                        rng: &mut dropout_rng,
                    },
                )?;
                loss_sum += loss;
                loss_count += 1;
            }
            let scale = 1.0 / batch.len() as f64;
            for (_, tensor) in grads.named_tensors_mut() {
                for i in 0..tensor.len() {
                    *tensor.at_mut(i) *= scale;
                }
            }
            step += 1;
            adam_step(&mut params, &grads, &mut m, &mut v, step, schedule);
        }

        let (dev_em, dev_f1) = evaluate_split(
            &dev_records,
            data,
            &params,
            model_config,
            fusion_config,
            ablation,
        )?;
        history.push(EpochStats {
            epoch,
            train_loss: if loss_count > 0 {
                loss_sum / loss_count as f64
            } else {
                0.0
            },
            dev_em,
            dev_f1,
            seconds: start.elapsed().as_secs_f64(),
        });

        match stopper.observe(dev_em) {
            StopDecision::Improved => {
                best_params = params.clone();
            }
            StopDecision::Continue => {}
            StopDecision::Stop => {
                halted = true;
            }
        }
        if halted {
            break;
        }
    }

    let state = TrainState {
        step,
        best_dev_em: stopper.best().unwrap_or(0.0),
        epochs_since_improvement: stopper.epochs_since_improvement(),
        moments_m: m,
        moments_v: v,
        rng: capture_rng(&shuffle_rng, schedule.seed),
    };
    Ok(TrainOutcome {
        best_params,
        final_params: params,
        history,
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopper_halts_after_exactly_patience_flat_epochs() {
        let mut stopper = EarlyStopper::new(5);
        assert_eq!(stopper.observe(0.5), StopDecision::Improved);
        for i in 0..4 {
            assert_eq!(stopper.observe(0.5), StopDecision::Continue, "epoch {i}");
        }
        assert_eq!(stopper.observe(0.5), StopDecision::Stop);
        assert_eq!(stopper.epochs_since_improvement(), 5);
    }

    #[test]
    fn stopper_ties_keep_earlier_best() {
        let mut stopper = EarlyStopper::new(3);
        stopper.observe(0.7);
        assert_eq!(stopper.observe(0.7), StopDecision::Continue);
        assert_eq!(stopper.best(), Some(0.7));
    }

    #[test]
    fn stopper_resets_on_improvement() {
        let mut stopper = EarlyStopper::new(2);
        stopper.observe(0.1);
        assert_eq!(stopper.observe(0.05), StopDecision::Continue);
        assert_eq!(stopper.observe(0.2), StopDecision::Improved);
        assert_eq!(stopper.observe(0.2), StopDecision::Continue);
        assert_eq!(stopper.observe(0.1), StopDecision::Stop);
    }

    #[test]
    fn schedule_defaults_match_recipe() {
        let schedule = TrainSchedule::default();
        assert_eq!(schedule.learning_rate, 3e-5);
        assert_eq!(schedule.batch_size, 32);
        assert_eq!(schedule.patience, 5);
        assert_eq!(schedule.max_epochs, 50);
    }
}

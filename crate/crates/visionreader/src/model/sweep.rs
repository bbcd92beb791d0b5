use std::collections::BTreeSet;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::trainer::{evaluate_split, train, EpochStats, TrainData, TrainSchedule};
use super::{ModelConfig, ModelError};
use crate::data::Split;
use crate::fusion::{AblationFlags, FusionConfig};

/// Result of one training run at a data fraction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FractionOutcome {
    pub fraction: f64,
    pub train_images: usize,
    pub dev_em: f64,
    pub dev_f1: f64,
    pub history: Vec<EpochStats>,
}

fn floor_count(n: usize, fraction: f64) -> usize {
    let raw = n as f64 * fraction;
    let nearest = raw.round();
    if (raw - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        raw.floor() as usize
    }
}

/// Trains one model per fraction on nested train-image subsets (the 25%
/// pool is a prefix of the 50% pool, and so on), leaving dev and test
/// untouched, and reports dev scores per fraction.
pub fn run_data_fraction_sweep(
    data: &TrainData,
    fractions: &[f64],
    model_config: &ModelConfig,
    fusion_config: &FusionConfig,
    schedule: &TrainSchedule,
    ablation: AblationFlags,
) -> Result<Vec<FractionOutcome>, ModelError> {
    for &fraction in fractions {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(ModelError::BadFraction(fraction));
        }
    }
    let train_images: BTreeSet<String> = data
        .records
        .iter()
        .filter(|r| r.split == Split::Train)
        .map(|r| r.image_id.clone())
        .collect();
    if train_images.is_empty() {
        return Err(ModelError::EmptySplit { which: "train" });
    }
    let mut pool: Vec<String> = train_images.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed ^ 0x5EED_F4AC);
    for i in (1..pool.len()).rev() {
        let j = rng.random_range(0..=i);
        pool.swap(i, j);
    }

    let mut outcomes = Vec::with_capacity(fractions.len());
    for &fraction in fractions {
        let keep = floor_count(pool.len(), fraction);
        if keep == 0 {
            return Err(ModelError::EmptyFraction(fraction));
        }
        let subset: BTreeSet<&str> = pool[..keep].iter().map(String::as_str).collect();
        let records: Vec<_> = data
            .records
            .iter()
            .filter(|r| r.split != Split::Train || subset.contains(r.image_id.as_str()))
            .cloned()
            .collect();
        let bundles: Vec<_> = data.bundles.values().cloned().collect();
        let fraction_data = TrainData::new(records, bundles, 1)?;
        let outcome = train(
            &fraction_data,
            model_config,
            fusion_config,
            schedule,
            ablation,
        )?;
        let dev_records = fraction_data.split(Split::Dev);
        let (dev_em, dev_f1) = evaluate_split(
            &dev_records,
            &fraction_data,
            &outcome.best_params,
            model_config,
            fusion_config,
            ablation,
        )?;
        outcomes.push(FractionOutcome {
            fraction,
            train_images: keep,
            dev_em,
            dev_f1,
            history: outcome.history,
        });
    }
    Ok(outcomes)
}

/// Nested subsets used by the sweep, exposed for tests and reporting.
pub fn nested_train_subsets(
    data: &TrainData,
    fractions: &[f64],
    seed: u64,
) -> Result<Vec<Vec<String>>, ModelError> {
    let train_images: BTreeSet<String> = data
        .records
        .iter()
        .filter(|r| r.split == Split::Train)
        .map(|r| r.image_id.clone())
        .collect();
    let mut pool: Vec<String> = train_images.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_F4AC);
    for i in (1..pool.len()).rev() {
        let j = rng.random_range(0..=i);
        pool.swap(i, j);
    }
    fractions
        .iter()
        .map(|&fraction| {
            let keep = floor_count(pool.len(), fraction);
            if keep == 0 {
                return Err(ModelError::EmptyFraction(fraction));
            }
            Ok(pool[..keep].to_vec())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::TemplateBank;
    use crate::fusion::{synthetic_dataset, SyntheticProvider};

    #[test]
    fn floor_count_snaps_exact_products() {
        assert_eq!(floor_count(16, 0.25), 4);
        assert_eq!(floor_count(16, 1.0), 16);
        assert_eq!(floor_count(10, 0.33), 3);
        assert_eq!(floor_count(3, 0.1), 0);
    }

    #[test]
    fn subsets_are_nested_and_sized() {
        let fusion = FusionConfig {
            d_model: 8,
            f_obj: 6,
            f_det: 5,
            f_rec: 5,
            f_grid: 7,
            max_text_len: 16,
            seed: 3,
            share_box_projection: true,
        };
        let provider = SyntheticProvider::new(3, &fusion);
        let (records, bundles) =
            synthetic_dataset(&provider, 20, &TemplateBank::bundled(), (0.8, 0.1, 0.1), 5).unwrap();
        let data = TrainData::new(records, bundles, 1).unwrap();
        let subsets = nested_train_subsets(&data, &[0.25, 0.5, 1.0], 7).unwrap();
        assert_eq!(subsets[0].len(), 4);
        assert_eq!(subsets[1].len(), 8);
        assert_eq!(subsets[2].len(), 16);
        for window in subsets.windows(2) {
            let smaller: std::collections::BTreeSet<_> = window[0].iter().collect();
            let larger: std::collections::BTreeSet<_> = window[1].iter().collect();
            assert!(smaller.is_subset(&larger), "subsets must nest");
        }
    }

    #[test]
    fn bad_fraction_is_rejected() {
        let fusion = FusionConfig {
            d_model: 8,
            f_obj: 6,
            f_det: 5,
            f_rec: 5,
            f_grid: 7,
            max_text_len: 16,
            seed: 3,
            share_box_projection: true,
        };
        let provider = SyntheticProvider::new(3, &fusion);
        let (records, bundles) =
            synthetic_dataset(&provider, 8, &TemplateBank::bundled(), (0.5, 0.25, 0.25), 5)
                .unwrap();
        let data = TrainData::new(records, bundles, 1).unwrap();
        let model = ModelConfig {
            d_model: 8,
            n_heads: 2,
            n_encoder_layers: 1,
            n_decoder_layers: 1,
            ffn_hidden: 8,
            dropout: 0.0,
            max_decode_len: 4,
            seed: 1,
        };
        let schedule = TrainSchedule {
            max_epochs: 1,
            ..TrainSchedule::default()
        };
        let err = run_data_fraction_sweep(
            &data,
            &[1.5],
            &model,
            &fusion,
            &schedule,
            AblationFlags::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::BadFraction(_)));
    }
}

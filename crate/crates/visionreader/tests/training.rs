//! End-to-end model behavior on small synthetic corpora: loss scale at
//! init, determinism, padding masks, evaluation purity, and the data
//! fraction machinery.

use std::collections::HashSet;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use visionreader::data::{build_vocabulary, parse_records, tokenize, Category, Split};
use visionreader::forge::TemplateBank;
use visionreader::fusion::{
    embed_example, synthetic_dataset, AblationFlags, FusionConfig, SyntheticProvider,
};
use visionreader::math::Matrix;
use visionreader::model::{
    encode, encode_masked, example_loss, greedy_decode, run_data_fraction_sweep, train,
    ModelConfig, ModelParams, TrainData, TrainSchedule,
};

const QA_FIXTURE: &str = include_str!("../data/qa_fixture.jsonl");
const CORPUS_FIXTURE: &str = include_str!("../data/corpus_fixture.jsonl");

fn fusion_config(seed: u64) -> FusionConfig {
    FusionConfig {
        d_model: 32,
        f_obj: 16,
        f_det: 12,
        f_rec: 12,
        f_grid: 10,
        max_text_len: 24,
        seed,
        share_box_projection: true,
    }
}

fn model_config(seed: u64, dropout: f64) -> ModelConfig {
    ModelConfig {
        d_model: 32,
        n_heads: 4,
        n_encoder_layers: 1,
        n_decoder_layers: 1,
        ffn_hidden: 64,
        dropout,
        max_decode_len: 6,
        seed,
    }
}

fn small_data(images: usize, seed: u64) -> TrainData {
    let fcfg = fusion_config(seed);
    let provider = SyntheticProvider::new(seed, &fcfg);
    let (records, bundles) = synthetic_dataset(
        &provider,
        images,
        &TemplateBank::bundled(),
        (0.6, 0.2, 0.2),
        seed ^ 1,
    )
    .unwrap();
    let records: Vec<_> = records
        .into_iter()
        .filter(|r| r.category == Category::Title)
        .collect();
    TrainData::new(records, bundles, 1).unwrap()
}

#[test]
fn fixture_file_loads_fifty_records_over_five_categories() {
    let records = parse_records(QA_FIXTURE).unwrap();
    // independent line count straight off the raw text
    let line_count = QA_FIXTURE.lines().filter(|l| !l.trim().is_empty()).count();
    assert_eq!(line_count, 50);
    assert_eq!(records.len(), line_count);
    let categories: HashSet<Category> = records.iter().map(|r| r.category).collect();
    assert_eq!(categories.len(), 5);
}

#[test]
fn vocabulary_size_matches_naive_counter() {
    let records = parse_records(CORPUS_FIXTURE).unwrap();
    let vocab = build_vocabulary(&records, 1).unwrap();

    // independent counter: split on whitespace, collect distinct train
    // tokens by hand
    let mut seen: HashSet<String> = HashSet::new();
    for record in records.iter().filter(|r| r.split == Split::Train) {
        for text in [&record.question, &record.answer] {
            for token in text.split_whitespace() {
                seen.insert(token.to_owned());
            }
        }
    }
    assert_eq!(vocab.len(), seen.len() + 5, "distinct tokens plus specials");
}

#[test]
fn initial_loss_is_near_log_vocab() {
    let data = small_data(20, 41);
    let fcfg = fusion_config(41);
    let mcfg = model_config(2, 0.0);
    let params = ModelParams::init(&mcfg, &fcfg, data.vocab.len());

    let train_records = data.split(Split::Train);
    let mut loss_sum = 0.0;
    for record in &train_records {
        let bundle = data.bundle(&record.image_id).unwrap();
        let example = embed_example(
            &tokenize(&record.question),
            bundle,
            &data.vocab,
            &params.fusion,
            &fcfg,
            AblationFlags::default(),
        )
        .unwrap();
        let answer_ids = data.vocab.encode(&tokenize(&record.answer));
        loss_sum += example_loss(&example, &answer_ids, &params).unwrap();
    }
    let mean = loss_sum / train_records.len() as f64;
    let expected = (data.vocab.len() as f64).ln();
    assert!(
        (mean - expected).abs() / expected < 0.10,
        "mean initial loss {mean:.4} should sit within 10% of ln(|V|) = {expected:.4}"
    );
}

#[test]
fn fixed_seeds_give_bit_identical_loss_curves() {
    let data = small_data(12, 43);
    let fcfg = fusion_config(43);
    let mcfg = model_config(2, 0.2);
    let schedule = TrainSchedule {
        learning_rate: 1e-3,
        batch_size: 8,
        max_epochs: 4,
        patience: 10,
        seed: 9,
        ..TrainSchedule::default()
    };
    let a = train(&data, &mcfg, &fcfg, &schedule, AblationFlags::default()).unwrap();
    let b = train(&data, &mcfg, &fcfg, &schedule, AblationFlags::default()).unwrap();
    assert_eq!(a.history.len(), b.history.len());
    for (ha, hb) in a.history.iter().zip(&b.history) {
        assert_eq!(
            ha.train_loss, hb.train_loss,
            "loss curves must be bit-identical"
        );
        assert_eq!(ha.dev_em, hb.dev_em);
        assert_eq!(ha.dev_f1, hb.dev_f1);
    }
    assert_eq!(a.final_params, b.final_params);
}

#[test]
fn evaluation_is_dropout_free_and_repeatable() {
    let data = small_data(12, 47);
    let fcfg = fusion_config(47);
    // dropout firmly on during training
    let mcfg = model_config(2, 0.3);
    let schedule = TrainSchedule {
        learning_rate: 1e-3,
        batch_size: 8,
        max_epochs: 2,
        patience: 10,
        seed: 10,
        ..TrainSchedule::default()
    };
    let outcome = train(&data, &mcfg, &fcfg, &schedule, AblationFlags::default()).unwrap();
    let record = data.split(Split::Dev)[0];
    let bundle = data.bundle(&record.image_id).unwrap();
    let example = embed_example(
        &tokenize(&record.question),
        bundle,
        &data.vocab,
        &outcome.final_params.fusion,
        &fcfg,
        AblationFlags::default(),
    )
    .unwrap();
    let first = greedy_decode(&example, &outcome.final_params, &mcfg, &data.vocab).unwrap();
    let second = greedy_decode(&example, &outcome.final_params, &mcfg, &data.vocab).unwrap();
    assert_eq!(first, second, "evaluation passes must be identical");
}

#[test]
fn untrained_decode_is_deterministic() {
    let data = small_data(8, 51);
    let fcfg = fusion_config(51);
    let mcfg = model_config(6, 0.0);
    let params = ModelParams::init(&mcfg, &fcfg, data.vocab.len());
    let record = data.split(Split::Train)[0];
    let bundle = data.bundle(&record.image_id).unwrap();
    let example = embed_example(
        &tokenize(&record.question),
        bundle,
        &data.vocab,
        &params.fusion,
        &fcfg,
        AblationFlags::default(),
    )
    .unwrap();
    let a = greedy_decode(&example, &params, &mcfg, &data.vocab).unwrap();
    let b = greedy_decode(&example, &params, &mcfg, &data.vocab).unwrap();
    assert_eq!(a, b);
}

#[test]
fn max_decode_len_caps_output() {
    let data = small_data(8, 53);
    let fcfg = fusion_config(53);
    let mut mcfg = model_config(6, 0.0);
    mcfg.max_decode_len = 1;
    let params = ModelParams::init(&mcfg, &fcfg, data.vocab.len());
    let record = data.split(Split::Train)[0];
    let bundle = data.bundle(&record.image_id).unwrap();
    let example = embed_example(
        &tokenize(&record.question),
        bundle,
        &data.vocab,
        &params.fusion,
        &fcfg,
        AblationFlags::default(),
    )
    .unwrap();
    let decoded = greedy_decode(&example, &params, &mcfg, &data.vocab).unwrap();
    assert!(tokenize(&decoded).len() <= 1);
}

#[test]
fn padding_rows_are_invisible_to_the_encoder() {
    let fcfg = fusion_config(57);
    let mcfg = model_config(2, 0.0);
    let params = ModelParams::init(&mcfg, &fcfg, 16);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let real = Matrix::from_fn(4, 32, |_, _| rng.random_range(-1.0..1.0));
    // append two padding rows with arbitrary junk content
    let junk_a = Matrix::from_fn(2, 32, |_, _| rng.random_range(-9.0..9.0));
    let junk_b = junk_a.scale(-3.5);
    let padded_a = Matrix::vstack(&[&real, &junk_a]);
    let padded_b = Matrix::vstack(&[&real, &junk_b]);
    let padding = vec![false, false, false, false, true, true];

    let out_a = encode_masked(&padded_a, &padding, &params).unwrap();
    let out_b = encode_masked(&padded_b, &padding, &params).unwrap();
    // masked keys contribute zero weight, so the real rows cannot see the
    // junk change at all
    for r in 0..4 {
        for c in 0..32 {
            assert_eq!(
                out_a.get(r, c),
                out_b.get(r, c),
                "padding content leaked into row {r}"
            );
        }
    }
    // and the unmasked encoder does see it
    let plain_a = encode(&padded_a, &params).unwrap();
    let plain_b = encode(&padded_b, &params).unwrap();
    assert_ne!(plain_a.row(0), plain_b.row(0));
}

#[test]
fn full_fraction_sweep_matches_plain_training() {
    let data = small_data(14, 61);
    let fcfg = fusion_config(61);
    let mcfg = model_config(2, 0.0);
    let schedule = TrainSchedule {
        learning_rate: 1e-3,
        batch_size: 8,
        max_epochs: 3,
        patience: 10,
        seed: 12,
        ..TrainSchedule::default()
    };
    let outcomes = run_data_fraction_sweep(
        &data,
        &[1.0],
        &mcfg,
        &fcfg,
        &schedule,
        AblationFlags::default(),
    )
    .unwrap();
    assert_eq!(outcomes.len(), 1);
    let plain = train(&data, &mcfg, &fcfg, &schedule, AblationFlags::default()).unwrap();
    let sweep_losses: Vec<f64> = outcomes[0].history.iter().map(|h| h.train_loss).collect();
    let plain_losses: Vec<f64> = plain.history.iter().map(|h| h.train_loss).collect();
    assert_eq!(
        sweep_losses, plain_losses,
        "fraction 1.0 must equal plain training"
    );
}

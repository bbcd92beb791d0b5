use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{BuildConfig, PipelineConfig};
use super::manifest::{hash_file, FileHash, RunDir, RunManifest};
use super::predictions::{join_predictions, parse_predictions, Prediction};
use super::reports::{
    attach_length_buckets, attach_ocr_coverage, bucket_rows_to_csv, field_report_to_csv,
    report_by_bucket, report_by_field, Bucketer,
};
use super::runspec::{Command, RunSpec};
use super::AnalysisError;
use crate::data::{load_dataset, save_dataset, Category, ImageFeatureBundle, QARecord, Split};
use crate::forge::{compute_stats, generate_qa, load_metadata, Cleaner, TemplateBank};
use crate::fusion::{synthetic_dataset, FusionConfig, SyntheticProvider};
use crate::metrics::{evaluate, EvalPair, MetricOptions};
use crate::model::{
    answer_question, evaluate_split, run_data_fraction_sweep, train, Checkpoint, TrainData,
};

/// Where a finished run landed and what it produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub run_dir: PathBuf,
    #[serde(skip)]
    pub manifest: RunManifest,
}

fn out_root(spec: &RunSpec) -> PathBuf {
    if let Some(root) = &spec.out_root {
        return root.clone();
    }
    if let Ok(root) = std::env::var("VRK_RUN_DIR") {
        if !root.is_empty() {
            return PathBuf::from(root);
        }
    }
    PathBuf::from("runs")
}

fn metric_options(spec: &RunSpec) -> MetricOptions {
    MetricOptions {
        normalize: !spec.no_normalize,
        literal_eq9: spec.literal_eq9,
    }
}

fn scope_records(records: Vec<QARecord>, scope: &[Category]) -> Vec<QARecord> {
    records
        .into_iter()
        .filter(|r| scope.contains(&r.category))
        .collect()
}

fn input_hash(path: &Path) -> Result<FileHash, AnalysisError> {
    Ok(FileHash {
        name: path.display().to_string(),
        sha256: hash_file(path)?,
    })
}

/// Executes a run spec end to end, staging artifacts and promoting the run
/// directory atomically on success.
pub fn run(spec: &RunSpec) -> Result<RunSummary, AnalysisError> {
    spec.validate()?;
    let root = out_root(spec);
    let run_dir = RunDir::create(&root, spec.command.as_str(), spec.seed)?;
    let result = dispatch(spec, &run_dir);
    match result {
        Ok(inputs) => {
            let (final_dir, manifest) = run_dir.promote(
                spec.command.as_str(),
                spec.seed,
                serde_json::to_value(spec).expect("spec serializes"),
                inputs,
            )?;
            Ok(RunSummary {
                run_dir: final_dir,
                manifest,
            })
        }
        Err(err) => {
            run_dir.discard();
            Err(err)
        }
    }
}

fn dispatch(spec: &RunSpec, run_dir: &RunDir) -> Result<Vec<FileHash>, AnalysisError> {
    match spec.command {
        Command::Build => run_build(spec, run_dir),
        Command::Train | Command::Ablate => run_train(spec, run_dir),
        Command::Eval => run_eval(spec, run_dir),
        Command::Sweep => run_sweep(spec, run_dir),
        Command::Report => run_report(spec, run_dir),
    }
}

fn require_config(spec: &RunSpec) -> Result<&PathBuf, AnalysisError> {
    spec.config.as_ref().ok_or(AnalysisError::MissingInput {
        command: spec.command.as_str(),
        what: "--config",
    })
}

/// Records, cleaned metadata, and (for synthetic builds) bundles.
pub type BuiltCorpus = (
    Vec<QARecord>,
    Vec<crate::data::BookMetadata>,
    Option<Vec<ImageFeatureBundle>>,
);

/// Dataset construction: clean metadata (or synthesize a world), assign
/// per-image splits, and emit one QA record per present field.
pub fn build_corpus(
    config: &BuildConfig,
    seed_override: Option<u64>,
) -> Result<BuiltCorpus, AnalysisError> {
    let seed = seed_override.unwrap_or(config.seed);
    let bank = match &config.templates {
        Some(path) => TemplateBank::load(path)?,
        None => TemplateBank::bundled(),
    };

    if let Some(synthetic) = &config.synthetic {
        let fusion = config.fusion.clone().unwrap_or(FusionConfig {
            d_model: 32,
            f_obj: 16,
            f_det: 12,
            f_rec: 12,
            f_grid: 10,
            max_text_len: 24,
            seed,
            share_box_projection: true,
        });
        let mut provider = SyntheticProvider::new(synthetic.seed, &fusion);
        provider.max_title_words = synthetic.max_title_words.max(1);
        let (records, bundles) =
            synthetic_dataset(&provider, synthetic.images, &bank, config.ratios, seed)?;
        let meta: Vec<_> = bundles
            .iter()
            .map(|b| provider.metadata(&b.image_id))
            .collect();
        return Ok((records, meta, Some(bundles)));
    }

    let meta_path = config.meta.as_ref().expect("validated by BuildConfig");
    let raw_books = load_metadata(meta_path)?;
    let cleaner = Cleaner::default();
    let books: Vec<_> = raw_books.iter().map(|b| cleaner.clean(b)).collect();
    let ids: Vec<String> = books.iter().map(|b| b.image_id.clone()).collect();
    let splits = crate::data::assign_splits(&ids, config.ratios, seed)?;
    let mut records = Vec::new();
    for book in &books {
        records.extend(generate_qa(book, &bank, seed, splits[&book.image_id])?);
    }
    Ok((records, books, None))
}

fn run_build(spec: &RunSpec, run_dir: &RunDir) -> Result<Vec<FileHash>, AnalysisError> {
    let config_path = require_config(spec)?;
    let config = BuildConfig::load(config_path)?;
    let mut inputs = vec![input_hash(config_path)?];
    if let Some(meta) = &config.meta {
        inputs.push(input_hash(meta)?);
    }
    if let Some(templates) = &config.templates {
        inputs.push(input_hash(templates)?);
    }

    let (records, meta, bundles) = build_corpus(&config, spec.seed)?;
    let stats = compute_stats(&records, &meta);

    let dataset_path = run_dir.path().join("dataset.jsonl");
    save_dataset(&dataset_path, &records)?;
    run_dir.write(
        "stats.json",
        serde_json::to_string_pretty(&stats)?.as_bytes(),
    )?;
    if let Some(bundles) = bundles {
        crate::data::write_bundles(run_dir.path().join("bundles.jsonl"), &bundles)?;
    }
    Ok(inputs)
}

fn load_pipeline_inputs(
    spec: &RunSpec,
    config: &PipelineConfig,
) -> Result<(TrainData, Vec<FileHash>), AnalysisError> {
    let mut inputs = Vec::new();
    inputs.push(input_hash(&config.data)?);
    let records = scope_records(load_dataset(&config.data)?, &spec.field_scope);
    let bundles = match &config.bundles {
        Some(path) => {
            inputs.push(input_hash(path)?);
            crate::data::read_bundles(path)?
        }
        None => {
            let provider = SyntheticProvider::new(config.synthetic_seed, &config.fusion);
            let ids: BTreeSet<&str> = records.iter().map(|r| r.image_id.as_str()).collect();
            ids.into_iter().map(|id| provider.bundle(id)).collect()
        }
    };
    let data = TrainData::new(records, bundles, config.min_count)?;
    Ok((data, inputs))
}

fn apply_seed(config: &mut PipelineConfig, seed: Option<u64>) {
    if let Some(seed) = seed {
        config.schedule.seed = seed;
    }
}

fn run_train(spec: &RunSpec, run_dir: &RunDir) -> Result<Vec<FileHash>, AnalysisError> {
    let config_path = require_config(spec)?;
    let mut config = PipelineConfig::load(config_path)?;
    apply_seed(&mut config, spec.seed);
    let mut inputs = vec![input_hash(config_path)?];
    let (data, data_inputs) = load_pipeline_inputs(spec, &config)?;
    inputs.extend(data_inputs);

    let outcome = train(
        &data,
        &config.model,
        &config.fusion,
        &config.schedule,
        spec.ablation,
    )?;

    let checkpoint = Checkpoint::new(
        config.model.clone(),
        config.fusion.clone(),
        data.vocab.clone(),
        &outcome.best_params,
        outcome.state.rng.clone(),
    );
    run_dir.write("checkpoint.json", checkpoint.to_json().as_bytes())?;
    let final_checkpoint = Checkpoint::new(
        config.model.clone(),
        config.fusion.clone(),
        data.vocab.clone(),
        &outcome.final_params,
        outcome.state.rng.clone(),
    );
    run_dir.write(
        "final_checkpoint.json",
        final_checkpoint.to_json().as_bytes(),
    )?;

    let mut log = String::new();
    for entry in &outcome.history {
        log.push_str(&serde_json::to_string(entry)?);
        log.push('\n');
    }
    run_dir.write("train_log.jsonl", log.as_bytes())?;
    Ok(inputs)
}

fn decode_records(
    records: &[&QARecord],
    data: &TrainData,
    checkpoint: &Checkpoint,
    spec: &RunSpec,
) -> Result<(Vec<Prediction>, Vec<EvalPair>), AnalysisError> {
    let params = checkpoint.params()?;
    let mut predictions = Vec::with_capacity(records.len());
    let mut pairs = Vec::with_capacity(records.len());
    for record in records {
        let bundle = data.bundle(&record.image_id)?;
        let answer = answer_question(
            &record.question,
            bundle,
            &checkpoint.vocabulary,
            &params,
            &checkpoint.model_config,
            &checkpoint.fusion_config,
            spec.ablation,
        )?;
        predictions.push(Prediction {
            image_id: record.image_id.clone(),
            question: record.question.clone(),
            prediction: answer.clone(),
        });
        let mut metadata = BTreeMap::new();
        metadata.insert("image_id".to_owned(), record.image_id.clone());
        metadata.insert("question".to_owned(), record.question.clone());
        pairs.push(EvalPair {
            ground_truth: record.answer.clone(),
            prediction: answer,
            category: record.category,
            metadata,
        });
    }
    Ok((predictions, pairs))
}

fn write_report_artifacts(
    run_dir: &RunDir,
    pairs: &mut [EvalPair],
    opts: MetricOptions,
    with_coverage: Option<&TrainData>,
    requested_bucketer: Option<Bucketer>,
) -> Result<(), AnalysisError> {
    attach_length_buckets(pairs);
    if let Some(data) = with_coverage {
        attach_ocr_coverage(pairs, |id| data.bundles.get(id).cloned(), opts);
    }
    if pairs.is_empty() {
        return Err(AnalysisError::NoPairs);
    }
    let mut report = evaluate(pairs, opts)?;
    // the report's bucket view: OCR coverage when features are on hand,
    // answer length otherwise
    let bucket_key = if with_coverage.is_some() {
        Bucketer::OcrCoverage
    } else {
        Bucketer::AnswerLen
    };
    if let Ok(buckets) = crate::metrics::evaluate_by_bucket(pairs, bucket_key.key(), opts) {
        report.per_bucket = Some(buckets);
    }
    run_dir.write(
        "eval_report.json",
        serde_json::to_string_pretty(&report)?.as_bytes(),
    )?;
    let field_report = report_by_field(pairs, opts);
    run_dir.write(
        "per_field.csv",
        field_report_to_csv(&field_report).as_bytes(),
    )?;
    run_dir.write(
        "per_field.json",
        serde_json::to_string_pretty(&field_report)?.as_bytes(),
    )?;
    let mut bucketers = vec![Bucketer::AnswerLen, Bucketer::QuestionLen];
    if with_coverage.is_some() {
        bucketers.push(Bucketer::OcrCoverage);
    }
    // an explicitly requested bucketer must be served or fail loudly,
    // even when its metadata (e.g. OCR coverage without bundles) is absent
    if let Some(requested) = requested_bucketer {
        if !bucketers.contains(&requested) {
            bucketers.push(requested);
        }
    }
    for bucketer in bucketers {
        let rows = report_by_bucket(pairs, bucketer, opts)?;
        run_dir.write(
            &format!("bucket_{}.csv", bucketer.key()),
            bucket_rows_to_csv(&rows).as_bytes(),
        )?;
    }
    Ok(())
}

fn run_eval(spec: &RunSpec, run_dir: &RunDir) -> Result<Vec<FileHash>, AnalysisError> {
    if spec.gold.is_some() || spec.pred.is_some() {
        return run_report(spec, run_dir);
    }
    let config_path = require_config(spec)?;
    let config = PipelineConfig::load(config_path)?;
    let mut inputs = vec![input_hash(config_path)?];
    let checkpoint_path = spec
        .checkpoint
        .as_ref()
        .or(config.checkpoint.as_ref())
        .ok_or(AnalysisError::MissingInput {
            command: "eval",
            what: "--checkpoint (or a checkpoint in the config)",
        })?;
    inputs.push(input_hash(checkpoint_path)?);
    let checkpoint = Checkpoint::load(checkpoint_path)?;
    let (data, data_inputs) = load_pipeline_inputs(spec, &config)?;
    inputs.extend(data_inputs);

    let records = data.split(spec.eval_split);
    let (predictions, mut pairs) = decode_records(&records, &data, &checkpoint, spec)?;
    let mut lines = String::new();
    for p in &predictions {
        lines.push_str(&serde_json::to_string(p)?);
        lines.push('\n');
    }
    run_dir.write("predictions.jsonl", lines.as_bytes())?;
    write_report_artifacts(
        run_dir,
        &mut pairs,
        metric_options(spec),
        Some(&data),
        spec.bucketer,
    )?;
    Ok(inputs)
}

fn run_report(spec: &RunSpec, run_dir: &RunDir) -> Result<Vec<FileHash>, AnalysisError> {
    let gold_path = spec.gold.as_ref().ok_or(AnalysisError::MissingInput {
        command: spec.command.as_str(),
        what: "--gold",
    })?;
    let pred_path = spec.pred.as_ref().ok_or(AnalysisError::MissingInput {
        command: spec.command.as_str(),
        what: "--pred",
    })?;
    let inputs = vec![input_hash(gold_path)?, input_hash(pred_path)?];
    let gold = scope_records(load_dataset(gold_path)?, &spec.field_scope);
    let predictions = parse_predictions(&fs::read_to_string(pred_path)?)?;
    let mut pairs = join_predictions(&gold, &predictions)?;
    // carry questions into metadata so question-length buckets work
    for (pair, record) in pairs.iter_mut().zip(&gold) {
        pair.metadata
            .insert("question".to_owned(), record.question.clone());
        pair.metadata
            .insert("image_id".to_owned(), record.image_id.clone());
    }
    write_report_artifacts(
        run_dir,
        &mut pairs,
        metric_options(spec),
        None,
        spec.bucketer,
    )?;
    Ok(inputs)
}

fn run_sweep(spec: &RunSpec, run_dir: &RunDir) -> Result<Vec<FileHash>, AnalysisError> {
    let config_path = require_config(spec)?;
    let mut config = PipelineConfig::load(config_path)?;
    apply_seed(&mut config, spec.seed);
    let fractions = spec.fractions.clone().ok_or(AnalysisError::MissingInput {
        command: "sweep",
        what: "--fractions",
    })?;
    let mut inputs = vec![input_hash(config_path)?];
    let (data, data_inputs) = load_pipeline_inputs(spec, &config)?;
    inputs.extend(data_inputs);

    let outcomes = run_data_fraction_sweep(
        &data,
        &fractions,
        &config.model,
        &config.fusion,
        &config.schedule,
        spec.ablation,
    )?;
    let mut csv = String::from("fraction,train_images,dev_em,dev_f1\n");
    for o in &outcomes {
        csv.push_str(&format!(
            "{},{},{:.6},{:.6}\n",
            o.fraction, o.train_images, o.dev_em, o.dev_f1
        ));
    }
    run_dir.write("sweep.csv", csv.as_bytes())?;
    run_dir.write(
        "sweep.json",
        serde_json::to_string_pretty(&outcomes)?.as_bytes(),
    )?;
    Ok(inputs)
}

/// Re-evaluates a trained checkpoint on one split without a run
/// directory; used by callers needing scores rather than artifacts.
pub fn evaluate_checkpoint(
    checkpoint: &Checkpoint,
    data: &TrainData,
    split: Split,
    ablation: crate::fusion::AblationFlags,
) -> Result<(f64, f64), AnalysisError> {
    let params = checkpoint.params()?;
    let records = data.split(split);
    Ok(evaluate_split(
        &records,
        data,
        &params,
        &checkpoint.model_config,
        &checkpoint.fusion_config,
        ablation,
    )?)
}

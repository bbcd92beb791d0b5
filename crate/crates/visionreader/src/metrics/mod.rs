//! Answer-level metrics: exact match and token-level precision / recall /
//! F1, aggregated overall, per field, and per bucket.
//!
//! Tokens come from whitespace splitting; the mutual-token count is a
//! multiset intersection, so repeated words must be matched one-for-one.

use std::collections::BTreeMap;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{normalize_answer, tokenize, Category};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("cannot evaluate an empty pair list")]
    EmptyInput,

    #[error("gold and annotator answer lists differ in length ({gold} vs {got})")]
    LengthMismatch { gold: usize, got: usize },

    #[error("agreement study needs at least one annotator")]
    NoAnnotators,

    #[error("pair {index} is missing metadata key \"{key}\"")]
    MissingMetadata { index: usize, key: String },
}

/// Switches that change how scores are computed; the defaults are what the
/// rest of the pipeline uses.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricOptions {
    /// Lowercase + collapse whitespace on both sides before comparing.
    pub normalize: bool,
    /// Compute per-pair F1 as P·R/(P+R) instead of the harmonic mean
    /// 2·P·R/(P+R). Off by default; exists for literal reproducibility of
    /// the printed formula it mirrors.
    pub literal_eq9: bool,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            normalize: true,
            literal_eq9: false,
        }
    }
}

fn prepared(text: &str, opts: MetricOptions) -> String {
    if opts.normalize {
        normalize_answer(text)
    } else {
        text.to_owned()
    }
}

/// 1 if the two answers are string-equal after normalization, else 0.
pub fn exact_match(ground_truth: &str, prediction: &str, opts: MetricOptions) -> f64 {
    if prepared(ground_truth, opts) == prepared(prediction, opts) {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenF1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Token-level precision, recall, and F1 between a gold and predicted
/// answer. An empty prediction scores (0, 0, 0).
pub fn token_f1(ground_truth: &str, prediction: &str, opts: MetricOptions) -> TokenF1 {
    let gold = tokenize(&prepared(ground_truth, opts));
    let pred = tokenize(&prepared(prediction, opts));
    if gold.is_empty() || pred.is_empty() {
        return TokenF1 {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        };
    }

    let mut gold_counts: HashMap<&str, usize> = HashMap::new();
    for tok in &gold {
        *gold_counts.entry(tok).or_insert(0) += 1;
    }
    let mut mutual = 0usize;
    for tok in &pred {
        if let Some(count) = gold_counts.get_mut(tok.as_str()) {
            if *count > 0 {
                *count -= 1;
                mutual += 1;
            }
        }
    }

    let precision = mutual as f64 / pred.len() as f64;
    let recall = mutual as f64 / gold.len() as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else if opts.literal_eq9 {
        precision * recall / (precision + recall)
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    TokenF1 {
        precision,
        recall,
        f1,
    }
}

/// One scored unit: gold answer, model answer, the question's field, and
/// optional bucket labels attached by the caller.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalPair {
    pub ground_truth: String,
    pub prediction: String,
    pub category: Category,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

/// EM / F1 over some subset of pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBlock {
    pub em: f64,
    pub f1: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub em: f64,
    pub f1: f64,
    pub n: usize,
    pub per_category: BTreeMap<Category, ScoreBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_bucket: Option<BTreeMap<String, ScoreBlock>>,
}

fn score_block<'a>(pairs: impl Iterator<Item = &'a EvalPair>, opts: MetricOptions) -> ScoreBlock {
    let mut em_sum = 0.0;
    let mut f1_sum = 0.0;
    let mut n = 0usize;
    for pair in pairs {
        em_sum += exact_match(&pair.ground_truth, &pair.prediction, opts);
        f1_sum += token_f1(&pair.ground_truth, &pair.prediction, opts).f1;
        n += 1;
    }
    if n == 0 {
        return ScoreBlock {
            em: 0.0,
            f1: 0.0,
            n: 0,
        };
    }
    ScoreBlock {
        em: em_sum / n as f64,
        f1: f1_sum / n as f64,
        n,
    }
}

/// Mean EM and mean per-pair F1, with a per-category breakdown.
pub fn evaluate(pairs: &[EvalPair], opts: MetricOptions) -> Result<EvalReport, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let overall = score_block(pairs.iter(), opts);
    let categories: std::collections::BTreeSet<Category> =
        pairs.iter().map(|p| p.category).collect();
    let per_category = categories
        .into_iter()
        .map(|cat| {
            let block = score_block(pairs.iter().filter(|p| p.category == cat), opts);
            (cat, block)
        })
        .collect();
    Ok(EvalReport {
        em: overall.em,
        f1: overall.f1,
        n: overall.n,
        per_category,
        per_bucket: None,
    })
}

/// Groups pairs by a metadata key and scores each group. Errors if any
/// pair lacks the key.
pub fn evaluate_by_bucket(
    pairs: &[EvalPair],
    key: &str,
    opts: MetricOptions,
) -> Result<BTreeMap<String, ScoreBlock>, MetricsError> {
    let mut groups: BTreeMap<String, Vec<&EvalPair>> = BTreeMap::new();
    for (index, pair) in pairs.iter().enumerate() {
        let label = pair
            .metadata
            .get(key)
            .ok_or_else(|| MetricsError::MissingMetadata {
                index,
                key: key.to_owned(),
            })?;
        groups.entry(label.clone()).or_default().push(pair);
    }
    Ok(groups
        .into_iter()
        .map(|(label, members)| (label, score_block(members.into_iter(), opts)))
        .collect())
}

/// Per-field agreement between automatic labels and human answers, with a
/// macro average over fields. Scores are averaged over annotators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgreementReport {
    pub per_field: BTreeMap<Category, ScoreBlock>,
    pub average: ScoreBlock,
    pub annotators: usize,
}

/// Treats the automatic labels as ground truth and each annotator's
/// answers as predictions. `gold` pairs categories with gold answers;
/// each annotator list must align index-for-index with `gold`.
pub fn agreement_study(
    gold: &[(Category, String)],
    annotator_answers: &[Vec<String>],
    opts: MetricOptions,
) -> Result<AgreementReport, MetricsError> {
    if annotator_answers.is_empty() {
        return Err(MetricsError::NoAnnotators);
    }
    for answers in annotator_answers {
        if answers.len() != gold.len() {
            return Err(MetricsError::LengthMismatch {
                gold: gold.len(),
                got: answers.len(),
            });
        }
    }
    if gold.is_empty() {
        return Err(MetricsError::EmptyInput);
    }

    let mut per_field: BTreeMap<Category, Vec<ScoreBlock>> = BTreeMap::new();
    for answers in annotator_answers {
        let pairs: Vec<EvalPair> = gold
            .iter()
            .zip(answers)
            .map(|((category, truth), prediction)| EvalPair {
                ground_truth: truth.clone(),
                prediction: prediction.clone(),
                category: *category,
                metadata: BTreeMap::new(),
            })
            .collect();
        let report = evaluate(&pairs, opts)?;
        for (cat, block) in report.per_category {
            per_field.entry(cat).or_default().push(block);
        }
    }

    let averaged: BTreeMap<Category, ScoreBlock> = per_field
        .into_iter()
        .map(|(cat, blocks)| {
            let k = blocks.len() as f64;
            let em = blocks.iter().map(|b| b.em).sum::<f64>() / k;
            let f1 = blocks.iter().map(|b| b.f1).sum::<f64>() / k;
            let n = blocks.iter().map(|b| b.n).sum::<usize>() / blocks.len();
            (cat, ScoreBlock { em, f1, n })
        })
        .collect();

    let fields = averaged.len() as f64;
    let average = ScoreBlock {
        em: averaged.values().map(|b| b.em).sum::<f64>() / fields,
        f1: averaged.values().map(|b| b.f1).sum::<f64>() / fields,
        n: averaged.values().map(|b| b.n).sum(),
    };
    Ok(AgreementReport {
        per_field: averaged,
        average,
        annotators: annotator_answers.len(),
    })
}

/// OCR recognition-rate buckets for an answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CoverageBucket {
    #[serde(rename = "25")]
    Q25,
    #[serde(rename = "50")]
    Q50,
    #[serde(rename = "75")]
    Q75,
    #[serde(rename = "100")]
    Q100,
}

impl CoverageBucket {
    pub fn label(&self) -> &'static str {
        match self {
            CoverageBucket::Q25 => "25",
            CoverageBucket::Q50 => "50",
            CoverageBucket::Q75 => "75",
            CoverageBucket::Q100 => "100",
        }
    }
}

impl std::fmt::Display for CoverageBucket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Fraction of gold-answer tokens present in the OCR text pool (multiset),
/// mapped to the smallest bucket threshold at or above the coverage.
pub fn ocr_coverage_bucket(
    ground_truth: &str,
    ocr_texts: &[String],
    opts: MetricOptions,
) -> CoverageBucket {
    let gold = tokenize(&prepared(ground_truth, opts));
    if gold.is_empty() {
        return CoverageBucket::Q25;
    }
    let mut pool: HashMap<String, usize> = HashMap::new();
    for text in ocr_texts {
        for tok in tokenize(&prepared(text, opts)) {
            *pool.entry(tok).or_insert(0) += 1;
        }
    }
    let mut found = 0usize;
    for tok in &gold {
        if let Some(count) = pool.get_mut(tok) {
            if *count > 0 {
                *count -= 1;
                found += 1;
            }
        }
    }
    let coverage = found as f64 / gold.len() as f64;
    if coverage <= 0.25 {
        CoverageBucket::Q25
    } else if coverage <= 0.50 {
        CoverageBucket::Q50
    } else if coverage <= 0.75 {
        CoverageBucket::Q75
    } else {
        CoverageBucket::Q100
    }
}

#[cfg(test)]
mod tests;

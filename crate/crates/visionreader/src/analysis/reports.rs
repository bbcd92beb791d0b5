use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::data::{tokenize, Category, ImageFeatureBundle};
use crate::forge::LengthBucket;
use crate::metrics::{
    evaluate_by_bucket, ocr_coverage_bucket, EvalPair, MetricOptions, ScoreBlock,
};

/// One row of the per-field table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldRow {
    pub category: Category,
    pub em: f64,
    pub f1: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldReport {
    pub rows: Vec<FieldRow>,
}

/// Per-field EM/F1 in the fixed layout order: title, author, publisher,
/// translator, then genre only when genre pairs are present (genre-only
/// runs). Fields with no pairs are omitted.
pub fn report_by_field(pairs: &[EvalPair], opts: MetricOptions) -> FieldReport {
    let order = [
        Category::Title,
        Category::Author,
        Category::Publisher,
        Category::Translator,
        Category::Genre,
    ];
    let mut rows = Vec::new();
    for category in order {
        let members: Vec<&EvalPair> = pairs.iter().filter(|p| p.category == category).collect();
        if members.is_empty() {
            continue;
        }
        let mut em = 0.0;
        let mut f1 = 0.0;
        for pair in &members {
            em += crate::metrics::exact_match(&pair.ground_truth, &pair.prediction, opts);
            f1 += crate::metrics::token_f1(&pair.ground_truth, &pair.prediction, opts).f1;
        }
        let n = members.len();
        rows.push(FieldRow {
            category,
            em: em / n as f64,
            f1: f1 / n as f64,
            n,
        });
    }
    FieldReport { rows }
}

pub fn field_report_to_csv(report: &FieldReport) -> String {
    let mut out = String::from("field,em,f1,n\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{:.6},{:.6},{}\n",
            row.category, row.em, row.f1, row.n
        ));
    }
    out
}

/// Which metadata dimension a bucket report groups by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucketer {
    AnswerLen,
    QuestionLen,
    OcrCoverage,
}

impl Bucketer {
    pub fn key(&self) -> &'static str {
        match self {
            Bucketer::AnswerLen => "answer_len",
            Bucketer::QuestionLen => "question_len",
            Bucketer::OcrCoverage => "ocr_coverage",
        }
    }

    pub fn name(&self) -> &'static str {
        self.key()
    }

    /// Display order for the bucket labels of this dimension.
    fn label_order(&self) -> Vec<&'static str> {
        match self {
            Bucketer::AnswerLen | Bucketer::QuestionLen => {
                LengthBucket::ALL.iter().map(|b| b.label()).collect()
            }
            Bucketer::OcrCoverage => vec!["25", "50", "75", "100"],
        }
    }
}

impl std::str::FromStr for Bucketer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "answer_len" => Ok(Bucketer::AnswerLen),
            "question_len" => Ok(Bucketer::QuestionLen),
            "ocr_coverage" => Ok(Bucketer::OcrCoverage),
            other => Err(format!("unknown bucketer \"{other}\"")),
        }
    }
}

/// Attaches answer- and question-length bucket labels to every pair.
pub fn attach_length_buckets(pairs: &mut [EvalPair]) {
    for pair in pairs {
        let answer_bucket = LengthBucket::of(tokenize(&pair.ground_truth).len());
        pair.metadata
            .insert("answer_len".into(), answer_bucket.label().to_owned());
        if let Some(question) = pair.metadata.get("question").cloned() {
            let bucket = LengthBucket::of(tokenize(&question).len());
            pair.metadata
                .insert("question_len".into(), bucket.label().to_owned());
        }
    }
}

/// Attaches the OCR-coverage bucket using the image's OCR token texts.
/// Pairs must carry an `image_id` metadata entry.
pub fn attach_ocr_coverage(
    pairs: &mut [EvalPair],
    bundle_of: impl Fn(&str) -> Option<ImageFeatureBundle>,
    opts: MetricOptions,
) {
    for pair in pairs {
        let Some(image_id) = pair.metadata.get("image_id").cloned() else {
            continue;
        };
        let Some(bundle) = bundle_of(&image_id) else {
            continue;
        };
        let texts: Vec<String> = bundle.ocr.iter().map(|t| t.text.clone()).collect();
        let bucket = ocr_coverage_bucket(&pair.ground_truth, &texts, opts);
        pair.metadata
            .insert("ocr_coverage".into(), bucket.label().to_owned());
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BucketRow {
    pub bucket: String,
    pub em: f64,
    pub f1: f64,
    pub n: usize,
}

/// Per-bucket EM/F1 plus counts, in the bucketer's natural label order.
/// Errors when a pair is missing the bucketer's metadata.
pub fn report_by_bucket(
    pairs: &[EvalPair],
    bucketer: Bucketer,
    opts: MetricOptions,
) -> Result<Vec<BucketRow>, AnalysisError> {
    let grouped = evaluate_by_bucket(pairs, bucketer.key(), opts).map_err(|_| {
        AnalysisError::MissingBucketMetadata {
            bucketer: bucketer.name(),
            key: bucketer.key(),
        }
    })?;
    let mut rows = Vec::new();
    for label in bucketer.label_order() {
        if let Some(block) = grouped.get(label) {
            rows.push(to_row(label, block));
        }
    }
    // labels outside the canonical order (should not happen) sort last
    for (label, block) in &grouped {
        if !bucketer.label_order().contains(&label.as_str()) {
            rows.push(to_row(label, block));
        }
    }
    Ok(rows)
}

fn to_row(label: &str, block: &ScoreBlock) -> BucketRow {
    BucketRow {
        bucket: label.to_owned(),
        em: block.em,
        f1: block.f1,
        n: block.n,
    }
}

pub fn bucket_rows_to_csv(rows: &[BucketRow]) -> String {
    let mut out = String::from("bucket,em,f1,n\n");
    for row in rows {
        out.push_str(&format!(
            "{},{:.6},{:.6},{}\n",
            row.bucket, row.em, row.f1, row.n
        ));
    }
    out
}

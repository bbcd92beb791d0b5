use std::collections::BTreeMap;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::data::QARecord;
use crate::metrics::EvalPair;

/// One model answer, joined to gold by (image_id, question).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub image_id: String,
    pub question: String,
    pub prediction: String,
}

/// Parses a predictions JSONL file.
pub fn parse_predictions(input: &str) -> Result<Vec<Prediction>, AnalysisError> {
    let mut predictions = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Prediction =
            serde_json::from_str(line).map_err(|e| AnalysisError::MalformedPrediction {
                line: idx + 1,
                message: e.to_string(),
            })?;
        predictions.push(parsed);
    }
    Ok(predictions)
}

/// Joins gold records with predictions into evaluation pairs. Every gold
/// record must have a prediction; extra predictions are ignored.
pub fn join_predictions(
    gold: &[QARecord],
    predictions: &[Prediction],
) -> Result<Vec<EvalPair>, AnalysisError> {
    let mut by_key: HashMap<(&str, &str), &str> = HashMap::with_capacity(predictions.len());
    for p in predictions {
        by_key.insert((p.image_id.as_str(), p.question.as_str()), &p.prediction);
    }
    let mut pairs = Vec::with_capacity(gold.len());
    let mut missing = 0usize;
    let mut first_missing: Option<&QARecord> = None;
    for record in gold {
        match by_key.get(&(record.image_id.as_str(), record.question.as_str())) {
            Some(prediction) => pairs.push(EvalPair {
                ground_truth: record.answer.clone(),
                prediction: (*prediction).to_owned(),
                category: record.category,
                metadata: BTreeMap::new(),
            }),
            None => {
                missing += 1;
                first_missing.get_or_insert(record);
            }
        }
    }
    if let Some(record) = first_missing {
        return Err(AnalysisError::MissingPredictions {
            count: missing,
            image_id: record.image_id.clone(),
            question: record.question.clone(),
        });
    }
    Ok(pairs)
}

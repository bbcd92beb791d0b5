use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DataError;

/// One spotted text token: its transcription, normalized box, and the
/// detection / recognition feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcrToken {
    pub text: String,
    pub bbox: [f64; 4],
    #[serde(rename = "det")]
    pub det_feature: Vec<f64>,
    #[serde(rename = "rec")]
    pub rec_feature: Vec<f64>,
}

/// One detected object region: feature vector plus normalized box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRegion {
    pub feature: Vec<f64>,
    pub bbox: [f64; 4],
}

/// Per-image visual inputs: object regions, OCR tokens in reading order,
/// and grid features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageFeatureBundle {
    pub image_id: String,
    pub objects: Vec<ObjectRegion>,
    pub ocr: Vec<OcrToken>,
    pub grid: Vec<Vec<f64>>,
}

fn check_bbox(bbox: &[f64; 4], line: usize) -> Result<(), DataError> {
    let [x0, y0, x1, y1] = *bbox;
    for (name, v) in [("x_min", x0), ("y_min", y0), ("x_max", x1), ("y_max", y1)] {
        if !(0.0..=1.0).contains(&v) || !v.is_finite() {
            return Err(DataError::Malformed {
                line,
                message: format!("bbox component {name} = {v} outside [0, 1]"),
            });
        }
    }
    if x0 > x1 || y0 > y1 {
        return Err(DataError::Malformed {
            line,
            message: format!("bbox corners out of order: [{x0}, {y0}, {x1}, {y1}]"),
        });
    }
    Ok(())
}

impl ImageFeatureBundle {
    /// Structural validation: boxes in range, feature vectors finite, and
    /// all vectors of a kind sharing one dimension. `line` feeds error
    /// messages when the bundle came from a file.
    pub fn validate(&self, line: usize) -> Result<(), DataError> {
        let same_dim = |dims: &mut Option<usize>, got: usize, what: &str| match *dims {
            Some(d) if d != got => Err(DataError::Malformed {
                line,
                message: format!("{what} dimension {got} conflicts with {d}"),
            }),
            _ => {
                *dims = Some(got);
                Ok(())
            }
        };
        let finite = |v: &[f64], what: &str| {
            if v.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(DataError::Malformed {
                    line,
                    message: format!("{what} contains a non-finite value"),
                })
            }
        };

        let mut obj_dim = None;
        for obj in &self.objects {
            check_bbox(&obj.bbox, line)?;
            finite(&obj.feature, "object feature")?;
            same_dim(&mut obj_dim, obj.feature.len(), "object feature")?;
        }
        let (mut det_dim, mut rec_dim) = (None, None);
        for tok in &self.ocr {
            check_bbox(&tok.bbox, line)?;
            finite(&tok.det_feature, "detection feature")?;
            finite(&tok.rec_feature, "recognition feature")?;
            same_dim(&mut det_dim, tok.det_feature.len(), "detection feature")?;
            same_dim(&mut rec_dim, tok.rec_feature.len(), "recognition feature")?;
        }
        if self.grid.is_empty() {
            return Err(DataError::Malformed {
                line,
                message: "grid must contain at least one feature row".into(),
            });
        }
        let mut grid_dim = None;
        for row in &self.grid {
            finite(row, "grid row")?;
            same_dim(&mut grid_dim, row.len(), "grid row")?;
        }
        Ok(())
    }
}

/// Reading order: top-left to bottom-right, with y binned into bands of
/// 0.05 so tokens on one visual line sort left to right.
pub fn sort_reading_order(tokens: &mut [OcrToken]) {
    tokens.sort_by(|a, b| {
        let band_a = (a.bbox[1] / 0.05).floor() as i64;
        let band_b = (b.bbox[1] / 0.05).floor() as i64;
        band_a.cmp(&band_b).then_with(|| {
            a.bbox[0]
                .partial_cmp(&b.bbox[0])
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
}

/// Parses a feature-bundle file: one JSON object per line, validated.
pub fn parse_bundles(input: &str) -> Result<Vec<ImageFeatureBundle>, DataError> {
    let mut bundles = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let bundle: ImageFeatureBundle =
            serde_json::from_str(line).map_err(|e| DataError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        bundle.validate(line_no)?;
        bundles.push(bundle);
    }
    Ok(bundles)
}

pub fn read_bundles(path: impl AsRef<Path>) -> Result<Vec<ImageFeatureBundle>, DataError> {
    let text = fs::read_to_string(path)?;
    parse_bundles(&text)
}

pub fn write_bundles(
    path: impl AsRef<Path>,
    bundles: &[ImageFeatureBundle],
) -> Result<(), DataError> {
    let mut out = Vec::new();
    for bundle in bundles {
        serde_json::to_writer(&mut out, bundle).expect("bundle serialization cannot fail");
        out.push(b'\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

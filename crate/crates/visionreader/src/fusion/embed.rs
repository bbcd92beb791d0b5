use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{FusionConfig, FusionError, FusionParams};
use crate::data::{ImageFeatureBundle, ObjectRegion, OcrToken, Vocabulary, SEP_ID};
use crate::math::Matrix;

/// Normalizes pixel box corners by image size: `[x_min/w, y_min/h,
/// x_max/w, y_max/h]`, each in `[0, 1]`.
pub fn normalize_bbox(
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
    width: f64,
    height: f64,
) -> Result<[f64; 4], FusionError> {
    if width.is_nan() || width <= 0.0 {
        return Err(FusionError::Bbox(format!(
            "width must be positive, got {width}"
        )));
    }
    if height.is_nan() || height <= 0.0 {
        return Err(FusionError::Bbox(format!(
            "height must be positive, got {height}"
        )));
    }
    if x_min < 0.0 {
        return Err(FusionError::Bbox(format!("x_min is negative: {x_min}")));
    }
    if y_min < 0.0 {
        return Err(FusionError::Bbox(format!("y_min is negative: {y_min}")));
    }
    if x_min > x_max {
        return Err(FusionError::Bbox(format!(
            "x_min {x_min} exceeds x_max {x_max}"
        )));
    }
    if y_min > y_max {
        return Err(FusionError::Bbox(format!(
            "y_min {y_min} exceeds y_max {y_max}"
        )));
    }
    if x_max > width {
        return Err(FusionError::Bbox(format!(
            "x_max {x_max} exceeds image width {width}"
        )));
    }
    if y_max > height {
        return Err(FusionError::Bbox(format!(
            "y_max {y_max} exceeds image height {height}"
        )));
    }
    Ok([x_min / width, y_min / height, x_max / width, y_max / height])
}

fn rows_to_matrix(rows: usize, cols: usize, get: impl Fn(usize) -> Vec<f64>) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    for r in 0..rows {
        m.row_mut(r).copy_from_slice(&get(r));
    }
    m
}

fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<(), FusionError> {
    if expected == got {
        Ok(())
    } else {
        Err(FusionError::Dimension {
            what,
            expected,
            got,
        })
    }
}

/// Region embeddings: row i is `feature_i · W_obj + bbox_i · W_box`.
pub fn embed_objects(
    objects: &[ObjectRegion],
    params: &FusionParams,
) -> Result<Matrix, FusionError> {
    let d = params.w_obj.cols();
    if objects.is_empty() {
        return Ok(Matrix::zeros(0, d));
    }
    for obj in objects {
        check_dim("object feature", params.w_obj.rows(), obj.feature.len())?;
    }
    let features = rows_to_matrix(objects.len(), params.w_obj.rows(), |i| {
        objects[i].feature.clone()
    });
    let boxes = rows_to_matrix(objects.len(), 4, |i| objects[i].bbox.to_vec());
    Ok(features
        .matmul(&params.w_obj)
        .add(&boxes.matmul(&params.w_box)))
}

/// OCR embeddings: the first m rows are projected detection features, the
/// last m rows projected recognition features, both offset by the
/// projected boxes. Callers supply tokens already in reading order.
pub fn embed_ocr(tokens: &[OcrToken], params: &FusionParams) -> Result<Matrix, FusionError> {
    let d = params.w_det.cols();
    if tokens.is_empty() {
        return Ok(Matrix::zeros(0, d));
    }
    for tok in tokens {
        check_dim(
            "detection feature",
            params.w_det.rows(),
            tok.det_feature.len(),
        )?;
        check_dim(
            "recognition feature",
            params.w_rec.rows(),
            tok.rec_feature.len(),
        )?;
    }
    let det = rows_to_matrix(tokens.len(), params.w_det.rows(), |i| {
        tokens[i].det_feature.clone()
    });
    let rec = rows_to_matrix(tokens.len(), params.w_rec.rows(), |i| {
        tokens[i].rec_feature.clone()
    });
    let boxes = rows_to_matrix(tokens.len(), 4, |i| tokens[i].bbox.to_vec());
    let projected_boxes = boxes.matmul(params.ocr_box_projection());
    let det_rows = det.matmul(&params.w_det).add(&projected_boxes);
    let rec_rows = rec.matmul(&params.w_rec).add(&projected_boxes);
    Ok(Matrix::vstack(&[&det_rows, &rec_rows]))
}

/// Token-embeds the text sequence: question ⊕ sep ⊕ OCR text, truncated to
/// `max_len` by dropping the OCR tail first (the question is never cut
/// unless it alone exceeds the cap). `ocr_tokens: None` ablates the OCR
/// text channel entirely, separator included.
///
/// Returns the embedded rows and the token ids they came from.
pub fn embed_text(
    question_tokens: &[String],
    ocr_tokens: Option<&[String]>,
    vocab: &Vocabulary,
    params: &FusionParams,
    max_len: usize,
) -> Result<(Matrix, Vec<usize>), FusionError> {
    if question_tokens.is_empty() {
        return Err(FusionError::EmptyQuestion);
    }
    let mut ids: Vec<usize> = question_tokens.iter().map(|t| vocab.id_of(t)).collect();
    if let Some(ocr) = ocr_tokens {
        ids.push(SEP_ID);
        ids.extend(ocr.iter().map(|t| vocab.id_of(t)));
    }
    ids.truncate(max_len);

    let d = params.token_embedding.cols();
    let mut rows = Matrix::zeros(ids.len(), d);
    for (r, &id) in ids.iter().enumerate() {
        if id >= params.token_embedding.rows() {
            return Err(FusionError::Dimension {
                what: "token id outside embedding table",
                expected: params.token_embedding.rows(),
                got: id,
            });
        }
        rows.row_mut(r)
            .copy_from_slice(params.token_embedding.row(id));
    }
    Ok((rows, ids))
}

/// Projects grid features row-wise. The grid source is frozen input; only
/// the projection is learnable.
pub fn embed_grid(grid: &Matrix, params: &FusionParams) -> Result<Matrix, FusionError> {
    check_dim("grid feature", params.w_grid.rows(), grid.cols())?;
    Ok(grid.matmul(&params.w_grid))
}

/// Offsets of the four segments inside the fused matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSpans {
    pub text: Range<usize>,
    pub grid: Range<usize>,
    pub objects: Range<usize>,
    pub ocr: Range<usize>,
}

/// The concatenated encoder input and where each segment sits in it.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedInput {
    pub matrix: Matrix,
    pub spans: SegmentSpans,
}

impl FusedInput {
    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }
}

/// Row-wise concatenation in the fixed order text, grid, objects, OCR.
/// Ablated segments arrive as empty matrices and occupy empty spans.
pub fn fuse(
    text: &Matrix,
    grid: &Matrix,
    objects: &Matrix,
    ocr: &Matrix,
) -> Result<FusedInput, FusionError> {
    let d = text.cols();
    for segment in [grid, objects, ocr] {
        if segment.rows() > 0 && segment.cols() != d {
            return Err(FusionError::Width {
                expected: d,
                got: segment.cols(),
            });
        }
    }
    let t = text.rows();
    let g = grid.rows();
    let k = objects.rows();
    let s = ocr.rows();
    let spans = SegmentSpans {
        text: 0..t,
        grid: t..t + g,
        objects: t + g..t + g + k,
        ocr: t + g + k..t + g + k + s,
    };
    Ok(FusedInput {
        matrix: Matrix::vstack(&[text, grid, objects, ocr]),
        spans,
    })
}

/// Which input channels to drop for an ablation run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationFlags {
    #[serde(default)]
    pub no_object: bool,
    #[serde(default)]
    pub no_ocr: bool,
}

/// A fused example plus everything the backward pass needs to push
/// gradients into the fusion parameters.
#[derive(Debug, Clone)]
pub struct EmbeddedExample {
    pub fused: FusedInput,
    pub text_ids: Vec<usize>,
    pub grid: Matrix,
    pub obj_features: Matrix,
    pub obj_boxes: Matrix,
    pub det_features: Matrix,
    pub rec_features: Matrix,
    pub ocr_boxes: Matrix,
}

/// Embeds one (question, image) pair end to end: text, grid, objects, and
/// OCR, honoring ablation flags, and concatenates.
pub fn embed_example(
    question_tokens: &[String],
    bundle: &ImageFeatureBundle,
    vocab: &Vocabulary,
    params: &FusionParams,
    config: &FusionConfig,
    ablation: AblationFlags,
) -> Result<EmbeddedExample, FusionError> {
    let ocr_texts: Vec<String> = bundle.ocr.iter().map(|t| t.text.clone()).collect();
    let (text, text_ids) = embed_text(
        question_tokens,
        if ablation.no_ocr {
            None
        } else {
            Some(&ocr_texts)
        },
        vocab,
        params,
        config.max_text_len,
    )?;

    let grid = Matrix::from_rows(&bundle.grid);
    let grid_seg = if grid.rows() == 0 {
        Matrix::zeros(0, config.d_model)
    } else {
        embed_grid(&grid, params)?
    };

    let objects: &[ObjectRegion] = if ablation.no_object {
        &[]
    } else {
        &bundle.objects
    };
    let obj_seg = embed_objects(objects, params)?;

    let ocr_tokens: &[OcrToken] = if ablation.no_ocr { &[] } else { &bundle.ocr };
    let ocr_seg = embed_ocr(ocr_tokens, params)?;

    let fused = fuse(&text, &grid_seg, &obj_seg, &ocr_seg)?;

    let obj_features = rows_to_matrix(objects.len(), config.f_obj, |i| objects[i].feature.clone());
    let obj_boxes = rows_to_matrix(objects.len(), 4, |i| objects[i].bbox.to_vec());
    let det_features = rows_to_matrix(ocr_tokens.len(), config.f_det, |i| {
        ocr_tokens[i].det_feature.clone()
    });
    let rec_features = rows_to_matrix(ocr_tokens.len(), config.f_rec, |i| {
        ocr_tokens[i].rec_feature.clone()
    });
    let ocr_boxes = rows_to_matrix(ocr_tokens.len(), 4, |i| ocr_tokens[i].bbox.to_vec());

    Ok(EmbeddedExample {
        fused,
        text_ids,
        grid,
        obj_features,
        obj_boxes,
        det_features,
        rec_features,
        ocr_boxes,
    })
}

/// Accumulates fusion-parameter gradients given the gradient of the loss
/// with respect to the fused matrix.
pub fn fusion_backward(d_fused: &Matrix, example: &EmbeddedExample, grads: &mut FusionParams) {
    let spans = &example.fused.spans;

    for (offset, row) in spans.text.clone().enumerate() {
        let id = example.text_ids[offset];
        let dst = grads.token_embedding.row_mut(id);
        for (d, &g) in dst.iter_mut().zip(d_fused.row(row)) {
            *d += g;
        }
    }

    if !spans.grid.is_empty() {
        let d_grid = d_fused.row_slice(spans.grid.start, spans.grid.end);
        grads.w_grid.add_assign(&example.grid.matmul_at(&d_grid));
    }

    if !spans.objects.is_empty() {
        let d_obj = d_fused.row_slice(spans.objects.start, spans.objects.end);
        grads
            .w_obj
            .add_assign(&example.obj_features.matmul_at(&d_obj));
        grads.w_box.add_assign(&example.obj_boxes.matmul_at(&d_obj));
    }

    if !spans.ocr.is_empty() {
        let m = spans.ocr.len() / 2;
        let d_det = d_fused.row_slice(spans.ocr.start, spans.ocr.start + m);
        let d_rec = d_fused.row_slice(spans.ocr.start + m, spans.ocr.end);
        grads
            .w_det
            .add_assign(&example.det_features.matmul_at(&d_det));
        grads
            .w_rec
            .add_assign(&example.rec_features.matmul_at(&d_rec));
        let d_boxes = example
            .ocr_boxes
            .matmul_at(&d_det)
            .add(&example.ocr_boxes.matmul_at(&d_rec));
        match &mut grads.w_box_ocr {
            Some(w) => w.add_assign(&d_boxes),
            None => grads.w_box.add_assign(&d_boxes),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn config() -> FusionConfig {
        FusionConfig {
            d_model: 8,
            f_obj: 6,
            f_det: 5,
            f_rec: 5,
            f_grid: 7,
            max_text_len: 16,
            seed: 42,
            share_box_projection: true,
        }
    }

    fn params() -> FusionParams {
        FusionParams::init(&config(), 12)
    }

    fn words(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| (*s).to_owned()).collect()
    }

    #[test]
    fn full_image_box_normalizes_to_unit() {
        let b = normalize_bbox(0.0, 0.0, 640.0, 480.0, 640.0, 480.0).unwrap();
        assert_eq!(b, [0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn direct_division_example() {
        let b = normalize_bbox(10.0, 20.0, 30.0, 40.0, 100.0, 200.0).unwrap();
        assert_eq!(b, [0.1, 0.1, 0.3, 0.2]);
    }

    #[test]
    fn inverted_corners_error_names_coordinate() {
        let err = normalize_bbox(30.0, 0.0, 10.0, 10.0, 100.0, 100.0).unwrap_err();
        assert!(err.to_string().contains("x_min"));
        let err = normalize_bbox(0.0, 0.0, 10.0, 10.0, 100.0, -5.0).unwrap_err();
        assert!(err.to_string().contains("height"));
    }

    #[test]
    fn zero_object_inputs_give_zero_rows() {
        let p = params();
        let zero_obj = ObjectRegion {
            feature: vec![0.0; 6],
            bbox: [0.0; 4],
        };
        let out = embed_objects(&[zero_obj], &p).unwrap();
        assert!(out.row(0).iter().all(|&v| v == 0.0));
        let empty = embed_objects(&[], &p).unwrap();
        assert_eq!(empty.rows(), 0);
        assert_eq!(empty.cols(), 8);
    }

    #[test]
    fn object_embedding_matches_loop_oracle() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let obj = ObjectRegion {
            feature: (0..6).map(|_| rng.random_range(-1.0..1.0)).collect(),
            bbox: [0.1, 0.2, 0.6, 0.9],
        };
        let out = embed_objects(std::slice::from_ref(&obj), &p).unwrap();
        for c in 0..8 {
            let mut want = 0.0;
            for (i, &f) in obj.feature.iter().enumerate() {
                want += f * p.w_obj.get(i, c);
            }
            for (i, &b) in obj.bbox.iter().enumerate() {
                want += b * p.w_box.get(i, c);
            }
            assert!((out.get(0, c) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn object_embedding_is_linear() {
        let p = params();
        let obj = ObjectRegion {
            feature: vec![0.3, -0.2, 0.7, 0.1, 0.0, 0.5],
            bbox: [0.1, 0.1, 0.5, 0.6],
        };
        let alpha = 2.5;
        let scaled = ObjectRegion {
            feature: obj.feature.iter().map(|v| v * alpha).collect(),
            bbox: obj.bbox.map(|v| v * alpha),
        };
        let base = embed_objects(std::slice::from_ref(&obj), &p).unwrap();
        let stretched = embed_objects(std::slice::from_ref(&scaled), &p).unwrap();
        for c in 0..8 {
            assert!((stretched.get(0, c) - alpha * base.get(0, c)).abs() < 1e-9);
        }
    }

    #[test]
    fn permuting_objects_permutes_rows() {
        let p = params();
        let mk = |s: f64| ObjectRegion {
            feature: vec![s; 6],
            bbox: [0.0, 0.0, 0.5, 0.5],
        };
        let forward = embed_objects(&[mk(1.0), mk(2.0), mk(3.0)], &p).unwrap();
        let reversed = embed_objects(&[mk(3.0), mk(2.0), mk(1.0)], &p).unwrap();
        assert_eq!(forward.row(0), reversed.row(2));
        assert_eq!(forward.row(1), reversed.row(1));
    }

    #[test]
    fn ocr_embedding_shape_and_zero_token() {
        let p = params();
        assert_eq!(embed_ocr(&[], &p).unwrap().rows(), 0);
        let zero = OcrToken {
            text: "x".into(),
            bbox: [0.0; 4],
            det_feature: vec![0.0; 5],
            rec_feature: vec![0.0; 5],
        };
        let out = embed_ocr(&[zero], &p).unwrap();
        assert_eq!(out.rows(), 2);
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ocr_embedding_matches_loop_oracle() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let tok = OcrToken {
            text: "kim".into(),
            bbox: [0.1, 0.3, 0.4, 0.5],
            det_feature: (0..5).map(|_| rng.random_range(-1.0..1.0)).collect(),
            rec_feature: (0..5).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        let out = embed_ocr(std::slice::from_ref(&tok), &p).unwrap();
        for c in 0..8 {
            let mut det_want = 0.0;
            let mut rec_want = 0.0;
            for i in 0..5 {
                det_want += tok.det_feature[i] * p.w_det.get(i, c);
                rec_want += tok.rec_feature[i] * p.w_rec.get(i, c);
            }
            let mut box_want = 0.0;
            for i in 0..4 {
                box_want += tok.bbox[i] * p.w_box.get(i, c);
            }
            assert!((out.get(0, c) - (det_want + box_want)).abs() < 1e-12);
            assert!((out.get(1, c) - (rec_want + box_want)).abs() < 1e-12);
        }
    }

    #[test]
    fn text_rows_are_table_lookups() {
        let p = params();
        let vocab = Vocabulary::from_tokens(words(&["ai", "viết", "kim"]));
        let (rows, ids) = embed_text(
            &words(&["ai", "viết"]),
            Some(&words(&["kim"])),
            &vocab,
            &p,
            16,
        )
        .unwrap();
        assert_eq!(rows.rows(), 4); // 2 question + sep + 1 ocr
        assert_eq!(ids, vec![5, 6, SEP_ID, 7]);
        for (r, &id) in ids.iter().enumerate() {
            assert_eq!(rows.row(r), p.token_embedding.row(id));
        }
    }

    #[test]
    fn question_without_ocr_text_keeps_separator() {
        let p = params();
        let vocab = Vocabulary::from_tokens(words(&["một", "hai", "ba"]));
        let (rows, _) =
            embed_text(&words(&["một", "hai", "ba"]), Some(&[]), &vocab, &p, 16).unwrap();
        assert_eq!(rows.rows(), 4);
    }

    #[test]
    fn ablated_ocr_drops_separator_too() {
        let p = params();
        let vocab = Vocabulary::from_tokens(words(&["một", "hai"]));
        let (rows, _) = embed_text(&words(&["một", "hai"]), None, &vocab, &p, 16).unwrap();
        assert_eq!(rows.rows(), 2);
    }

    #[test]
    fn overlong_text_truncates_to_cap() {
        let p = params();
        let vocab = Vocabulary::from_tokens(words(&["q", "o"]));
        let question = vec!["q".to_owned(); 6];
        let ocr = vec!["o".to_owned(); 32];
        let (rows, ids) = embed_text(&question, Some(&ocr), &vocab, &p, 16).unwrap();
        assert_eq!(rows.rows(), 16);
        // question survives in full, OCR tail is cut
        assert!(ids[..6].iter().all(|&id| id == vocab.id_of("q")));
        assert_eq!(ids[6], SEP_ID);
    }

    #[test]
    fn empty_question_is_an_error() {
        let p = params();
        let vocab = Vocabulary::from_tokens(Vec::new());
        assert!(matches!(
            embed_text(&[], None, &vocab, &p, 8),
            Err(FusionError::EmptyQuestion)
        ));
    }

    #[test]
    fn grid_projection_matches_identity_when_square() {
        let mut c = config();
        c.f_grid = c.d_model;
        let mut p = FusionParams::init(&c, 12);
        p.w_grid = Matrix::from_fn(
            c.d_model,
            c.d_model,
            |r, col| if r == col { 1.0 } else { 0.0 },
        );
        let grid = Matrix::from_fn(3, c.d_model, |r, col| (r * 10 + col) as f64);
        let out = embed_grid(&grid, &p).unwrap();
        assert_eq!(out, grid);
    }

    #[test]
    fn zero_grid_projects_to_zero() {
        let p = params();
        let grid = Matrix::zeros(4, 7);
        let out = embed_grid(&grid, &p).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_projection_matches_loop_oracle() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let grid = Matrix::from_fn(3, 7, |_, _| rng.random_range(-1.0..1.0));
        let out = embed_grid(&grid, &p).unwrap();
        for r in 0..3 {
            for c in 0..8 {
                let mut want = 0.0;
                for k in 0..7 {
                    want += grid.get(r, k) * p.w_grid.get(k, c);
                }
                assert!((out.get(r, c) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fuse_records_exact_spans() {
        let t = Matrix::zeros(4, 8);
        let v = Matrix::zeros(2, 8);
        let o = Matrix::zeros(3, 8);
        let s = Matrix::zeros(6, 8);
        let fused = fuse(&t, &v, &o, &s).unwrap();
        assert_eq!(fused.rows(), 15);
        assert_eq!(fused.spans.text, 0..4);
        assert_eq!(fused.spans.grid, 4..6);
        assert_eq!(fused.spans.objects, 6..9);
        assert_eq!(fused.spans.ocr, 9..15);
    }

    #[test]
    fn fuse_rejects_width_mismatch() {
        let t = Matrix::zeros(2, 8);
        let bad = Matrix::zeros(2, 7);
        assert!(matches!(
            fuse(&t, &bad, &Matrix::zeros(0, 8), &Matrix::zeros(0, 8)),
            Err(FusionError::Width { .. })
        ));
    }

    fn bundle() -> ImageFeatureBundle {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut vecf =
            |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
        ImageFeatureBundle {
            image_id: "b1".into(),
            objects: vec![
                ObjectRegion {
                    feature: vecf(6),
                    bbox: [0.0, 0.0, 0.4, 0.4],
                },
                ObjectRegion {
                    feature: vecf(6),
                    bbox: [0.2, 0.3, 0.9, 1.0],
                },
            ],
            ocr: vec![
                OcrToken {
                    text: "kim".into(),
                    bbox: [0.1, 0.1, 0.3, 0.2],
                    det_feature: vecf(5),
                    rec_feature: vecf(5),
                },
                OcrToken {
                    text: "đồng".into(),
                    bbox: [0.4, 0.1, 0.6, 0.2],
                    det_feature: vecf(5),
                    rec_feature: vecf(5),
                },
            ],
            grid: (0..3).map(|_| vecf(7)).collect(),
        }
    }

    #[test]
    fn embed_example_row_count_law() {
        let p = params();
        let vocab = Vocabulary::from_tokens(words(&["ai", "viết", "kim", "đồng"]));
        let question = words(&["ai", "viết"]);

        let full = embed_example(
            &question,
            &bundle(),
            &vocab,
            &p,
            &config(),
            AblationFlags::default(),
        )
        .unwrap();
        // len(T) = 2 question + sep + 2 ocr text = 5; G=3; k=2; 2m=4
        assert_eq!(full.fused.rows(), 5 + 3 + 2 + 4);

        let no_obj = embed_example(
            &question,
            &bundle(),
            &vocab,
            &p,
            &config(),
            AblationFlags {
                no_object: true,
                no_ocr: false,
            },
        )
        .unwrap();
        assert_eq!(no_obj.fused.rows(), 5 + 3 + 4);
        assert_eq!(no_obj.fused.spans.objects.len(), 0);

        let no_ocr = embed_example(
            &question,
            &bundle(),
            &vocab,
            &p,
            &config(),
            AblationFlags {
                no_object: false,
                no_ocr: true,
            },
        )
        .unwrap();
        // question-only text, no OCR feature rows
        assert_eq!(no_ocr.fused.rows(), 2 + 3 + 2);
    }
}

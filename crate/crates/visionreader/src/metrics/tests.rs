use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;

fn opts() -> MetricOptions {
    MetricOptions::default()
}

fn raw() -> MetricOptions {
    MetricOptions {
        normalize: false,
        literal_eq9: false,
    }
}

fn pair(truth: &str, pred: &str, category: Category) -> EvalPair {
    EvalPair {
        ground_truth: truth.into(),
        prediction: pred.into(),
        category,
        metadata: BTreeMap::new(),
    }
}

#[test]
fn exact_match_identity() {
    assert_eq!(
        exact_match("nhà xuất bản trẻ", "nhà xuất bản trẻ", opts()),
        1.0
    );
}

#[test]
fn exact_match_differs() {
    assert_eq!(exact_match("a b", "a c", opts()), 0.0);
}

#[test]
fn exact_match_case_depends_on_normalization() {
    assert_eq!(exact_match("Kim Đồng", "kim đồng", opts()), 1.0);
    assert_eq!(exact_match("Kim Đồng", "kim đồng", raw()), 0.0);
}

#[test]
fn token_f1_hand_case() {
    let scores = token_f1("a b c", "a b", opts());
    assert!((scores.precision - 1.0).abs() < 1e-12);
    assert!((scores.recall - 2.0 / 3.0).abs() < 1e-12);
    assert!((scores.f1 - 0.8).abs() < 1e-12);
}

#[test]
fn token_f1_literal_mode_halves_hand_case() {
    let literal = MetricOptions {
        literal_eq9: true,
        ..opts()
    };
    let scores = token_f1("a b c", "a b", literal);
    assert!((scores.f1 - 0.4).abs() < 1e-12);
}

#[test]
fn token_f1_identical_strings() {
    let scores = token_f1("một hai ba", "một hai ba", opts());
    assert_eq!(
        (scores.precision, scores.recall, scores.f1),
        (1.0, 1.0, 1.0)
    );
}

#[test]
fn token_f1_disjoint_strings() {
    let scores = token_f1("a b", "c d", opts());
    assert_eq!(
        (scores.precision, scores.recall, scores.f1),
        (0.0, 0.0, 0.0)
    );
}

#[test]
fn token_f1_empty_prediction_is_zero() {
    let scores = token_f1("a", "", opts());
    assert_eq!(
        (scores.precision, scores.recall, scores.f1),
        (0.0, 0.0, 0.0)
    );
}

#[test]
fn token_f1_counts_multiset_overlap() {
    // gold has "a" twice; prediction supplies it three times. Only two match,
    // so precision is penalized.
    let scores = token_f1("a a b", "a a a", opts());
    assert!((scores.precision - 2.0 / 3.0).abs() < 1e-12);
    assert!((scores.recall - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn evaluate_means_over_pairs() {
    let pairs = vec![
        pair("x", "x", Category::Title),
        pair("x", "y", Category::Author),
    ];
    let report = evaluate(&pairs, opts()).unwrap();
    assert!((report.em - 0.5).abs() < 1e-12);
    assert_eq!(report.n, 2);
    assert_eq!(report.per_category.len(), 2);
}

#[test]
fn evaluate_all_identical() {
    let pairs = vec![pair("một", "một", Category::Genre); 4];
    let report = evaluate(&pairs, opts()).unwrap();
    assert_eq!((report.em, report.f1), (1.0, 1.0));
}

#[test]
fn evaluate_rejects_empty_input() {
    assert!(matches!(
        evaluate(&[], opts()),
        Err(MetricsError::EmptyInput)
    ));
}

#[test]
fn per_category_counts_sum_to_n() {
    let pairs = vec![
        pair("a", "a", Category::Title),
        pair("b", "b", Category::Title),
        pair("c", "d", Category::Author),
    ];
    let report = evaluate(&pairs, opts()).unwrap();
    let total: usize = report.per_category.values().map(|b| b.n).sum();
    assert_eq!(total, report.n);
}

#[test]
fn bucket_grouping_requires_metadata() {
    let pairs = vec![pair("a", "a", Category::Title)];
    let err = evaluate_by_bucket(&pairs, "answer_len", opts()).unwrap_err();
    assert!(err.to_string().contains("answer_len"));
}

#[test]
fn bucket_grouping_scores_each_label() {
    let mut with_label = pair("a", "a", Category::Title);
    with_label
        .metadata
        .insert("answer_len".into(), "short".into());
    let mut other = pair("a b c d e f", "x", Category::Title);
    other.metadata.insert("answer_len".into(), "medium".into());
    let buckets = evaluate_by_bucket(&[with_label, other], "answer_len", opts()).unwrap();
    assert_eq!(buckets.len(), 2);
    assert_eq!(buckets["short"].em, 1.0);
    assert_eq!(buckets["medium"].em, 0.0);
}

#[test]
fn agreement_copying_gold_is_perfect() {
    let gold = vec![
        (Category::Author, "tô hoài".to_owned()),
        (Category::Title, "dế mèn".to_owned()),
    ];
    let humans = vec![vec!["tô hoài".to_owned(), "dế mèn".to_owned()]];
    let report = agreement_study(&gold, &humans, opts()).unwrap();
    assert_eq!(report.average.em, 1.0);
    assert_eq!(report.average.f1, 1.0);
    for block in report.per_field.values() {
        assert_eq!(block.em, 1.0);
    }
}

#[test]
fn agreement_single_annotator_half_match() {
    let gold = vec![
        (Category::Genre, "văn học".to_owned()),
        (Category::Genre, "thiếu nhi".to_owned()),
    ];
    let humans = vec![vec!["văn học".to_owned(), "kinh tế".to_owned()]];
    let report = agreement_study(&gold, &humans, opts()).unwrap();
    assert!((report.per_field[&Category::Genre].em - 0.5).abs() < 1e-12);
}

#[test]
fn agreement_length_mismatch_is_rejected() {
    let gold = vec![(Category::Author, "x".to_owned())];
    let humans = vec![vec![]];
    assert!(matches!(
        agreement_study(&gold, &humans, opts()),
        Err(MetricsError::LengthMismatch { .. })
    ));
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| (*s).to_owned()).collect()
}

#[test]
fn coverage_all_tokens_found() {
    let bucket = ocr_coverage_bucket("kim đồng", &strings(&["kim", "đồng", "xtra"]), opts());
    assert_eq!(bucket, CoverageBucket::Q100);
}

#[test]
fn coverage_quarter_boundary() {
    let bucket = ocr_coverage_bucket("a b c d", &strings(&["a"]), opts());
    assert_eq!(bucket, CoverageBucket::Q25);
}

#[test]
fn coverage_three_quarters() {
    let bucket = ocr_coverage_bucket("a b c d", &strings(&["a", "b", "c"]), opts());
    assert_eq!(bucket, CoverageBucket::Q75);
}

#[test]
fn coverage_none_found() {
    let bucket = ocr_coverage_bucket("a b", &strings(&["z"]), opts());
    assert_eq!(bucket, CoverageBucket::Q25);
}

#[test]
fn coverage_between_thresholds_rounds_up() {
    // 2 of 5 = 0.4 → the 50 bucket.
    let bucket = ocr_coverage_bucket("a b c d e", &strings(&["a", "b"]), opts());
    assert_eq!(bucket, CoverageBucket::Q50);
}

proptest! {
    #[test]
    fn f1_symmetric_under_swap(a in "[a-c ]{0,12}", b in "[a-c ]{0,12}") {
        let left = token_f1(&a, &b, raw());
        let right = token_f1(&b, &a, raw());
        prop_assert!((left.f1 - right.f1).abs() < 1e-12);
        prop_assert!((left.precision - right.recall).abs() < 1e-12);
    }

    #[test]
    fn scores_stay_in_unit_interval(a in "\\PC{0,24}", b in "\\PC{0,24}") {
        let scores = token_f1(&a, &b, opts());
        prop_assert!((0.0..=1.0).contains(&scores.precision));
        prop_assert!((0.0..=1.0).contains(&scores.recall));
        prop_assert!((0.0..=1.0).contains(&scores.f1));
        let em = exact_match(&a, &b, opts());
        prop_assert!(em == 0.0 || em == 1.0);
    }

    #[test]
    fn exact_match_symmetric(a in "\\PC{0,24}", b in "\\PC{0,24}") {
        prop_assert_eq!(exact_match(&a, &b, opts()), exact_match(&b, &a, opts()));
    }

    #[test]
    fn em_one_implies_f1_one(a in "[a-d ]{1,16}") {
        prop_assume!(!a.trim().is_empty());
        let scores = token_f1(&a, &a, opts());
        prop_assert!((scores.f1 - 1.0).abs() < 1e-12);
    }
}

#[test]
fn concatenated_report_is_weighted_mean() {
    let first = vec![pair("a", "a", Category::Title); 3];
    let second = vec![pair("a", "b", Category::Author); 1];
    let all: Vec<EvalPair> = first.iter().chain(&second).cloned().collect();

    let r1 = evaluate(&first, opts()).unwrap();
    let r2 = evaluate(&second, opts()).unwrap();
    let combined = evaluate(&all, opts()).unwrap();

    let expected_em = (r1.em * r1.n as f64 + r2.em * r2.n as f64) / (r1.n + r2.n) as f64;
    let expected_f1 = (r1.f1 * r1.n as f64 + r2.f1 * r2.n as f64) / (r1.n + r2.n) as f64;
    assert!((combined.em - expected_em).abs() < 1e-12);
    assert!((combined.f1 - expected_f1).abs() < 1e-12);
}

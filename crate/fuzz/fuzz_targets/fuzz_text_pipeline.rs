//! Text plumbing on arbitrary strings: tokenization fixed point, metric
//! bounds, and cleaner idempotence.

#![no_main]

use libfuzzer_sys::fuzz_target;
use visionreader::data::{detokenize, normalize_answer, tokenize};
use visionreader::forge::Cleaner;
use visionreader::metrics::{exact_match, token_f1, MetricOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let mid = text.len() / 2;
    let (a, b) = if text.is_char_boundary(mid) {
        text.split_at(mid)
    } else {
        (text, "")
    };

    let tokens = tokenize(a);
    assert_eq!(tokenize(&detokenize(&tokens)), tokens);
    assert_eq!(normalize_answer(&normalize_answer(a)), normalize_answer(a));

    let opts = MetricOptions::default();
    let scores = token_f1(a, b, opts);
    for v in [scores.precision, scores.recall, scores.f1] {
        assert!((0.0..=1.0).contains(&v));
    }
    let em = exact_match(a, b, opts);
    assert!(em == 0.0 || em == 1.0);
    assert_eq!(em, exact_match(b, a, opts));

    static CLEANER: std::sync::OnceLock<Cleaner> = std::sync::OnceLock::new();
    let cleaner = CLEANER.get_or_init(Cleaner::default);
    let once = cleaner.clean_text(a);
    let twice = once.as_deref().and_then(|t| cleaner.clean_text(t));
    assert_eq!(once, twice);
});

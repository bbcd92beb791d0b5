/// Whitespace tokenization: consecutive whitespace collapses, leading and
/// trailing whitespace is ignored, and no case folding happens here.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

/// Joins tokens with single spaces; the inverse of [`tokenize`] up to
/// whitespace normalization.
pub fn detokenize(tokens: &[String]) -> String {
    tokens.join(" ")
}

/// Answer normalization applied before metric comparison: lowercase and
/// collapse whitespace. Diacritics are never stripped.
pub fn normalize_answer(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

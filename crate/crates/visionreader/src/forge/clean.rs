use regex::Regex;

use super::ForgeError;
use crate::data::BookMetadata;

/// Listing-text cleaner: strips punctuation, removes promotional phrases,
/// and collapses whitespace. A second pass finds nothing left to remove,
/// so cleaning is idempotent.
#[derive(Debug, Clone)]
pub struct Cleaner {
    punctuation: Regex,
    extraneous: Vec<Regex>,
}

/// Promotional noise that book listings carry but covers do not. The list
/// is a starting point; callers extend it per source.
const DEFAULT_EXTRANEOUS: [&str; 4] = [
    r"(?i)tái bản(\s+\d{4})?",
    r"(?i)tặng kèm.*$",
    r"(?i)bìa cứng",
    r"(?i)bìa mềm",
];

impl Default for Cleaner {
    fn default() -> Self {
        Self::with_patterns(DEFAULT_EXTRANEOUS.iter().copied()).expect("default patterns are valid")
    }
}

impl Cleaner {
    pub fn with_patterns<'a>(
        patterns: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self, ForgeError> {
        let extraneous = patterns
            .into_iter()
            .map(|p| {
                Regex::new(p).map_err(|e| ForgeError::BadPattern {
                    pattern: p.to_owned(),
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            punctuation: Regex::new(r"\p{P}").expect("punctuation class is valid"),
            extraneous,
        })
    }

    /// Cleans one text field. Returns `None` when nothing survives.
    pub fn clean_text(&self, raw: &str) -> Option<String> {
        let mut text = self.punctuation.replace_all(raw, "").into_owned();
        for pattern in &self.extraneous {
            text = pattern.replace_all(&text, "").into_owned();
        }
        let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
        if collapsed.is_empty() {
            None
        } else {
            Some(collapsed)
        }
    }

    /// Cleans every text field of a book. Optional fields that clean to
    /// nothing become absent; a title that cleans to nothing becomes the
    /// empty string, which `BookMetadata::field` reports as absent.
    pub fn clean(&self, raw: &BookMetadata) -> BookMetadata {
        BookMetadata {
            image_id: raw.image_id.clone(),
            title: self.clean_text(&raw.title).unwrap_or_default(),
            author: raw.author.as_deref().and_then(|v| self.clean_text(v)),
            publisher: raw.publisher.as_deref().and_then(|v| self.clean_text(v)),
            translator: raw.translator.as_deref().and_then(|v| self.clean_text(v)),
            genre: raw.genre.as_deref().and_then(|v| self.clean_text(v)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Category;
    use proptest::prelude::*;

    fn cleaner() -> Cleaner {
        Cleaner::default()
    }

    #[test]
    fn strips_reprint_suffix() {
        assert_eq!(
            cleaner().clean_text("Dế Mèn Phiêu Lưu Ký (tái bản 2024)"),
            Some("Dế Mèn Phiêu Lưu Ký".to_owned())
        );
    }

    #[test]
    fn slash_removal_joins_neighbors() {
        assert_eq!(cleaner().clean_text("a/b"), Some("ab".to_owned()));
    }

    #[test]
    fn all_punctuation_becomes_absent() {
        assert_eq!(cleaner().clean_text("!!!"), None);
    }

    #[test]
    fn bonus_suffix_is_dropped() {
        assert_eq!(
            cleaner().clean_text("Totto-chan tặng kèm bookmark gỗ"),
            Some("Tottochan".to_owned())
        );
    }

    #[test]
    fn empty_optional_fields_become_absent() {
        let raw = BookMetadata {
            image_id: "b9".into(),
            title: "Sách Hay (tái bản 2020)".into(),
            author: Some("...".into()),
            publisher: Some("NXB Trẻ".into()),
            translator: None,
            genre: Some("văn học".into()),
        };
        let cleaned = cleaner().clean(&raw);
        assert_eq!(cleaned.title, "Sách Hay");
        assert_eq!(cleaned.author, None);
        assert_eq!(cleaned.field(Category::Author), None);
        assert_eq!(cleaned.publisher.as_deref(), Some("NXB Trẻ"));
    }

    #[test]
    fn bad_pattern_is_reported() {
        let err = Cleaner::with_patterns(["("]).unwrap_err();
        assert!(matches!(err, ForgeError::BadPattern { .. }));
    }

    #[test]
    fn clean_is_idempotent_on_fixture_style_titles() {
        let c = cleaner();
        for raw in [
            "Dế Mèn Phiêu Lưu Ký (tái bản 2024)",
            "Harry Potter và Hòn Đá Phù Thủy - tặng kèm poster",
            "Toán 5, tập hai",
            "!!!",
            "  khoảng   trắng  thừa ",
        ] {
            let once = c.clean_text(raw);
            let twice = once.as_deref().and_then(|t| c.clean_text(t));
            assert_eq!(once, twice, "not idempotent for {raw:?}");
        }
    }

    proptest! {
        #[test]
        fn clean_text_idempotent(raw in "\\PC{0,48}") {
            let c = cleaner();
            let once = c.clean_text(&raw);
            let twice = once.as_deref().and_then(|t| c.clean_text(t));
            prop_assert_eq!(once, twice);
        }
    }
}

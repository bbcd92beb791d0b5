use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ForgeError;
use crate::data::{Category, CATEGORIES};

/// One annotated question pattern for a field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionTemplate {
    pub category: Category,
    pub text: String,
    #[serde(default)]
    pub template_id: usize,
}

#[derive(Debug, Deserialize)]
struct TemplateLine {
    category: Category,
    text: String,
}

/// The question bank, indexed by category. The bundled bank ships ten
/// questions per field; a production bank would carry the full 30-per-
/// annotator, 300-question set the collection protocol calls for.
#[derive(Debug, Clone)]
pub struct TemplateBank {
    templates: Vec<QuestionTemplate>,
    by_category: BTreeMap<Category, Vec<usize>>,
}

impl TemplateBank {
    pub fn new(templates: Vec<QuestionTemplate>) -> Self {
        let mut by_category: BTreeMap<Category, Vec<usize>> = BTreeMap::new();
        for (idx, template) in templates.iter().enumerate() {
            by_category.entry(template.category).or_default().push(idx);
        }
        Self {
            templates,
            by_category,
        }
    }

    /// The bank shipped with the crate.
    pub fn bundled() -> Self {
        parse_template_bank(include_str!("../../data/templates.jsonl"))
            .expect("bundled template bank is well-formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ForgeError> {
        let text = fs::read_to_string(path)?;
        parse_template_bank(&text)
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn templates(&self) -> &[QuestionTemplate] {
        &self.templates
    }

    pub fn for_category(&self, category: Category) -> Vec<&QuestionTemplate> {
        self.by_category
            .get(&category)
            .map(|ids| ids.iter().map(|&i| &self.templates[i]).collect())
            .unwrap_or_default()
    }

    /// Smallest per-category template count across all five fields.
    pub fn min_per_category(&self) -> usize {
        CATEGORIES
            .iter()
            .map(|c| self.by_category.get(c).map_or(0, Vec::len))
            .min()
            .unwrap_or(0)
    }

    /// Errors unless every requested category has at least one template.
    pub fn require(&self, categories: &[Category]) -> Result<(), ForgeError> {
        for &category in categories {
            if self.for_category(category).is_empty() {
                return Err(ForgeError::MissingTemplates { category });
            }
        }
        Ok(())
    }
}

/// Parses a JSONL template bank (`{"category": ..., "text": ...}` per
/// line). Ids are assigned by line order.
pub fn parse_template_bank(input: &str) -> Result<TemplateBank, ForgeError> {
    let mut templates = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TemplateLine =
            serde_json::from_str(line).map_err(|e| ForgeError::MalformedTemplate {
                line: line_no,
                message: e.to_string(),
            })?;
        if parsed.text.trim().is_empty() {
            return Err(ForgeError::MalformedTemplate {
                line: line_no,
                message: "template text is empty".into(),
            });
        }
        templates.push(QuestionTemplate {
            category: parsed.category,
            text: parsed.text,
            template_id: templates.len(),
        });
    }
    Ok(TemplateBank::new(templates))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_bank_covers_every_category() {
        let bank = TemplateBank::bundled();
        for category in CATEGORIES {
            assert!(
                bank.for_category(category).len() >= 5,
                "want at least 5 templates for {category}"
            );
        }
        assert!(bank.len() >= 25);
    }

    #[test]
    fn template_ids_follow_line_order() {
        let bank = parse_template_bank(
            "{\"category\":\"title\",\"text\":\"tên sách là gì?\"}\n{\"category\":\"author\",\"text\":\"ai viết?\"}\n",
        )
        .unwrap();
        assert_eq!(bank.templates()[0].template_id, 0);
        assert_eq!(bank.templates()[1].template_id, 1);
    }

    #[test]
    fn malformed_line_carries_line_number() {
        let err =
            parse_template_bank("{\"category\":\"title\",\"text\":\"x?\"}\nnope\n").unwrap_err();
        match err {
            ForgeError::MalformedTemplate { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn require_flags_missing_category() {
        let bank = parse_template_bank("{\"category\":\"title\",\"text\":\"x?\"}\n").unwrap();
        let err = bank.require(&[Category::Genre]).unwrap_err();
        assert!(matches!(
            err,
            ForgeError::MissingTemplates {
                category: Category::Genre
            }
        ));
    }
}

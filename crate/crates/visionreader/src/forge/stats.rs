use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Cleaner;
use crate::data::{tokenize, BookMetadata, Category, QARecord, CATEGORIES};

/// Corpus-level counts and averages, serialized as the stats report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub images: usize,
    pub questions: usize,
    pub answers: usize,
    pub per_category: BTreeMap<Category, usize>,
    pub unique_authors: usize,
    pub unique_titles: usize,
    pub unique_publishers: usize,
    pub unique_translators: usize,
    pub unique_genres: usize,
    pub avg_question_len: f64,
    pub avg_answer_len: f64,
    pub avg_questions_per_image: f64,
}

/// Counts and averages over a record list, with unique-value counts taken
/// over cleaned metadata.
pub fn compute_stats(records: &[QARecord], meta: &[BookMetadata]) -> CorpusStats {
    compute_stats_with(records, meta, &Cleaner::default())
}

pub fn compute_stats_with(
    records: &[QARecord],
    meta: &[BookMetadata],
    cleaner: &Cleaner,
) -> CorpusStats {
    let images: BTreeSet<&str> = records.iter().map(|r| r.image_id.as_str()).collect();
    let mut per_category: BTreeMap<Category, usize> = CATEGORIES.iter().map(|&c| (c, 0)).collect();
    let mut question_tokens = 0usize;
    let mut answer_tokens = 0usize;
    for record in records {
        *per_category.entry(record.category).or_insert(0) += 1;
        question_tokens += tokenize(&record.question).len();
        answer_tokens += tokenize(&record.answer).len();
    }

    let mut unique: BTreeMap<Category, BTreeSet<String>> = BTreeMap::new();
    for book in meta {
        let cleaned = cleaner.clean(book);
        for category in CATEGORIES {
            if let Some(value) = cleaned.field(category) {
                unique.entry(category).or_default().insert(value.to_owned());
            }
        }
    }
    let unique_count = |c: Category| unique.get(&c).map_or(0, BTreeSet::len);

    let n = records.len();
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    CorpusStats {
        images: images.len(),
        questions: n,
        answers: n,
        per_category,
        unique_authors: unique_count(Category::Author),
        unique_titles: unique_count(Category::Title),
        unique_publishers: unique_count(Category::Publisher),
        unique_translators: unique_count(Category::Translator),
        unique_genres: unique_count(Category::Genre),
        avg_question_len: ratio(question_tokens, n),
        avg_answer_len: ratio(answer_tokens, n),
        avg_questions_per_image: ratio(n, images.len()),
    }
}

/// Token-length buckets used by the length analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthBucket {
    Short,
    Medium,
    Long,
    VeryLong,
}

impl LengthBucket {
    /// Bucket for a token count: short ≤ 5, medium 6–10, long 11–15,
    /// very long ≥ 16.
    pub fn of(token_count: usize) -> Self {
        match token_count {
            0..=5 => LengthBucket::Short,
            6..=10 => LengthBucket::Medium,
            11..=15 => LengthBucket::Long,
            _ => LengthBucket::VeryLong,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            LengthBucket::Short => "short",
            LengthBucket::Medium => "medium",
            LengthBucket::Long => "long",
            LengthBucket::VeryLong => "very_long",
        }
    }

    pub const ALL: [LengthBucket; 4] = [
        LengthBucket::Short,
        LengthBucket::Medium,
        LengthBucket::Long,
        LengthBucket::VeryLong,
    ];
}

impl fmt::Display for LengthBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which side of a record the length bucketer measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthField {
    Question,
    Answer,
}

/// Partitions records into length buckets by whitespace token count.
pub fn bucket_by_length(
    records: &[QARecord],
    which: LengthField,
) -> BTreeMap<LengthBucket, Vec<&QARecord>> {
    let mut buckets: BTreeMap<LengthBucket, Vec<&QARecord>> = BTreeMap::new();
    for record in records {
        let text = match which {
            LengthField::Question => &record.question,
            LengthField::Answer => &record.answer,
        };
        buckets
            .entry(LengthBucket::of(tokenize(text).len()))
            .or_default()
            .push(record);
    }
    buckets
}

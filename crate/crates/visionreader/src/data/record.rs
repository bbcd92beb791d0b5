use std::fmt;

use serde::{Deserialize, Serialize};

/// The five question aspects a book cover can answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Author,
    Title,
    Publisher,
    Translator,
    Genre,
}

pub const CATEGORIES: [Category; 5] = [
    Category::Author,
    Category::Title,
    Category::Publisher,
    Category::Translator,
    Category::Genre,
];

impl Category {
    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Author => "author",
            Category::Title => "title",
            Category::Publisher => "publisher",
            Category::Translator => "translator",
            Category::Genre => "genre",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "author" => Ok(Category::Author),
            "title" => Ok(Category::Title),
            "publisher" => Ok(Category::Publisher),
            "translator" => Ok(Category::Translator),
            "genre" => Ok(Category::Genre),
            other => Err(format!("unknown category \"{other}\"")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One (image, question, answer) unit; the dataset atom.
///
/// The split lives on the record but is assigned per image: every record
/// sharing an `image_id` carries the same split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QARecord {
    pub image_id: String,
    pub question: String,
    pub answer: String,
    pub category: Category,
    pub split: Split,
}

/// Raw per-book metadata as ingested from a pre-collected listing.
///
/// Only the title is guaranteed; translators in particular are frequently
/// absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookMetadata {
    pub image_id: String,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub publisher: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genre: Option<String>,
}

impl BookMetadata {
    /// Field value for a category, if present. Values that are empty after
    /// cleaning count as absent.
    pub fn field(&self, category: Category) -> Option<&str> {
        let value = match category {
            Category::Title => Some(self.title.as_str()),
            Category::Author => self.author.as_deref(),
            Category::Publisher => self.publisher.as_deref(),
            Category::Translator => self.translator.as_deref(),
            Category::Genre => self.genre.as_deref(),
        };
        value.filter(|v| !v.trim().is_empty())
    }
}

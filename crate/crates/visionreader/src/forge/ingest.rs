use std::fs;
use std::path::Path;

use super::ForgeError;
use crate::data::BookMetadata;

/// Parses pre-collected book metadata: one JSON object per line with at
/// least `image_id` and `title`.
pub fn parse_metadata(input: &str) -> Result<Vec<BookMetadata>, ForgeError> {
    let mut books = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let book: BookMetadata =
            serde_json::from_str(line).map_err(|e| ForgeError::MalformedMetadata {
                line: line_no,
                message: e.to_string(),
            })?;
        if book.image_id.trim().is_empty() {
            return Err(ForgeError::MalformedMetadata {
                line: line_no,
                message: "image_id is empty".into(),
            });
        }
        books.push(book);
    }
    Ok(books)
}

pub fn load_metadata(path: impl AsRef<Path>) -> Result<Vec<BookMetadata>, ForgeError> {
    let text = fs::read_to_string(path)?;
    parse_metadata(&text)
}

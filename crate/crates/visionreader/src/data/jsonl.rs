use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{DataError, QARecord, Split};

/// Parses a JSONL dataset. Record order is preserved; errors carry the
/// 1-based line number. Blank lines are rejected rather than skipped so a
/// truncated write is noticed.
pub fn parse_records(input: &str) -> Result<Vec<QARecord>, DataError> {
    let mut records = Vec::new();
    let mut split_of: HashMap<String, Split> = HashMap::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let record: QARecord = serde_json::from_str(line).map_err(|e| DataError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if record.question.trim().is_empty() {
            return Err(DataError::EmptyField {
                line: line_no,
                field: "question",
            });
        }
        if record.answer.trim().is_empty() {
            return Err(DataError::EmptyField {
                line: line_no,
                field: "answer",
            });
        }
        match split_of.get(&record.image_id) {
            Some(&seen) if seen != record.split => {
                return Err(DataError::SplitConflict {
                    image_id: record.image_id,
                })
            }
            Some(_) => {}
            None => {
                split_of.insert(record.image_id.clone(), record.split);
            }
        }
        records.push(record);
    }
    Ok(records)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<QARecord>, DataError> {
    let text = fs::read_to_string(path)?;
    parse_records(&text)
}

pub fn save_dataset(path: impl AsRef<Path>, records: &[QARecord]) -> Result<(), DataError> {
    let mut out = Vec::new();
    for record in records {
        serde_json::to_writer(&mut out, record).expect("record serialization cannot fail");
        out.push(b'\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Category;

    fn line(image: &str, cat: &str, split: &str) -> String {
        format!(
            r#"{{"image_id":"{image}","question":"ai là tác giả?","answer":"tô hoài","category":"{cat}","split":"{split}"}}"#
        )
    }

    #[test]
    fn well_formed_line_parses() {
        let records = parse_records(&line("b1", "author", "train")).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].category, Category::Author);
    }

    #[test]
    fn missing_answer_errors_at_line_one() {
        let input = r#"{"image_id":"b1","question":"q","category":"author","split":"train"}"#;
        let err = parse_records(input).unwrap_err();
        match err {
            DataError::Malformed { line, message } => {
                assert_eq!(line, 1);
                assert!(message.contains("answer"), "message: {message}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn unknown_category_errors_with_value() {
        let input = line("b1", "subtitle", "train");
        let err = parse_records(&input).unwrap_err();
        assert!(err.to_string().contains("subtitle"));
    }

    #[test]
    fn error_line_number_counts_from_one() {
        let input = format!("{}\n{}", line("b1", "author", "train"), "not json");
        let err = parse_records(&input).unwrap_err();
        match err {
            DataError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn split_conflict_is_rejected() {
        let input = format!(
            "{}\n{}",
            line("b1", "author", "train"),
            line("b1", "title", "dev")
        );
        let err = parse_records(&input).unwrap_err();
        assert!(matches!(err, DataError::SplitConflict { .. }));
    }

    #[test]
    fn save_then_load_round_trips() {
        let records = parse_records(&format!(
            "{}\n{}",
            line("b1", "author", "train"),
            line("b2", "genre", "test")
        ))
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        save_dataset(&path, &records).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(records, back);
    }

    mod round_trip {
        use super::*;
        use crate::data::{Category, Split};
        use proptest::prelude::*;

        fn category() -> impl Strategy<Value = Category> {
            prop_oneof![
                Just(Category::Author),
                Just(Category::Title),
                Just(Category::Publisher),
                Just(Category::Translator),
                Just(Category::Genre),
            ]
        }

        fn split() -> impl Strategy<Value = Split> {
            prop_oneof![Just(Split::Train), Just(Split::Dev), Just(Split::Test)]
        }

        prop_compose! {
            fn record()(
                image in 0u32..64,
                question in "\\PC{1,24}",
                answer in "\\PC{1,24}",
                category in category(),
                split in split(),
            ) -> Option<QARecord> {
                if question.trim().is_empty() || answer.trim().is_empty() {
                    return None;
                }
                Some(QARecord {
                    // one split per image: derive it from the id
                    image_id: format!("img-{image}-{split}"),
                    question,
                    answer,
                    category,
                    split,
                })
            }
        }

        proptest! {
            #[test]
            fn any_valid_record_list_round_trips(records in proptest::collection::vec(record(), 0..12)) {
                let records: Vec<QARecord> = records.into_iter().flatten().collect();
                let dir = tempfile::tempdir().unwrap();
                let path = dir.path().join("data.jsonl");
                save_dataset(&path, &records).unwrap();
                let back = load_dataset(&path).unwrap();
                prop_assert_eq!(records, back);
            }
        }
    }
}

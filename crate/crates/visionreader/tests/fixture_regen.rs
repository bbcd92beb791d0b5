//! Regenerates the committed fixtures. Run manually after editing
//! `data/books_fixture.jsonl`, then refresh the golden stats:
//!
//! ```text
//! cargo test -p visionreader --test fixture_regen -- --ignored
//! cp /tmp/corpus_fixture.jsonl crates/visionreader/data/corpus_fixture.jsonl
//! cp /tmp/qa_fixture.jsonl crates/visionreader/data/qa_fixture.jsonl
//! python3 tools/golden_stats.py crates/visionreader/data/corpus_fixture.jsonl \
//!     crates/visionreader/data/books_fixture.jsonl \
//!     > crates/visionreader/data/golden_stats.json
//! ```

use visionreader::data::{assign_splits, save_dataset};
use visionreader::forge::{generate_qa, load_metadata, Cleaner, TemplateBank};

#[test]
#[ignore]
fn regenerate_fixture_corpus() {
    let books = load_metadata("data/books_fixture.jsonl").unwrap();
    let cleaner = Cleaner::default();
    let cleaned: Vec<_> = books.iter().map(|b| cleaner.clean(b)).collect();
    let ids: Vec<String> = cleaned.iter().map(|b| b.image_id.clone()).collect();
    let splits = assign_splits(&ids, (0.7, 0.15, 0.15), 2024).unwrap();
    let bank = TemplateBank::bundled();
    let mut records = Vec::new();
    for book in &cleaned {
        records.extend(generate_qa(book, &bank, 2024, splits[&book.image_id]).unwrap());
    }
    save_dataset("/tmp/corpus_fixture.jsonl", &records).unwrap();
    eprintln!("records={}", records.len());

    // 50-record loader fixture on whole-book boundaries, all 5 categories
    let keep = [
        "bk-0001", "bk-0002", "bk-0003", "bk-0004", "bk-0005", "bk-0006", "bk-0007", "bk-0008",
        "bk-0009", "bk-0010", "bk-0018", "bk-0025",
    ];
    let subset: Vec<_> = records
        .iter()
        .filter(|r| keep.contains(&r.image_id.as_str()))
        .cloned()
        .collect();
    assert_eq!(subset.len(), 50);
    save_dataset("/tmp/qa_fixture.jsonl", &subset).unwrap();
}

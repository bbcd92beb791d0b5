//! Dataset JSONL parser: must never panic, and accepted input must
//! round-trip through serialization.

#![no_main]

use libfuzzer_sys::fuzz_target;
use visionreader::data::parse_records;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(records) = parse_records(text) {
        let mut round = String::new();
        for record in &records {
            round.push_str(&serde_json::to_string(record).unwrap());
            round.push('\n');
        }
        let again = parse_records(&round).expect("serialized records must reparse");
        assert_eq!(records, again);
    }
});

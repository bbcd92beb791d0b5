//! Book-metadata parser plus the cleaner: parsing never panics and
//! cleaning is idempotent on whatever survives.

#![no_main]

use libfuzzer_sys::fuzz_target;
use visionreader::forge::{parse_metadata, Cleaner};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(books) = parse_metadata(text) {
        let cleaner = Cleaner::default();
        for book in &books {
            let once = cleaner.clean(book);
            let twice = cleaner.clean(&once);
            assert_eq!(once, twice, "cleaning must be idempotent");
        }
    }
});

//! Feature-bundle parser: accepted bundles must validate and round-trip.

#![no_main]

use libfuzzer_sys::fuzz_target;
use visionreader::data::parse_bundles;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(bundles) = parse_bundles(text) {
        for bundle in &bundles {
            bundle.validate(0).expect("parsed bundles are validated");
        }
        let mut round = String::new();
        for bundle in &bundles {
            round.push_str(&serde_json::to_string(bundle).unwrap());
            round.push('\n');
        }
        let again = parse_bundles(&round).expect("serialized bundles must reparse");
        assert_eq!(bundles, again);
    }
});

//! Template-bank parser: ids follow line order on any accepted input.

#![no_main]

use libfuzzer_sys::fuzz_target;
use visionreader::forge::parse_template_bank;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(bank) = parse_template_bank(text) {
        for (idx, template) in bank.templates().iter().enumerate() {
            assert_eq!(template.template_id, idx);
            assert!(!template.text.trim().is_empty());
        }
    }
});

//! Run-config parsers: version gating and dimension checks must reject
//! rather than panic.

#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use visionreader::analysis::{BuildConfig, PipelineConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let path = Path::new("fuzz.json");
    if let Ok(config) = PipelineConfig::parse(path, text) {
        assert_eq!(config.version, 1);
        assert_eq!(config.model.d_model, config.fusion.d_model);
    }
    if let Ok(config) = BuildConfig::parse(path, text) {
        assert_eq!(config.version, 1);
        assert!(config.meta.is_some() || config.synthetic.is_some());
    }
});

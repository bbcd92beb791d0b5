//! Checkpoint loader: malformed input errors, accepted checkpoints
//! reassemble into parameters and survive a serialization round trip.

#![no_main]

use libfuzzer_sys::fuzz_target;
use visionreader::model::Checkpoint;

fuzz_target!(|data: &[u8]| {
    if let Ok(checkpoint) = Checkpoint::from_json_slice(data) {
        let params = checkpoint
            .params()
            .expect("accepted checkpoints yield params");
        let again = Checkpoint::from_json_slice(checkpoint.to_json().as_bytes())
            .expect("serialized checkpoint must reparse");
        assert_eq!(again.params().expect("reparsed params"), params);
    }
});

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ForgeError, TemplateBank};
use crate::data::{BookMetadata, QARecord, Split, CATEGORIES};

/// Per-record rng seed derived from the corpus seed and the image id, so a
/// corpus build can process books in any order (or in parallel) and still
/// produce identical questions.
pub fn derive_record_seed(corpus_seed: u64, image_id: &str) -> u64 {
    // FNV-1a over the id, folded with the corpus seed.
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in image_id.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash ^ corpus_seed.rotate_left(17)
}

/// Synthesizes one QA record per present metadata field. The question is a
/// uniformly sampled template of the field's category; the answer is the
/// cleaned field value verbatim. `meta` is expected to be cleaned already.
pub fn generate_qa(
    meta: &BookMetadata,
    bank: &TemplateBank,
    corpus_seed: u64,
    split: Split,
) -> Result<Vec<QARecord>, ForgeError> {
    let present: Vec<_> = CATEGORIES
        .iter()
        .copied()
        .filter(|&c| meta.field(c).is_some())
        .collect();
    bank.require(&present)?;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_record_seed(corpus_seed, &meta.image_id));
    let mut records = Vec::with_capacity(present.len());
    for category in present {
        let answer = meta.field(category).expect("presence checked above");
        let pool = bank.for_category(category);
        let template = pool[rng.random_range(0..pool.len())];
        records.push(QARecord {
            image_id: meta.image_id.clone(),
            question: template.text.clone(),
            answer: answer.to_owned(),
            category,
            split,
        });
    }
    Ok(records)
}

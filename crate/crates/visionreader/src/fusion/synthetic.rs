use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FusionConfig;
use crate::data::{
    assign_splits, BookMetadata, ImageFeatureBundle, ObjectRegion, OcrToken, QARecord,
};
use crate::forge::{derive_record_seed, generate_qa, ForgeError, TemplateBank};

const TITLE_WORDS: [&str; 16] = [
    "mùa", "gió", "nắng", "biển", "rừng", "sao", "mây", "đêm", "sông", "núi", "hoa", "lửa",
    "trăng", "cát", "sương", "chim",
];
const AUTHOR_WORDS: [&str; 10] = [
    "hoài", "lan", "minh", "phương", "quân", "thảo", "trang", "tuấn", "vy", "khang",
];
const PUBLISHER_WORDS: [&str; 6] = ["trẻ", "kim", "đồng", "giáo", "dục", "văn"];
const TRANSLATOR_WORDS: [&str; 8] = ["bảo", "châu", "dũng", "hà", "linh", "nam", "oanh", "sơn"];
const GENRE_WORDS: [&str; 8] = [
    "thiếu nhi",
    "văn học",
    "kinh tế",
    "lịch sử",
    "khoa học",
    "tâm lý",
    "giáo khoa",
    "hồi ký",
];

/// Deterministic stand-in for the external vision and OCR extractors.
/// Metadata and features both derive purely from `(image_id, seed)`, so a
/// book's OCR tokens are exactly its cover text and a generated corpus is
/// answerable by reading the OCR channel. Recognition features encode the
/// token's identity the way a real recognizer head would; detection
/// features and everything visual are image-specific noise.
#[derive(Debug, Clone)]
pub struct SyntheticProvider {
    pub seed: u64,
    pub f_obj: usize,
    pub f_det: usize,
    pub f_rec: usize,
    pub f_grid: usize,
    pub grid_rows: usize,
    /// Titles are sampled with 1..=max_title_words words.
    pub max_title_words: usize,
}

impl SyntheticProvider {
    pub fn new(seed: u64, fusion: &FusionConfig) -> Self {
        Self {
            seed,
            f_obj: fusion.f_obj,
            f_det: fusion.f_det,
            f_rec: fusion.f_rec,
            f_grid: fusion.f_grid,
            grid_rows: 4,
            max_title_words: 2,
        }
    }

    fn rng_for(&self, image_id: &str, stream: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_record_seed(self.seed ^ stream, image_id))
    }

    /// The book "printed on" this image.
    pub fn metadata(&self, image_id: &str) -> BookMetadata {
        let mut rng = self.rng_for(image_id, 0x51);
        let pick =
            |rng: &mut ChaCha8Rng, pool: &[&str]| pool[rng.random_range(0..pool.len())].to_owned();
        let title_len = rng.random_range(1..=self.max_title_words.max(1));
        let mut title_words = Vec::with_capacity(title_len);
        for _ in 0..title_len {
            title_words.push(pick(&mut rng, &TITLE_WORDS));
        }
        title_words.dedup();
        let maybe = |rng: &mut ChaCha8Rng, p: f64, value: String| {
            if rng.random_range(0.0..1.0) < p {
                Some(value)
            } else {
                None
            }
        };
        let author = pick(&mut rng, &AUTHOR_WORDS);
        let publisher = pick(&mut rng, &PUBLISHER_WORDS);
        let translator = pick(&mut rng, &TRANSLATOR_WORDS);
        let genre = pick(&mut rng, &GENRE_WORDS);
        BookMetadata {
            image_id: image_id.to_owned(),
            title: title_words.join(" "),
            author: maybe(&mut rng, 0.9, author),
            publisher: maybe(&mut rng, 0.9, publisher),
            // translators are scarce, mirroring real listings
            translator: maybe(&mut rng, 0.4, translator),
            genre: maybe(&mut rng, 0.9, genre),
        }
    }

    /// Visual features for this image. OCR tokens are the cover words in
    /// reading order; object and grid features are image-specific noise.
    pub fn bundle(&self, image_id: &str) -> ImageFeatureBundle {
        let meta = self.metadata(image_id);
        let mut rng = self.rng_for(image_id, 0xF2);
        let vecf = |rng: &mut ChaCha8Rng, n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
        };

        let mut cover_words: Vec<String> = Vec::new();
        for value in [
            Some(meta.title.as_str()),
            meta.author.as_deref(),
            meta.publisher.as_deref(),
            meta.translator.as_deref(),
        ]
        .into_iter()
        .flatten()
        {
            cover_words.extend(value.split_whitespace().map(str::to_owned));
        }

        let ocr = cover_words
            .iter()
            .enumerate()
            .map(|(i, word)| {
                let y = 0.05 + 0.06 * i as f64;
                let x = 0.1 + 0.02 * (i % 3) as f64;
                // The recognizer's text head sees the same word the same
                // way regardless of which cover it sits on.
                let mut word_rng = ChaCha8Rng::seed_from_u64(derive_record_seed(0xEC0, word));
                OcrToken {
                    text: word.clone(),
                    bbox: [x, y.min(0.9), (x + 0.2).min(1.0), (y + 0.04).min(0.95)],
                    det_feature: vecf(&mut rng, self.f_det),
                    rec_feature: vecf(&mut word_rng, self.f_rec),
                }
            })
            .collect();

        let n_objects = rng.random_range(2..=4usize);
        let objects = (0..n_objects)
            .map(|_| {
                let x0: f64 = rng.random_range(0.0..0.5);
                let y0: f64 = rng.random_range(0.0..0.5);
                ObjectRegion {
                    feature: vecf(&mut rng, self.f_obj),
                    bbox: [
                        x0,
                        y0,
                        x0 + rng.random_range(0.1..0.5),
                        y0 + rng.random_range(0.1..0.5),
                    ],
                }
            })
            .collect();

        let grid = (0..self.grid_rows)
            .map(|_| vecf(&mut rng, self.f_grid))
            .collect();

        ImageFeatureBundle {
            image_id: image_id.to_owned(),
            objects,
            ocr,
            grid,
        }
    }
}

/// Builds a complete synthetic corpus: records with per-image splits plus
/// the matching feature bundles.
pub fn synthetic_dataset(
    provider: &SyntheticProvider,
    n_images: usize,
    bank: &TemplateBank,
    ratios: (f64, f64, f64),
    split_seed: u64,
) -> Result<(Vec<QARecord>, Vec<ImageFeatureBundle>), ForgeError> {
    let ids: Vec<String> = (0..n_images).map(|i| format!("syn-{i:05}")).collect();
    let splits =
        assign_splits(&ids, ratios, split_seed).map_err(|e| ForgeError::MalformedMetadata {
            line: 0,
            message: e.to_string(),
        })?;
    let mut records = Vec::new();
    let mut bundles = Vec::new();
    for id in &ids {
        let meta = provider.metadata(id);
        records.extend(generate_qa(&meta, bank, provider.seed, splits[id])?);
        bundles.push(provider.bundle(id));
    }
    Ok((records, bundles))
}

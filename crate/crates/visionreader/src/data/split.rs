use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DataError, Split};

/// Snap-to-integer ceiling: products like `100 * 0.8` land a few ulps off
/// an exact integer, which a bare ceil would bump up by one.
fn ceil_count(n: usize, ratio: f64) -> usize {
    let raw = n as f64 * ratio;
    let nearest = raw.round();
    if (raw - nearest).abs() < 1e-6 {
        nearest as usize
    } else {
        raw.ceil() as usize
    }
}

/// Assigns each image id to a split, uniformly at random for a fixed seed.
///
/// The assignment is a pure function of the sorted id list, the ratios, and
/// the seed. Train and dev take the ceiling of their share and test takes
/// the remainder, so 28,282 ids at (0.70, 0.15, 0.15) come out as
/// 19,798 / 4,243 / 4,241.
pub fn assign_splits(
    image_ids: &[String],
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<BTreeMap<String, Split>, DataError> {
    if image_ids.is_empty() {
        return Err(DataError::NoIds);
    }
    let (r_train, r_dev, r_test) = ratios;
    let sum = r_train + r_dev + r_test;
    if (sum - 1.0).abs() > 1e-9 || r_train < 0.0 || r_dev < 0.0 || r_test < 0.0 {
        return Err(DataError::BadRatios { sum });
    }

    let mut ids: Vec<&String> = image_ids.iter().collect();
    ids.sort_unstable();
    for window in ids.windows(2) {
        if window[0] == window[1] {
            return Err(DataError::DuplicateId {
                id: window[0].clone(),
            });
        }
    }

    // Fisher-Yates over the sorted list keeps the result independent of
    // input order.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..ids.len()).rev() {
        let j = rng.random_range(0..=i);
        ids.swap(i, j);
    }

    let n = ids.len();
    let n_train = ceil_count(n, r_train).min(n);
    let n_dev = ceil_count(n, r_dev).min(n - n_train);

    let mut assignment = BTreeMap::new();
    for (idx, id) in ids.into_iter().enumerate() {
        let split = if idx < n_train {
            Split::Train
        } else if idx < n_train + n_dev {
            Split::Dev
        } else {
            Split::Test
        };
        assignment.insert(id.clone(), split);
    }
    Ok(assignment)
}

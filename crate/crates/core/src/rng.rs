//! Seeded random streams. Every sampler takes an explicit seed so runs are
//! reproducible; per-trial streams are derived by hashing the master seed
//! with the trial index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// A generator seeded deterministically from `seed`.
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for trial `index` under `master`; distinct indices give
/// statistically independent streams.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(mix(master ^ 0x9e37_79b9_7f4a_7c15).wrapping_add(mix(index.wrapping_add(1))))
}

/// Seed for a named sub-stream (e.g. "noise", "spike") of a sample.
pub fn stream_seed(seed: u64, label: &str) -> u64 {
    let h = label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        });
    derive_seed(seed, h)
}

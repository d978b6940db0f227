//! Seed derivation helpers.
//!
//! Every stochastic stage receives its own seed derived from a master seed
//! with a stable mixing function, so results never depend on scheduling or
//! on the order in which stages consume randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StageRng = ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent replication of a seeded job.
#[inline]
pub fn split(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Seed for a named stage; stable across platforms and releases.
pub fn stage(seed: u64, name: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    split(seed, h)
}

/// Uniform draw in [0, 1) keyed by `(seed, key)`; a pure function.
#[inline]
pub fn keyed_unit(seed: u64, key: u64) -> f64 {
    (split(seed, key) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn rng(seed: u64) -> StageRng {
    StageRng::seed_from_u64(seed)
}

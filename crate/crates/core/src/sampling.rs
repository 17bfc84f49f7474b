//! Deterministic seeded sampling.
//!
//! Every sample gets its own ChaCha stream derived from `(seed, index)`, so
//! results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SampleRng = ChaCha8Rng;

/// Seed used when neither `--seed` nor `DELTA_FORGE_SEED` is given.
pub const DEFAULT_SEED: u64 = 1729;

pub fn sample_rng(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Sub-seed for a named sub-experiment, so suites sharing a seed stay independent.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, mixed with the seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

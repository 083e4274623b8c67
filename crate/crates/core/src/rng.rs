//! Deterministic seeding.
//!
//! Every replicate draws from its own stream whose seed is a stateless mix of
//! the master seed and the replicate index, so results never depend on how
//! replicates are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for all sampling in this crate.
pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `index` under `master`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master) ^ mix64(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

/// Derive an independent master seed for a named sub-experiment.
pub fn stream_seed(master: u64, tag: &str) -> u64 {
    tag.bytes()
        .fold(mix64(master ^ 0xA076_1D64_78BD_642F), |acc, b| {
            mix64(acc ^ u64::from(b))
        })
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

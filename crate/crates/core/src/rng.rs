//! Seeded random streams for replications.
//!
//! Each replication draws from its own ChaCha8 stream keyed by
//! `mix(base_seed, index)`, so replications can run in any order or on any
//! thread and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `index` under `base_seed`.
pub fn stream_seed(base_seed: u64, index: u64) -> u64 {
    avalanche(avalanche(base_seed).wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

pub fn stream_rng(base_seed: u64, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(stream_seed(base_seed, index))
}

pub fn seeded_rng(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

//! Child seed derivation.
//!
//! Every stochastic component draws from its own stream, keyed by the master
//! seed, a component name and an index. The hash is FNV-1a followed by a
//! splitmix64 finaliser, so values are stable across platforms and releases.

use std::hash::Hasher;

use fnv::FnvHasher;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stable 64-bit hash of `(master, component, index)`.
pub fn derive_seed(master: u64, component: &str, index: u64) -> u64 {
    let mut hasher = FnvHasher::default();
    hasher.write(&master.to_le_bytes());
    hasher.write(component.as_bytes());
    hasher.write(&[0xff]);
    hasher.write(&index.to_le_bytes());
    splitmix64(hasher.finish())
}

/// Deterministic RNG used throughout the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

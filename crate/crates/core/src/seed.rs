//! Deterministic seed derivation.
//!
//! Every random draw in the crate is fed by a [`ChaCha8Rng`] whose seed is a
//! mix of a master seed and a path of indices (candidate, trial, ...). Two
//! runs with the same master seed therefore see the same draws no matter how
//! the work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `master` with an index path into a child seed.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for &p in path {
        h = splitmix64(h ^ splitmix64(p.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    h
}

/// A generator seeded directly from `seed`.
pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A generator for the stream at `path` under `master`.
pub fn stream(master: u64, path: &[u64]) -> Rng {
    rng(derive(master, path))
}

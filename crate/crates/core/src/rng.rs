//! Seed derivation. Every random stream in a run is a ChaCha8 generator
//! keyed by a value mixed from the master seed and the stream's coordinates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a seed and a list of coordinates.
pub fn derive(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(seed), |h, &p| mix(h ^ mix(p)))
}

/// Seed of child `child` of parent `parent` in search iteration `iteration`.
pub fn candidate_seed(master: u64, iteration: usize, parent: usize, child: usize) -> u64 {
    derive(master, &[iteration as u64, parent as u64, child as u64])
}

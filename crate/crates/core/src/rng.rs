//! Seeded random streams.
//!
//! Every simulation and every Monte Carlo replication owns a `ChaCha8Rng`
//! whose seed is derived from a master seed and a tuple of stream
//! coordinates, so results do not depend on execution order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// One round of the splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and stream coordinates.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(mix(master), |acc, &c| mix(acc ^ mix(c)))
}

pub fn stream(master: u64, coords: &[u64]) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_seed(master, coords))
}

pub fn seeded(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

//! Seeded random streams.
//!
//! Every random draw in the crate goes through [`stream`], so a `(seed, stream)`
//! pair fully determines the numbers produced, independent of call order
//! elsewhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids reserved by the different consumers of randomness.
pub(crate) mod ids {
    pub const PAIRS: u64 = 0x5041_4952;
    pub const COORDINATE: u64 = 0x434f_4f52_0000_0000;
}

/// Deterministic generator for `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mix a replica index into a base seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

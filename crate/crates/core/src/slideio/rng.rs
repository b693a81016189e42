//! Seeded randomness.
//!
//! All stochastic code in the crate draws from ChaCha8 (`rand_chacha`),
//! seeded through `SeedableRng::seed_from_u64`. ChaCha output is defined by
//! its specification, independent of platform and word size, so a seed
//! reproduces the same stream everywhere. Independent sub-streams (one per
//! slide, per epoch, ...) get their own seed from [`derive_seed`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SlideRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SlideRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a stream index (SplitMix64 finaliser).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

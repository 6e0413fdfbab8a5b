//! Deterministic seed derivation.
//!
//! Every randomized stage (trace generation, splitting, weight init, GA)
//! owns a seed derived as a pure function of a master seed and the task's
//! coordinates, so any subset of the work regenerates identically and
//! parallel execution equals serial execution bit for bit.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// SplitMix64 finalizer; a stateless 64-bit mixing function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based derivation: fold `words` into `master` one at a time.
pub fn derive(master: u64, words: &[u64]) -> u64 {
    let mut state = mix64(master);
    for (i, w) in words.iter().enumerate() {
        state = mix64(state ^ w.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64));
    }
    state
}

/// Seeded RNG used everywhere randomness is needed.
///
/// ChaCha has a pinned, portable stream: the same seed yields the same
/// sequence on every platform.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

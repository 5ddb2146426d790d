//! Reproducible per-trajectory random substreams.
//!
//! A 64-bit master seed spawns one independent stream per trajectory index.
//! The stream key is derived by hashing `(seed, index)` through SplitMix64 and
//! feeding the expansion into a counter-based generator (ChaCha8), so the
//! stream depends only on the pair and never on scheduling: identical seeds
//! give bit-identical event sequences regardless of worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent substream for trajectory `index` under `master_seed`.
pub fn substream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ index.wrapping_mul(0xA24B_AED4_963E_E407);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Named substream for auxiliary draws (e.g. the quantum ensemble), kept
/// disjoint from trajectory streams by a domain tag.
pub fn substream_tagged(master_seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    substream(master_seed ^ tag.wrapping_mul(0xD6E8_FEB8_6659_FD93), index)
}

//! Deterministic random-stream derivation.
//!
//! Every randomized routine owns a private ChaCha8 generator derived from
//! the master seed plus a stable integer path (experiment kind, grid row,
//! trial index, pixel index, acquisition phase). Two distinct paths yield
//! independent streams, so parallel schedules and thread counts cannot
//! change any result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; the standard 64-bit avalanche mix.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the generator for one unit of randomized work.
///
/// The path folds into the seed position by position, so `[a, b]` and
/// `[b, a]` produce unrelated streams, as do paths of different length.
pub fn stream_rng(master_seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut state = mix64(master_seed);
    for (depth, &part) in path.iter().enumerate() {
        state = mix64(state ^ mix64(part.wrapping_add(depth as u64 + 1)));
    }
    ChaCha8Rng::seed_from_u64(state)
}

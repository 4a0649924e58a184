//! Deterministic per-path random number streams.
//!
//! Every Monte Carlo path draws from its own counter-mode stream derived from
//! (master seed, path index). Results are therefore reproducible for a given
//! seed and path count, independent of worker count or scheduling order, and
//! the first k paths of a larger run coincide with a k-path run.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// RNG for one path: stream `path_index` of the generator seeded by
/// `master_seed`.
pub fn path_rng(master_seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path_index);
    rng
}

/// RNG for single-sequence use (one consumer, no per-path split).
pub fn master_rng(master_seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(master_seed)
}

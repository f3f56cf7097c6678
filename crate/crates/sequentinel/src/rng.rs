//! Seeded RNG substreams.
//!
//! Every run is driven by one master seed. Each consumer of randomness gets
//! its own ChaCha stream derived from `(seed, domain, index)`, so corpus
//! generation, weight initialization and epoch shuffling never share or
//! disturb each other's draws, and per-record generation stays reproducible
//! under any evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent randomness domains carved out of one master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Synthetic corpus generation (one sub-stream per record).
    Data = 0,
    /// Model parameter initialization.
    Init = 1,
    /// Epoch shuffling during training.
    Shuffle = 2,
    /// Corpus splitting.
    Split = 3,
}

/// RNG for `(seed, domain)`, record/index 0.
pub fn stream(seed: u64, domain: Domain) -> ChaCha8Rng {
    indexed_stream(seed, domain, 0)
}

/// RNG for `(seed, domain, index)`; indices below 2^32 are guaranteed
/// collision-free across domains.
pub fn indexed_stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    debug_assert!(index < 1 << 32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 32) | index);
    rng
}

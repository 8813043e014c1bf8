//! Deterministic random-number streams.
//!
//! Every stochastic routine in the crate draws from a `ChaCha8Rng` derived
//! here. Independent concerns (weight init, batch shuffling, PGD jitter,
//! region subsampling, attack restarts, simulator trials) use separate
//! streams of the same seed so that changing one consumer never perturbs
//! another, and parallel per-item work stays reproducible regardless of
//! scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id for model weight initialization.
pub const STREAM_INIT: u64 = 1;
/// Stream id for per-epoch batch shuffling.
pub const STREAM_SHUFFLE: u64 = 2;
/// Stream id for region construction subsampling.
pub const STREAM_REGION: u64 = 3;
/// Base stream id for PGD jitter; the epoch index is added on top.
pub const STREAM_PGD: u64 = 1 << 20;
/// Stream id for attack restarts.
pub const STREAM_ATTACK: u64 = 4;
/// Stream id for dataset generation.
pub const STREAM_GEN: u64 = 5;

/// Root generator for a seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for an independent stream of the same seed.
///
/// Streams with distinct `stream` values never share output, so consumers
/// keyed by `(seed, stream)` are mutually independent.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-item stream: mixes an item index into the seed, then selects a
/// stream. Used for per-anchor region sampling, per-input attacks, and
/// per-trial simulation, where work may run in parallel.
pub fn item_stream(seed: u64, item: u64, stream: u64) -> ChaCha8Rng {
    substream(seed ^ item, stream)
}

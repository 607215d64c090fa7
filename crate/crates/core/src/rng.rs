//! Reproducible random streams.
//!
//! Every consumer draws from a [`ChaCha8Rng`] keyed by a master seed and
//! positioned on its own stream, so independent trials, sweep rows and
//! per-row purposes never share state and can run on any thread.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Number of purpose slots reserved per sweep row.
pub const PURPOSES_PER_ROW: u64 = 16;

/// Generator for a given purpose within a given row.
pub fn row_stream(seed: u64, row: u64, purpose: u64) -> ChaCha8Rng {
    debug_assert!(purpose < PURPOSES_PER_ROW);
    stream(seed, row * PURPOSES_PER_ROW + purpose)
}

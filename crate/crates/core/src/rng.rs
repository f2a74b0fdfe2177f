//! Keyed deterministic random streams.
//!
//! Every random draw in the stack is addressed by a `(seed, stream)` pair so
//! that a value can be recomputed without replaying earlier draws: shot `i`
//! of a job with seed `s` always sees the same generator.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Generator for stream `stream` under `seed`.
pub fn keyed(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Derives a child seed, e.g. a job seed from a service seed and job counter.
pub fn derive_seed(seed: u64, counter: u64) -> u64 {
    keyed(seed, counter).next_u64()
}

//! Seed discipline: one root seed, one ChaCha stream per consumer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` under root `seed`.
///
/// Streams are independent, so adding a consumer never shifts the numbers
/// another consumer sees.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sub-stream derivation for nested consumers (e.g. trial blocks in a step).
pub fn derive(seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mixed = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    stream(mixed, b)
}

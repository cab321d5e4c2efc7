//! Seed-stream derivation shared by the resampling and simulation code.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns the RNG for stream `stream` of the generator seeded with `seed`.
///
/// Folds, subsamples and replications each draw from their own stream, so
/// results do not depend on execution order or thread count.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

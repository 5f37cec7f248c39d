//! Reproducible random streams for parallel Monte Carlo.
//!
//! ChaCha is counter-based: a (seed, stream) pair pins the whole sequence,
//! so replicate r can run on any thread and still see exactly the numbers
//! it would see in a sequential sweep.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Child stream `index` of the master `seed`. Distinct indices give
/// statistically independent streams; the same pair is bit-reproducible.
pub fn derive_stream(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

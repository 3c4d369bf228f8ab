//! Counter-based random numbers: every draw is addressed by `(seed, stream, counter)`,
//! so trajectories do not depend on the order in which draws are made.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Streams at or above this value are reserved for initial-score perturbations.
pub const PERTURBATION_STREAM: u64 = 1 << 40;

/// Stream used to derive per-run seeds from a master seed.
pub const SEED_STREAM: u64 = 1 << 41;

fn generator(seed: u64, stream: u64, counter: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(counter) * 2);
    rng
}

/// Uniform draw in `[0, 1)`.
pub fn uniform(seed: u64, stream: u64, counter: u64) -> f64 {
    generator(seed, stream, counter).gen::<f64>()
}

/// Independent 64-bit seed for run `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    generator(master, SEED_STREAM, index).gen::<u64>()
}

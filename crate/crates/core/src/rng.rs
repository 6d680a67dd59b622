//! Reproducible random streams.
//!
//! Every random draw in the crate comes from ChaCha20 keyed by
//! `ChaCha20Rng::seed_from_u64(seed)`. The ChaCha stream id selects the
//! purpose and the iteration: stream `2k` holds the sketch of iteration `k`,
//! stream `2k + 1` the auxiliary draws (Lanczos start vectors, probes) of the
//! same iteration. A given `(seed, k)` therefore yields the same numbers on
//! every platform and independently of what other iterations consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

pub fn sketch_rng(seed: u64, k: u64) -> StreamRng {
    stream(seed, k.wrapping_mul(2))
}

pub fn aux_rng(seed: u64, k: u64) -> StreamRng {
    stream(seed, k.wrapping_mul(2).wrapping_add(1))
}

fn stream(seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

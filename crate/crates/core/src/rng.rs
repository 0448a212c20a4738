//! Reproducible random streams.
//!
//! Every random draw comes from a ChaCha8 generator. A base seed is split into
//! independent child seeds by hashing it together with a path of counters
//! (SplitMix64 finalizer), so results depend only on the seed and the
//! position of a task, never on the order in which threads run it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for the task at `path` below `base`.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &step| splitmix64(acc ^ splitmix64(step)))
}

/// Generator for stream `stream` of `seed`. Streams of one seed never overlap.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

//! Named, indexed random substreams derived from one top-level seed.
//!
//! Every stochastic stage draws from its own stream so stages can be
//! reproduced independently and parallel work does not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Seed for substream `index` of the stream called `name`.
pub fn substream_seed(seed: u64, name: &str, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ fnv1a(name)) ^ splitmix64(index.wrapping_add(0x5851_F42D)))
}

pub fn substream(seed: u64, name: &str, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(substream_seed(seed, name, index))
}

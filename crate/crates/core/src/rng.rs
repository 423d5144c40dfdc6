//! Seeded, reproducible random streams.
//!
//! Every consumer draws from ChaCha8. Independent work items (Monte Carlo
//! iterations, simulation replications, sweep points) get their own stream
//! selected by a counter, so item `k` can be regenerated in isolation and
//! parallel runs reproduce serial ones bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// The generator for work item `index` under the master `seed`.
pub fn substream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives a child seed, e.g. one per sweep point or replication.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser over the pair
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

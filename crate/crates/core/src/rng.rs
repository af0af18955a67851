//! Seeded, portable random streams.
//!
//! Everything random in the crate draws from ChaCha8 seeded with a `u64`.
//! Work that is split into chunks gives chunk `k` its own stream `k`, so
//! results do not depend on how chunks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

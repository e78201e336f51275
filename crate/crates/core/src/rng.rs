//! Counter-based random substreams.
//!
//! Every trial gets its own ChaCha stream selected by `(master_seed, stream)`,
//! so results do not depend on the order in which trials are executed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn substream(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for trial `trial` of sweep point `point`.
pub fn trial_stream(point: u32, trial: u32) -> u64 {
    ((point as u64) << 32) | trial as u64
}

pub fn trial_rng(master_seed: u64, point: u32, trial: u32) -> ChaCha8Rng {
    substream(master_seed, trial_stream(point, trial))
}

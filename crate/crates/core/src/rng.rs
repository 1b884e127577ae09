//! Seed splitting for reproducible, scheduling-independent Monte-Carlo runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for a single run seeded directly by `seed`.
pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Independent generator for trial `trial` of sweep point `point` under a
/// master seed. Each (point, trial) pair gets its own ChaCha stream, so the
/// result of a trial never depends on which thread ran it or in what order.
pub fn trial_rng(master_seed: u64, point: u32, trial: u32) -> SimRng {
    let mut rng = SimRng::seed_from_u64(master_seed);
    rng.set_stream((u64::from(point) << 32) | u64::from(trial));
    rng
}

//! Deterministic random streams.
//!
//! Every Monte Carlo shot or clock cycle draws from its own ChaCha stream
//! keyed on `(master_seed, domain, index)`, so results do not depend on the
//! order or the thread in which shots execute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains keep unrelated uses of one master seed apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Shot = 1,
    ClockCycle = 2,
    Drift = 3,
    Synthetic = 4,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Child seed for sub-experiment `index` of a run seeded with `master_seed`.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index.wrapping_add(0x5eed)))
}

/// Independent generator for item `index` of `domain`.
pub fn stream(master_seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ splitmix64(domain as u64)));
    rng.set_stream(index);
    rng
}

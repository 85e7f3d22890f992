//! Deterministic random substreams derived from one master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout; ChaCha output is stable across platforms.
pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `path` into `master`; distinct paths give unrelated seeds.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

pub fn rng_for(master: u64, path: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(master, path))
}

/// Stream tags, kept stable so outputs survive refactors.
pub mod stream {
    pub const CHAIN: u64 = 1;
    pub const COND_PROBS: u64 = 10;
    pub const TRUE_CSMF: u64 = 11;
    pub const DEATHS: u64 = 12;
    pub const SYMPTOMS: u64 = 13;
    pub const REPORTING: u64 = 14;
    pub const REPLICATE: u64 = 20;
    pub const GIBBS: u64 = 21;
    pub const SINGLE_DEATH: u64 = 30;
}

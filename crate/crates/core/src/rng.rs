//! Seeded random streams. Every consumer derives its own stream from the master
//! seed and a tag path, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type Rng = ChaCha20Rng;

/// Stream tags.
pub const TAG_PRIOR: u64 = 1;
pub const TAG_DATA: u64 = 2;
pub const TAG_CHAIN: u64 = 3;
pub const TAG_PAIRS: u64 = 4;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for a tag path.
pub fn sub_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix(seed), |acc, t| splitmix(acc ^ splitmix(*t)))
}

pub fn rng_for(seed: u64, tags: &[u64]) -> Rng {
    Rng::seed_from_u64(sub_seed(seed, tags))
}

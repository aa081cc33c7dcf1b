//! Deterministic sub-seed derivation.
//!
//! Every unit of randomized work (a node's walks, a tree, an evaluation run)
//! draws from its own generator seeded by mixing the master seed with the
//! unit's coordinates, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a master seed with an ordered list of coordinates.
pub fn derive(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix(seed), |acc, &p| splitmix(acc ^ splitmix(p)))
}

/// Generator for a unit of work identified by `parts`.
pub fn rng_for(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, parts))
}

// Domain tags keep streams for different subsystems apart.
pub(crate) const TAG_LSME: u64 = 1;
pub(crate) const TAG_SAMPLE: u64 = 2;
pub(crate) const TAG_TREE: u64 = 3;
pub(crate) const TAG_SPLIT: u64 = 4;
pub(crate) const TAG_KMEANS: u64 = 5;
pub(crate) const TAG_PAIRS: u64 = 6;
pub(crate) const TAG_RANDOM_ORDER: u64 = 7;
pub(crate) const TAG_PROBE: u64 = 8;
pub(crate) const TAG_GENERATOR: u64 = 9;

//! Deterministic RNG stream derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 stream whose seed is
//! derived from a root seed plus a path of integer tags (a domain constant
//! followed by ids such as environment index, agent id, or waypoint
//! iteration). Distinct paths give statistically independent streams; the
//! same path always reproduces the same stream, which is what makes episodes,
//! environment generation, and evolution runs replayable and safe to fan out
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags. First element of every derivation path.
pub const D_ENV: u64 = 0xE1;
pub const D_VENT: u64 = 0xE2;
pub const D_GAS: u64 = 0xE3;
pub const D_SPAWN: u64 = 0xA1;
pub const D_WAYPOINT: u64 = 0xA2;
pub const D_NOISE: u64 = 0xA3;
pub const D_EVOLVE: u64 = 0xC1;
pub const D_EPISODE: u64 = 0xC2;
pub const D_VALIDATION: u64 = 0xC3;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Finalizer with full avalanche (splitmix64's mixing function).
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold a tag path into a child seed.
pub fn derive(root: u64, tags: &[u64]) -> u64 {
    let mut h = mix(root ^ GOLDEN);
    for &t in tags {
        h = mix(h.wrapping_add(GOLDEN) ^ mix(t));
    }
    h
}

/// ChaCha8 stream for a tag path under `root`.
pub fn stream(root: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(root, tags))
}

/// ChaCha8 stream directly from a seed (for already-derived seeds).
pub fn from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

//! Seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded from a value
//! produced by [`mix`]. The mixing function is SplitMix64's finalizer
//! folded over the inputs:
//!
//! ```text
//! h0 = splitmix64(seed)
//! h_{k+1} = splitmix64(h_k XOR part_k)
//! ```
//!
//! Module tags are turned into integers with 64-bit FNV-1a ([`tag`]).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |h, &part| splitmix64(h ^ part))
}

pub const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
pub const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// Integer form of a module tag such as `"split"` or `"augment"`.
pub fn tag(name: &str) -> u64 {
    fnv1a(name.as_bytes())
}

/// Seed for a named module derived from the single experiment seed.
pub fn module_seed(global: u64, module: &str) -> u64 {
    mix(global, &[tag(module)])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

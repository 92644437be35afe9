//! Seed derivation for independent, reproducible random streams.
//!
//! Every stochastic component draws from its own ChaCha stream keyed by a
//! master seed plus a small tuple of integers (episode index, round, domain
//! tag). Streams never share state, so episodes can run in any order or in
//! parallel and still produce identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags separating the streams derived from one episode seed.
pub mod domain {
    pub const MESSAGE: u64 = 0x6d73_6700;
    pub const CHANNEL: u64 = 0x6368_6e00;
    pub const MR: u64 = 0x6d72_0000;
    pub const POLICY: u64 = 0x706f_6c00;
    pub const EPISODE: u64 = 0x6570_6900;
    pub const TRAIN: u64 = 0x7472_6e00;
    pub const REPLAY: u64 = 0x7270_6c00;
    pub const INIT: u64 = 0x696e_6900;
    pub const VALIDATE: u64 = 0x766c_6400;
    pub const CODE: u64 = 0x636f_6400;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a seed with a sequence of keys into a new 64-bit seed.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

/// A ChaCha8 stream keyed by `seed` and `keys`.
pub fn stream(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, keys))
}

/// Seed of the `index`-th episode drawn from a master seed.
///
/// All policies evaluated with the same master seed see the same episode
/// seeds, which gives common random numbers across grid points.
pub fn episode_seed(master: u64, index: u64) -> u64 {
    derive_seed(master, &[domain::EPISODE, index])
}

//! Seed derivation and keyed uniform streams.
//!
//! Every random quantity in the crate is derived from a 64-bit seed and a key
//! naming the element it belongs to (a site, an edge, a cell id). Sequential
//! draws are only used inside a single Markov chain.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type ChainRng = Xoshiro256PlusPlus;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a seed together with a sequence of words.
pub fn hash_words(seed: u64, words: &[u64]) -> u64 {
    let mut h = mix64(seed ^ 0x5851_F42D_4C95_7F2D);
    for &w in words {
        h = mix64(h ^ w);
    }
    h
}

/// Key for a lattice coordinate tuple.
pub fn coords_key(coords: &[i32]) -> u64 {
    let words: Vec<u64> = coords.iter().map(|&c| c as i64 as u64).collect();
    hash_words(coords.len() as u64, &words)
}

/// 64-bit FNV-1a, used for string cell ids and config hashes.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Per-cell seed: keyed hash of the master seed and the cell id.
pub fn derive_seed(master: u64, cell_id: &str) -> u64 {
    hash_words(master, &[fnv1a(cell_id.as_bytes())])
}

pub fn chain_rng(seed: u64) -> ChainRng {
    Xoshiro256PlusPlus::seed_from_u64(mix64(seed))
}

/// Maps 64 random bits to `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Integer threshold `t` such that `bits < t` has probability `p`.
#[inline]
pub fn threshold(p: f64) -> u64 {
    if p <= 0.0 {
        0
    } else if p >= 1.0 {
        u64::MAX
    } else {
        (p * 18_446_744_073_709_551_616.0) as u64
    }
}

/// Uniforms keyed by `(seed, element, time)`: the same key always yields the
/// same value, and distinct keys are independent in distribution.
#[derive(Clone, Copy, Debug)]
pub struct UniformStream {
    seed: u64,
}

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn uniform(&self, element: u64) -> f64 {
        self.uniform_at(element, 0)
    }

    pub fn uniform_at(&self, element: u64, time: u64) -> f64 {
        unit_f64(hash_words(self.seed, &[element, time]))
    }
}

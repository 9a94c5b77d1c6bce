//! Keyed deterministic random streams.
//!
//! Each draw is derived from `(seed, purpose, key)` so that adding or removing
//! samples never perturbs the draws of the others.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Returns an independent generator for one `(seed, purpose, key)` triple.
pub fn keyed_rng(seed: u64, purpose: &str, key: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((purpose.len() as u64).to_le_bytes());
    hasher.update(purpose.as_bytes());
    hasher.update(key.as_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Same as [`keyed_rng`] for integer keys.
pub fn indexed_rng(seed: u64, purpose: &str, index: u64) -> ChaCha8Rng {
    keyed_rng(seed, purpose, &index.to_string())
}

/// A uniform draw in the open interval (0, 1).
pub fn open_unit(rng: &mut impl Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// 64-bit sort key for shuffling ids.
pub fn shuffle_key(seed: u64, purpose: &str, key: &str) -> u64 {
    keyed_rng(seed, purpose, key).random()
}

/// FNV-1a over raw bytes. Stable across platforms and releases.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

//! Seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded from a global
//! seed mixed with a tag (a document id, a grid index, a sample index). The
//! mix is a SHA-256 digest, so derived seeds do not depend on iteration or
//! thread order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Mixes `seed` with arbitrary tag bytes into a new 64-bit seed.
pub fn derive_seed(seed: u64, tag: &[u8]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((tag.len() as u64).to_le_bytes());
    hasher.update(tag);
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Seed for an indexed sample, e.g. `(grid point, replicate)`.
pub fn derive_indexed(seed: u64, indices: &[u64]) -> u64 {
    let tag: Vec<u8> = indices.iter().flat_map(|i| i.to_le_bytes()).collect();
    derive_seed(seed, &tag)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

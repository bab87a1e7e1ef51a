//! Seed derivation. Every random draw in the engine comes from a ChaCha
//! stream keyed by the run seed plus a label path, so results do not depend
//! on the order in which independent pieces of work are executed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn derived_seed_bytes(base: u64, labels: &[&str]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    for label in labels {
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
    }
    hasher.finalize().into()
}

/// A 64-bit child seed, e.g. for recording per-trial seeds in reports.
pub fn derived_seed(base: u64, labels: &[&str]) -> u64 {
    let bytes = derived_seed_bytes(base, labels);
    u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"))
}

pub fn derived_rng(base: u64, labels: &[&str]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derived_seed_bytes(base, labels))
}

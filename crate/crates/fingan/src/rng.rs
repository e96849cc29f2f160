//! Seed derivation.
//!
//! Every source of randomness in the crate draws from a [`ChaCha12Rng`]
//! stream derived from `(root_seed, label)`. The label is a short path-like
//! string (`"sim/rp/7"`, `"train/epoch/3"`), so independent subsystems get
//! independent streams and a run is reproducible from the root seed alone.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Derives a deterministic RNG stream from a root seed and a label.
///
/// The stream key is `SHA-256(root_seed_le || label)`, so distinct labels
/// give statistically independent streams regardless of their text.
pub fn stream(root_seed: u64, label: &str) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(root_seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(key)
}

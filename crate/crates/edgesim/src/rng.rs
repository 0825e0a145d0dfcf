//! Seed derivation. Every run owns a handful of independent RNG streams
//! (routing, arrivals, profile choice) derived from one base seed by fixed
//! labels, so adding a consumer never perturbs the others and identical
//! (config, seed) pairs replay identical randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives a named stream: base seed in the low bytes, an FNV-1a hash of
/// the label next, then the raw label bytes. Distinct labels cannot
/// collide unless FNV collides and their first 16 bytes agree.
pub fn stream(base_seed: u64, label: &str) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&base_seed.to_le_bytes());
    let mut h: u64 = 0xcbf29ce484222325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    seed[8..16].copy_from_slice(&h.to_le_bytes());
    for (i, b) in label.bytes().enumerate().take(16) {
        seed[16 + i] = b;
    }
    ChaCha8Rng::from_seed(seed)
}

/// Derives a child seed, e.g. one per sweep cell. The label carries the
/// cell identity; anything left out of it (such as the traffic split)
/// yields identical randomness across those runs.
pub fn derive_seed(base_seed: u64, label: &str) -> u64 {
    use rand::RngCore;
    stream(base_seed, label).next_u64()
}

//! Seeded, splittable randomness.
//!
//! Every "randomly chosen" step in the protocols draws from a [`SeededRng`].
//! Streams are reproducible from their 64-bit seed, and child streams derived
//! by label are independent of how much of the parent has been consumed, so
//! concurrent trials stay deterministic.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// FNV-1a over a byte slice. Stable across platforms, runs, and compiler
/// versions, unlike the std hasher.
pub fn stable_hash64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic random stream with labeled child derivation.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    rng: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// The seed this stream was constructed from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent child stream from this stream's seed and a
    /// label. Does not consume or depend on the parent's position, so the
    /// same `(seed, label)` pair always yields the same child. Distinct
    /// labels give unrelated streams.
    pub fn child(&self, label: &str) -> Self {
        let mut bytes = Vec::with_capacity(8 + label.len());
        bytes.extend_from_slice(&self.seed.to_le_bytes());
        bytes.extend_from_slice(label.as_bytes());
        Self::new(stable_hash64(&bytes))
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

//! Deterministic, splittable random streams.
//!
//! [`RngStream`] is SplitMix64 run in counter mode: draw `i` is
//! `mix(seed + (i + 1) * GOLDEN)`. The output depends only on the seed and
//! the position, so a stream is reproducible on every platform and can be
//! split into independent children by hashing a key into a new seed.
//!
//! Every stochastic draw in the crate goes through this type.

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Finalizer from SplitMix64 (Stafford variant 13).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of child `key` from a parent seed.
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    mix64(seed ^ mix64(key.wrapping_add(GOLDEN).wrapping_mul(GOLDEN)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    seed: u64,
    position: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, position: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 64-bit draws taken so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// Independent child stream. Splitting does not advance the parent.
    pub fn split(&self, key: u64) -> RngStream {
        RngStream::new(derive_seed(self.seed, key))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.position = self.position.wrapping_add(1);
        mix64(self.seed.wrapping_add(self.position.wrapping_mul(GOLDEN)))
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi]`; returns `lo` exactly when `lo == hi`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            return lo;
        }
        lo + (hi - lo) * self.uniform()
    }

    /// Unbiased integer in `[0, n)`. `n` must be non-zero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        // Lemire's multiply-shift with rejection.
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    pub fn next_secret(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        (RngStream::next_u64(self) >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        RngStream::next_u64(self)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = RngStream::next_u64(self).to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

/// Stream keys used to split a scenario seed by purpose.
pub mod streams {
    pub const SCHEDULER: u64 = 1;
    pub const DIVERSIFY: u64 = 2;
    pub const ATTACKER: u64 = 3;
    pub const WIND: u64 = 4;
}

//! Reproducible random numbers: SplitMix64 (Steele, Lea and Burris's 64-bit
//! finalizer over a Weyl sequence). Per-replication streams are derived from
//! the master seed as `mix64(master xor mix64(replication + 1))`, so any
//! implementation of this documented scheme reproduces the same draws.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN: u64 = 0x9E3779B97F4A7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in [0, 1), 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bernoulli(&mut self, probability: f64) -> bool {
        self.next_f64() < probability
    }

    /// Exponential holding time with the given rate.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        -(-self.next_f64()).ln_1p() / rate
    }
}

/// Seed of one replication's stream.
pub fn replication_seed(master: u64, replication: u64) -> u64 {
    mix64(master ^ mix64(replication.wrapping_add(1)))
}

//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`Rng`], a thin wrapper over
//! ChaCha8. The algorithm is fully specified, so a given seed produces the same
//! stream on every platform, and its state (seed, stream, word position) is
//! small enough to be checkpointed and restored exactly.

use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Independent sub-streams derived from one trial seed.
///
/// Each consumer of randomness inside a trial draws from its own stream so that,
/// for example, changing the dataset size does not perturb the network's
/// initial weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Scene = 1,
    Exploration = 2,
    Init = 3,
    Minibatch = 4,
    Translation = 5,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// A generator on the given sub-stream of `seed`.
    pub fn stream(seed: u64, stream: Stream) -> Self {
        let mut rng = Self::new(seed);
        rng.inner.set_stream(stream as u64);
        rng
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `[0, n)`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.inner.random_range(0..n)
    }

    /// Uniform integer in the inclusive range `[lo, hi]`.
    pub fn int_in(&mut self, lo: usize, hi: usize) -> usize {
        self.inner.random_range(lo..=hi)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

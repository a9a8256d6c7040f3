//! Seeded randomness with hierarchical substreams.
//!
//! A [`RandomSource`] draws from a ChaCha12 keystream. Substreams get their
//! own key, derived from a dedicated derivation stream of the parent key, so
//! `substream(i)` never overlaps the parent's draws or `substream(j)`.

use rand::distr::{Distribution, Open01};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{invalid, Result};

const DERIVATION_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    key: [u8; 32],
    rng: ChaCha12Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        let key = ChaCha12Rng::seed_from_u64(seed).get_seed();
        Self::from_key(seed, key)
    }

    fn from_key(seed: u64, key: [u8; 32]) -> Self {
        Self {
            seed,
            key,
            rng: ChaCha12Rng::from_seed(key),
        }
    }

    /// Root seed this source (or its ancestor) was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream `index`. Does not advance `self`.
    pub fn substream(&self, index: u64) -> RandomSource {
        let mut deriver = ChaCha12Rng::from_seed(self.key);
        deriver.set_stream(DERIVATION_STREAM);
        let mut parent = [0u8; 32];
        deriver.fill_bytes(&mut parent);

        let mut child = ChaCha12Rng::from_seed(parent);
        child.set_stream(index);
        let mut key = [0u8; 32];
        child.fill_bytes(&mut key);
        Self::from_key(self.seed, key)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `(0, 1)`.
    pub fn uniform_open(&mut self) -> f64 {
        Open01.sample(&mut self.rng)
    }

    /// Uniform on `[lo, hi]`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// One draw from the zero-mean Laplace distribution with scale `scale`,
/// by inverting the CDF at a single open-interval uniform.
///
/// A zero scale returns exactly zero without consuming randomness.
pub fn laplace_sample(scale: f64, rng: &mut RandomSource) -> Result<f64> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(invalid(format!(
            "Laplace scale must be a finite non-negative real, got {scale}"
        )));
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    let u = rng.uniform_open() - 0.5;
    Ok(-scale * u.signum() * (-2.0 * u.abs()).ln_1p())
}

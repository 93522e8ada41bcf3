//! Seeded random draws for scenarios, sources and test fixtures.
//!
//! All draws happen in f64 and are cast to the pipeline scalar afterwards, so
//! f32 and f64 runs consume identical streams and stay comparable.

use crate::scalar::{Cx, Scalar};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic random stream (ChaCha8 underneath).
pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn seeded(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Zero-mean unit-variance Laplacian (inverse CDF).
    pub fn laplacian(&mut self) -> f64 {
        let u = self.uniform() - 0.5;
        let b = std::f64::consts::FRAC_1_SQRT_2;
        -b * u.signum() * (1.0 - 2.0 * u.abs()).max(1e-300).ln()
    }

    /// Circular complex Gaussian with unit variance.
    pub fn complex_gaussian<T: Scalar>(&mut self) -> Cx<T> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Cx::new(T::of(self.gaussian() * s), T::of(self.gaussian() * s))
    }
}

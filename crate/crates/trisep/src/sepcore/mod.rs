//! Batch separation engines.
//!
//! The demixing model stacks the current mixture frame with far-end history
//! and delayed observation history, so echo cancellation, dereverberation and
//! source separation are all linear filters estimated per frequency bin. The
//! full stacked solver optimizes everything at once; the staged variants
//! first strip echo and reverberation by weighted least squares, then demix
//! the cleaned mixture.

mod cascade;
mod iva;
mod stack;
mod state_io;
mod wls;

pub use cascade::{cascade, Algorithm, CascadeOutput};
pub use iva::{
    bss_stage, bss_weights, joint_ss, projection_back, separation_objective, update_demix_row,
    weighted_cov, RowScratch,
};
pub use stack::{
    stack_delayed, stack_farend, stack_joint, stack_mixture, stack_regressors, BinSeries,
};
pub use state_io::{read_demix, read_demix_file, write_demix, write_demix_file};
pub use wls::{aec_stage, dr_stage, draec_stage, solve_weighted_ls_filter};

use crate::error::{Error, Result};

/// Magnitudes are floored here before being raised to a negative power.
pub(crate) const WEIGHT_FLOOR: f64 = 1e-8;
/// Diagonal loading relative to the mean diagonal of a covariance.
pub(crate) const DIAG_LOADING: f64 = 1e-6;
/// Iterations stop early once the relative coefficient change drops below this.
pub(crate) const CONVERGENCE_TOL: f64 = 1e-6;

/// Generalized Gaussian source prior `exp[-(|s|/lambda)^gamma]`.
///
/// `gamma` controls sparsity: 2 is Gaussian, 1 Laplacian, smaller values are
/// sparser still. `lambda` scales the density but cancels out of every update
/// fixed point, so it is carried only for completeness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgdPrior {
    gamma: f64,
    lambda: f64,
}

impl GgdPrior {
    pub fn new(gamma: f64, lambda: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 2.0) {
            return Err(Error::Config(format!(
                "prior shape gamma must lie in (0, 2], got {gamma}"
            )));
        }
        if !(lambda > 0.0) {
            return Err(Error::Config(format!(
                "prior scale lambda must be positive, got {lambda}"
            )));
        }
        Ok(GgdPrior { gamma, lambda })
    }

    pub fn with_gamma(gamma: f64) -> Result<Self> {
        Self::new(gamma, 1.0)
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Default for GgdPrior {
    /// Sparse default used by all experiments.
    fn default() -> Self {
        GgdPrior {
            gamma: 0.2,
            lambda: 1.0,
        }
    }
}

/// Filter geometry: `l1` far-end taps, `l2` delayed observation taps, and the
/// prediction delay `delta` in frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterTaps {
    l1: usize,
    l2: usize,
    delta: usize,
}

impl FilterTaps {
    pub fn new(l1: usize, l2: usize, delta: usize) -> Result<Self> {
        if l1 == 0 || l2 == 0 || delta == 0 {
            return Err(Error::Config(format!(
                "filter taps must satisfy l1 >= 1, l2 >= 1, delta >= 1, got ({l1}, {l2}, {delta})"
            )));
        }
        Ok(FilterTaps { l1, l2, delta })
    }

    #[inline]
    pub fn l1(&self) -> usize {
        self.l1
    }

    #[inline]
    pub fn l2(&self) -> usize {
        self.l2
    }

    #[inline]
    pub fn delta(&self) -> usize {
        self.delta
    }

    /// Length of the echo regressor for `refs` far-end channels.
    #[inline]
    pub fn aec_dim(&self, refs: usize) -> usize {
        self.l1 * refs
    }

    /// Length of the dereverberation regressor for `mics` channels.
    #[inline]
    pub fn dr_dim(&self, mics: usize) -> usize {
        self.l2 * mics
    }

    /// Length of the full stacked observation.
    #[inline]
    pub fn stacked_dim(&self, mics: usize, refs: usize) -> usize {
        mics + self.aec_dim(refs) + self.dr_dim(mics)
    }
}

impl Default for FilterTaps {
    fn default() -> Self {
        FilterTaps {
            l1: 5,
            l2: 5,
            delta: 2,
        }
    }
}

//! Multichannel source separation in the STFT domain: joint acoustic echo
//! cancellation, dereverberation and blind source separation, plus the
//! simulation and evaluation harness used to exercise it.

pub mod audio;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod online;
pub mod rng;
pub mod scalar;
pub mod scenario;
pub mod sepcore;
pub mod stft;

pub use error::{Error, Result};
pub use metrics::{evaluate, segment_ratio, si_sdr, MetricsReport};
pub use scalar::{Cx, Scalar};
pub use scenario::{simulate, ScenarioBundle, ScenarioSpec};
pub use online::{online_init, online_run, online_step, OnlineConfig, OnlineState};
pub use sepcore::{cascade, Algorithm, CascadeOutput, FilterTaps, GgdPrior};
pub use stft::{analyze, synthesize, Spectrogram, StftConfig, Window};

/// Concrete-scalar aliases for downstream code that does not want generics.
pub type Spectrogram32 = Spectrogram<f32>;
pub type Spectrogram64 = Spectrogram<f64>;
pub type CMat32 = linalg::CMat<f32>;
pub type CMat64 = linalg::CMat<f64>;

//! Algorithm selection and stage sequencing.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::Scalar;
use crate::sepcore::iva::{bss_stage, joint_ss, projection_back};
use crate::sepcore::wls::{aec_stage, dr_stage, draec_stage};
use crate::sepcore::{FilterTaps, GgdPrior};
use crate::stft::Spectrogram;
use std::fmt;
use std::time::Instant;

/// The separation strategies. The first four follow the same model factored
/// differently; `Bss` skips echo and reverberation handling entirely.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// One demixing solve over the full stacked observation.
    JointSs,
    /// Joint echo+reverberation least squares, then demixing.
    DraecBss,
    /// Dereverberate the raw mixture, cancel echo, then demix.
    DrAecBss,
    /// Cancel echo, dereverberate the echo-free signal, then demix.
    AecDrBss,
    /// Demixing only.
    Bss,
}

impl Algorithm {
    pub fn parse(token: &str) -> Result<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "joint-ss" | "joint" => Ok(Algorithm::JointSs),
            "draec-bss" | "draec" => Ok(Algorithm::DraecBss),
            "dr-aec-bss" | "dr-aec" => Ok(Algorithm::DrAecBss),
            "aec-dr-bss" | "aec-dr" => Ok(Algorithm::AecDrBss),
            "bss" => Ok(Algorithm::Bss),
            other => Err(Error::Config(format!(
                "unknown algorithm '{other}' (expected joint-ss, draec-bss, dr-aec-bss, aec-dr-bss, or bss)"
            ))),
        }
    }

    pub fn token(&self) -> &'static str {
        match self {
            Algorithm::JointSs => "joint-ss",
            Algorithm::DraecBss => "draec-bss",
            Algorithm::DrAecBss => "dr-aec-bss",
            Algorithm::AecDrBss => "aec-dr-bss",
            Algorithm::Bss => "bss",
        }
    }

    /// The four full algorithms, in reporting order.
    pub fn compared() -> [Algorithm; 4] {
        [
            Algorithm::JointSs,
            Algorithm::DraecBss,
            Algorithm::DrAecBss,
            Algorithm::AecDrBss,
        ]
    }

    pub fn needs_farend(&self) -> bool {
        !matches!(self, Algorithm::Bss)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Result of a batch run: scale-fixed sources, the final demixing matrices,
/// and wall-clock seconds per stage.
#[derive(Debug, Clone)]
pub struct CascadeOutput<T> {
    pub sources: Spectrogram<T>,
    pub demix: Vec<CMat<T>>,
    pub stage_seconds: Vec<(&'static str, f64)>,
}

/// Runs the selected algorithm end to end on spectrograms and fixes the
/// output scale by projection back onto the first channel.
pub fn cascade<T: Scalar>(
    x: &Spectrogram<T>,
    r: Option<&Spectrogram<T>>,
    algorithm: Algorithm,
    taps: &FilterTaps,
    prior: &GgdPrior,
    iters: usize,
    objective_trace: Option<&mut Vec<T>>,
) -> Result<CascadeOutput<T>> {
    let r = match (algorithm.needs_farend(), r) {
        (true, Some(r)) => Some(r),
        (true, None) => {
            return Err(Error::Config(format!(
                "algorithm {algorithm} needs a far-end reference"
            )))
        }
        (false, _) => None,
    };

    let mut stage_seconds = Vec::new();
    let mut timed = |name: &'static str, start: Instant| {
        stage_seconds.push((name, start.elapsed().as_secs_f64()));
    };

    let (demix, mut sources) = match algorithm {
        Algorithm::JointSs => {
            let t0 = Instant::now();
            let out = joint_ss(x, r.unwrap(), taps, prior, iters, objective_trace)?;
            timed("joint", t0);
            out
        }
        Algorithm::DraecBss => {
            let t0 = Instant::now();
            let (_, z) = draec_stage(x, r.unwrap(), taps, prior, iters)?;
            timed("draec", t0);
            let t0 = Instant::now();
            let out = bss_stage(&z, prior, iters, objective_trace)?;
            timed("bss", t0);
            out
        }
        Algorithm::DrAecBss => {
            let t0 = Instant::now();
            let (_, z1) = dr_stage(x, taps, prior, iters)?;
            timed("dr", t0);
            let t0 = Instant::now();
            let (_, z2) = aec_stage(&z1, r.unwrap(), taps, prior, iters)?;
            timed("aec", t0);
            let t0 = Instant::now();
            let out = bss_stage(&z2, prior, iters, objective_trace)?;
            timed("bss", t0);
            out
        }
        Algorithm::AecDrBss => {
            let t0 = Instant::now();
            let (_, y) = aec_stage(x, r.unwrap(), taps, prior, iters)?;
            timed("aec", t0);
            let t0 = Instant::now();
            let (_, z) = dr_stage(&y, taps, prior, iters)?;
            timed("dr", t0);
            let t0 = Instant::now();
            let out = bss_stage(&z, prior, iters, objective_trace)?;
            timed("bss", t0);
            out
        }
        Algorithm::Bss => {
            let t0 = Instant::now();
            let out = bss_stage(x, prior, iters, objective_trace)?;
            timed("bss", t0);
            out
        }
    };

    let t0 = Instant::now();
    projection_back(&mut sources, &demix)?;
    timed("projection", t0);

    Ok(CascadeOutput {
        sources,
        demix,
        stage_seconds,
    })
}

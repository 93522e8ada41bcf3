//! Per-bin frame series of stacked observation vectors.
//!
//! All engines work bin by bin on vectors assembled from the current mixture
//! frame, a window of far-end history, and a delayed window of observation
//! history. Within each history block the layout is tap-major: all channels
//! of lag 0, then all channels of lag 1, and so on. History before the first
//! frame is zero.

use crate::scalar::{czero, Cx, Scalar};
use crate::sepcore::FilterTaps;
use crate::stft::Spectrogram;

/// Frame-major series of fixed-dimension complex vectors for one bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinSeries<T> {
    frames: usize,
    dim: usize,
    data: Vec<Cx<T>>,
}

impl<T: Scalar> BinSeries<T> {
    pub fn zeros(frames: usize, dim: usize) -> Self {
        BinSeries {
            frames,
            dim,
            data: vec![czero(); frames * dim],
        }
    }

    #[inline]
    pub fn frames(&self) -> usize {
        self.frames
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn frame(&self, t: usize) -> &[Cx<T>] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    #[inline]
    pub fn frame_mut(&mut self, t: usize) -> &mut [Cx<T>] {
        &mut self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn energy(&self) -> T {
        self.data
            .iter()
            .map(|v| v.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
    }
}

#[inline]
fn at_or_zero<T: Scalar>(s: &Spectrogram<T>, ch: usize, t: isize, bin: usize) -> Cx<T> {
    if t < 0 {
        czero()
    } else {
        s.at(ch, t as usize, bin)
    }
}

/// Current mixture frame only: dimension = channel count.
pub fn stack_mixture<T: Scalar>(x: &Spectrogram<T>, bin: usize) -> BinSeries<T> {
    let m = x.channels();
    let mut out = BinSeries::zeros(x.frames(), m);
    for t in 0..x.frames() {
        let slots = out.frame_mut(t);
        for (ch, slot) in slots.iter_mut().enumerate() {
            *slot = x.at(ch, t, bin);
        }
    }
    out
}

/// Far-end history ending at the current frame: lags 0..l1, tap-major.
pub fn stack_farend<T: Scalar>(r: &Spectrogram<T>, l1: usize, bin: usize) -> BinSeries<T> {
    let refs = r.channels();
    let mut out = BinSeries::zeros(r.frames(), l1 * refs);
    for t in 0..r.frames() {
        let slots = out.frame_mut(t);
        let mut k = 0;
        for lag in 0..l1 {
            for ch in 0..refs {
                slots[k] = at_or_zero(r, ch, t as isize - lag as isize, bin);
                k += 1;
            }
        }
    }
    out
}

/// Delayed observation history: lags delta..delta+l2, tap-major.
pub fn stack_delayed<T: Scalar>(
    y: &Spectrogram<T>,
    l2: usize,
    delta: usize,
    bin: usize,
) -> BinSeries<T> {
    let m = y.channels();
    let mut out = BinSeries::zeros(y.frames(), l2 * m);
    for t in 0..y.frames() {
        let slots = out.frame_mut(t);
        let mut k = 0;
        for lag in 0..l2 {
            for ch in 0..m {
                slots[k] = at_or_zero(y, ch, t as isize - (delta + lag) as isize, bin);
                k += 1;
            }
        }
    }
    out
}

/// The joint echo/reverberation regressor: far-end history, then delayed
/// observation history.
pub fn stack_regressors<T: Scalar>(
    x: &Spectrogram<T>,
    r: &Spectrogram<T>,
    taps: &FilterTaps,
    bin: usize,
) -> BinSeries<T> {
    let a = stack_farend(r, taps.l1(), bin);
    let b = stack_delayed(x, taps.l2(), taps.delta(), bin);
    let mut out = BinSeries::zeros(x.frames(), a.dim() + b.dim());
    for t in 0..x.frames() {
        let slots = out.frame_mut(t);
        slots[..a.dim()].copy_from_slice(a.frame(t));
        slots[a.dim()..].copy_from_slice(b.frame(t));
    }
    out
}

/// The full stacked observation: current mixture frame, far-end history,
/// delayed observation history.
pub fn stack_joint<T: Scalar>(
    x: &Spectrogram<T>,
    r: &Spectrogram<T>,
    taps: &FilterTaps,
    bin: usize,
) -> BinSeries<T> {
    let head = stack_mixture(x, bin);
    let tail = stack_regressors(x, r, taps, bin);
    let mut out = BinSeries::zeros(x.frames(), head.dim() + tail.dim());
    for t in 0..x.frames() {
        let slots = out.frame_mut(t);
        slots[..head.dim()].copy_from_slice(head.frame(t));
        slots[head.dim()..].copy_from_slice(tail.frame(t));
    }
    out
}

//! Short-time Fourier analysis and synthesis.
//!
//! Square-root Hann on both sides (weighted overlap-add), one-sided spectrum,
//! and a padding convention that makes analyze→synthesize an identity on the
//! original sample range: one leading hop of zeros plus enough trailing frames
//! that every input sample is covered by a full window pair.

use crate::error::{Error, Result};
use crate::scalar::{czero, Cx, Scalar};
use rustfft::FftPlanner;

/// Analysis window identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// Square-root periodic Hann; with hop dividing the frame size and at
    /// least 2× overlap the analysis/synthesis pair satisfies COLA exactly.
    SqrtHann,
}

/// STFT framing parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct StftConfig {
    pub frame_size: usize,
    pub hop: usize,
    pub window: Window,
    pub sample_rate: u32,
}

impl StftConfig {
    pub fn new(frame_size: usize, hop: usize, window: Window, sample_rate: u32) -> Result<Self> {
        if frame_size == 0 || !frame_size.is_power_of_two() {
            return Err(Error::Config(format!(
                "frame size must be a nonzero power of two, got {frame_size}"
            )));
        }
        if hop == 0 || frame_size % hop != 0 {
            return Err(Error::Config(format!(
                "hop {hop} must divide frame size {frame_size}"
            )));
        }
        if hop > frame_size / 2 {
            return Err(Error::Config(format!(
                "hop {hop} leaves no overlap for frame size {frame_size}; the window pair is not COLA"
            )));
        }
        if sample_rate == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        Ok(StftConfig {
            frame_size,
            hop,
            window,
            sample_rate,
        })
    }

    /// 1024-sample frames, 512 hop, 16 kHz: the defaults used throughout.
    pub fn default_16k() -> Self {
        StftConfig::new(1024, 512, Window::SqrtHann, 16000).unwrap()
    }

    #[inline]
    pub fn bins(&self) -> usize {
        self.frame_size / 2 + 1
    }

    /// Frame count for a signal of `len` samples under this padding scheme:
    /// the signal is preceded by frame_size − hop zeros and followed by
    /// enough zeros that every sample is covered by a complete window sum.
    pub fn frames_for(&self, len: usize) -> usize {
        if len == 0 {
            0
        } else {
            (self.frame_size - self.hop + len - 1) / self.hop + 1
        }
    }

    /// Leading zero pad length.
    #[inline]
    pub(crate) fn lead_pad(&self) -> usize {
        self.frame_size - self.hop
    }

    fn analysis_window<T: Scalar>(&self) -> Vec<T> {
        let n = self.frame_size;
        match self.window {
            Window::SqrtHann => (0..n)
                .map(|i| {
                    let phase = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    T::of((0.5 * (1.0 - phase.cos())).sqrt())
                })
                .collect(),
        }
    }

    fn synthesis_window<T: Scalar>(&self) -> Vec<T> {
        // WOLA: overlapped analysis·synthesis products sum to frame/(2·hop);
        // fold that constant into the synthesis side.
        let gain = T::of(2.0 * self.hop as f64 / self.frame_size as f64);
        let mut w = self.analysis_window::<T>();
        for v in &mut w {
            *v *= gain;
        }
        w
    }
}

/// Complex STFT tensor indexed [channel][frame][bin].
#[derive(Debug, Clone)]
pub struct Spectrogram<T> {
    pub config: StftConfig,
    channels: usize,
    frames: usize,
    bins: usize,
    /// Original sample count; synthesis truncates to it.
    source_len: usize,
    data: Vec<Cx<T>>,
}

impl<T: Scalar> Spectrogram<T> {
    /// All-zero spectrogram; source length defaults to the longest signal
    /// that maps to this frame count.
    pub fn zeros(channels: usize, frames: usize, config: StftConfig) -> Self {
        let bins = config.bins();
        let source_len = ((frames + 1) * config.hop).saturating_sub(config.frame_size);
        Spectrogram {
            config,
            channels,
            frames,
            bins,
            source_len,
            data: vec![czero(); channels * frames * bins],
        }
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn frames(&self) -> usize {
        self.frames
    }

    #[inline]
    pub fn bins(&self) -> usize {
        self.bins
    }

    #[inline]
    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn set_source_len(&mut self, len: usize) {
        self.source_len = len;
    }

    #[inline]
    pub fn at(&self, ch: usize, frame: usize, bin: usize) -> Cx<T> {
        self.data[(ch * self.frames + frame) * self.bins + bin]
    }

    #[inline]
    pub fn at_mut(&mut self, ch: usize, frame: usize, bin: usize) -> &mut Cx<T> {
        &mut self.data[(ch * self.frames + frame) * self.bins + bin]
    }

    /// One frame of one channel, all bins.
    #[inline]
    pub fn frame(&self, ch: usize, frame: usize) -> &[Cx<T>] {
        let start = (ch * self.frames + frame) * self.bins;
        &self.data[start..start + self.bins]
    }

    #[inline]
    pub fn frame_mut(&mut self, ch: usize, frame: usize) -> &mut [Cx<T>] {
        let start = (ch * self.frames + frame) * self.bins;
        &mut self.data[start..start + self.bins]
    }

    /// Gathers the frame series of one bin into `out` (length = frames).
    pub fn copy_bin(&self, ch: usize, bin: usize, out: &mut [Cx<T>]) {
        debug_assert_eq!(out.len(), self.frames);
        for (t, slot) in out.iter_mut().enumerate() {
            *slot = self.data[(ch * self.frames + t) * self.bins + bin];
        }
    }

    pub fn energy(&self) -> T {
        self.data
            .iter()
            .map(|v| v.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
    }
}

/// Forward STFT of a multichannel sample buffer.
pub fn analyze<T: Scalar>(audio: &[Vec<T>], cfg: &StftConfig) -> Result<Spectrogram<T>> {
    if audio.is_empty() || audio[0].is_empty() {
        return Err(Error::Config("analyze requires nonempty audio".into()));
    }
    let len = audio[0].len();
    if audio.iter().any(|ch| ch.len() != len) {
        return Err(Error::Dimension("channels differ in length".into()));
    }
    let n = cfg.frame_size;
    let hop = cfg.hop;
    let frames = cfg.frames_for(len);
    let bins = cfg.bins();
    let window: Vec<T> = cfg.analysis_window();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut buf: Vec<Cx<T>> = vec![czero(); n];

    let mut spec = Spectrogram::zeros(audio.len(), frames, cfg.clone());
    spec.set_source_len(len);
    for (ch, samples) in audio.iter().enumerate() {
        let lead = cfg.lead_pad() as isize;
        for t in 0..frames {
            // Frame t starts at t·hop in the padded signal.
            let start = t as isize * hop as isize - lead;
            for (i, slot) in buf.iter_mut().enumerate() {
                let src = start + i as isize;
                let x = if src >= 0 && (src as usize) < len {
                    samples[src as usize]
                } else {
                    T::zero()
                };
                *slot = Cx::new(x * window[i], T::zero());
            }
            fft.process(&mut buf);
            spec.frame_mut(ch, t).copy_from_slice(&buf[..bins]);
        }
    }
    Ok(spec)
}

/// Inverse STFT back to samples, truncated to the recorded source length.
pub fn synthesize<T: Scalar>(spec: &Spectrogram<T>) -> Result<Vec<Vec<T>>> {
    let cfg = &spec.config;
    let n = cfg.frame_size;
    let hop = cfg.hop;
    let bins = cfg.bins();
    if spec.bins != bins {
        return Err(Error::Config(
            "spectrogram bin count does not match its config".into(),
        ));
    }
    let frames = spec.frames;
    let len = spec.source_len;
    let window: Vec<T> = cfg.synthesis_window();

    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n);
    let inv_n = T::one() / T::of(n as f64);
    let mut buf: Vec<Cx<T>> = vec![czero(); n];

    let padded = frames.saturating_sub(1) * hop + n;
    let mut out = Vec::with_capacity(spec.channels);
    for ch in 0..spec.channels {
        let mut acc = vec![T::zero(); padded];
        for t in 0..frames {
            let frame = spec.frame(ch, t);
            buf[..bins].copy_from_slice(frame);
            for k in 1..n - bins + 1 {
                buf[n - k] = frame[k].conj();
            }
            ifft.process(&mut buf);
            let base = t * hop;
            for i in 0..n {
                acc[base + i] += buf[i].re * inv_n * window[i];
            }
        }
        // Drop the leading pad and the tail beyond the source length.
        let lead = cfg.lead_pad();
        let mut samples = vec![T::zero(); len];
        let avail = acc.len().saturating_sub(lead).min(len);
        samples[..avail].copy_from_slice(&acc[lead..lead + avail]);
        out.push(samples);
    }
    Ok(out)
}

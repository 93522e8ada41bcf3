//! Convolutive transfer functions: per-bin FIR mixing across frames.
//!
//! `ctf_mix` applies x(t) = Σ_l A_l s(t−l) exactly per bin, which is how
//! oracle fixtures are built (the model holds by construction there).

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{czero, Cx, Scalar};
use crate::stft::{Spectrogram, StftConfig};

/// Per-bin filter tap sequence: taps[l] at bin f maps inputs to outputs.
#[derive(Debug, Clone)]
pub struct CtfFilter<T> {
    bins: usize,
    taps: usize,
    out_ch: usize,
    in_ch: usize,
    mats: Vec<CMat<T>>, // [bin * taps + tap]
}

impl<T: Scalar> CtfFilter<T> {
    pub fn new(bins: usize, taps: usize, out_ch: usize, in_ch: usize) -> Self {
        assert!(taps >= 1, "a CTF needs at least one tap");
        CtfFilter {
            bins,
            taps,
            out_ch,
            in_ch,
            mats: vec![CMat::zeros(out_ch, in_ch); bins * taps],
        }
    }

    #[inline]
    pub fn bins(&self) -> usize {
        self.bins
    }

    #[inline]
    pub fn taps(&self) -> usize {
        self.taps
    }

    #[inline]
    pub fn at(&self, bin: usize, tap: usize) -> &CMat<T> {
        &self.mats[bin * self.taps + tap]
    }

    #[inline]
    pub fn at_mut(&mut self, bin: usize, tap: usize) -> &mut CMat<T> {
        &mut self.mats[bin * self.taps + tap]
    }

    /// Horizontal concatenation: [A | B] acting on stacked inputs.
    pub fn hcat(a: &CtfFilter<T>, b: &CtfFilter<T>) -> CtfFilter<T> {
        assert_eq!(a.bins, b.bins);
        assert_eq!(a.out_ch, b.out_ch);
        let taps = a.taps.max(b.taps);
        let mut out = CtfFilter::new(a.bins, taps, a.out_ch, a.in_ch + b.in_ch);
        for bin in 0..a.bins {
            for tap in 0..taps {
                let m = out.at_mut(bin, tap);
                if tap < a.taps {
                    let src = a.at(bin, tap);
                    for r in 0..a.out_ch {
                        for c in 0..a.in_ch {
                            *m.at_mut(r, c) = src.at(r, c);
                        }
                    }
                }
                if tap < b.taps {
                    let src = b.at(bin, tap);
                    for r in 0..b.out_ch {
                        for c in 0..b.in_ch {
                            *m.at_mut(r, a.in_ch + c) = src.at(r, c);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Applies the per-bin FIR mixing model with zero history before frame 0.
pub fn ctf_mix<T: Scalar>(sources: &Spectrogram<T>, ctf: &CtfFilter<T>) -> Result<Spectrogram<T>> {
    if ctf.bins != sources.bins() {
        return Err(Error::Dimension(format!(
            "ctf has {} bins, sources have {}",
            ctf.bins,
            sources.bins()
        )));
    }
    if ctf.in_ch != sources.channels() {
        return Err(Error::Dimension(format!(
            "ctf expects {} input channels, sources have {}",
            ctf.in_ch,
            sources.channels()
        )));
    }
    let frames = sources.frames();
    let mut out = Spectrogram::zeros(ctf.out_ch, frames, sources.config.clone());
    out.set_source_len(sources.source_len());
    let mut s_vec = vec![czero::<T>(); ctf.in_ch];
    for f in 0..ctf.bins {
        for t in 0..frames {
            let mut acc = vec![czero::<T>(); ctf.out_ch];
            for l in 0..ctf.taps.min(t + 1) {
                let a = ctf.at(f, l);
                for (ch, slot) in s_vec.iter_mut().enumerate() {
                    *slot = sources.at(ch, t - l, f);
                }
                for (r, dst) in acc.iter_mut().enumerate() {
                    let row = a.row(r);
                    for (aij, sj) in row.iter().zip(s_vec.iter()) {
                        *dst += aij * sj;
                    }
                }
            }
            for (r, v) in acc.into_iter().enumerate() {
                *out.at_mut(r, t, f) = v;
            }
        }
    }
    Ok(out)
}

/// Frame-segmented CTF approximation of a set of single-source RIRs
/// (one impulse response per output channel). Exact CTFs do not exist for a
/// time-domain RIR; this is the standard per-hop segmentation.
pub fn ctf_from_rir<T: Scalar>(rirs: &[Vec<T>], cfg: &StftConfig) -> CtfFilter<T> {
    let out_ch = rirs.len();
    let max_len = rirs.iter().map(|h| h.len()).max().unwrap_or(1);
    let taps = max_len.div_ceil(cfg.hop).max(1);
    let bins = cfg.bins();
    let n = cfg.frame_size;
    let mut ctf = CtfFilter::new(bins, taps, out_ch, 1);
    for (ch, h) in rirs.iter().enumerate() {
        for tap in 0..taps {
            let seg_start = tap * cfg.hop;
            if seg_start >= h.len() {
                continue;
            }
            let seg = &h[seg_start..h.len().min(seg_start + n)];
            for bin in 0..bins {
                let mut acc = czero::<T>();
                for (i, &v) in seg.iter().enumerate() {
                    let phase = -2.0 * std::f64::consts::PI * bin as f64 * i as f64 / n as f64;
                    acc += Cx::new(v * T::of(phase.cos()), v * T::of(phase.sin()));
                }
                *ctf.at_mut(bin, tap).at_mut(ch, 0) = acc;
            }
        }
    }
    ctf
}

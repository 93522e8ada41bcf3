//! Built-in synthetic sources: amplitude-modulated colored noise with
//! Laplacian marginals, rough speech stand-ins so tests and simulations need
//! no external corpus.

use crate::rng::Rng;
use crate::scalar::Scalar;

/// Pause probability per envelope segment.
const PAUSE_PROB: f64 = 0.22;
/// Envelope control-point spacing in seconds (roughly syllabic rate).
const ENVELOPE_STEP_S: f64 = 0.08;

/// Generates a speech-like test source, RMS-normalized to 1.
pub fn speech_like<T: Scalar>(seconds: f64, sample_rate: u32, rng: &mut Rng) -> Vec<T> {
    let n = (seconds * sample_rate as f64).round() as usize;
    let mut x = vec![0.0f64; n];

    // Sparse excitation through a one-pole lowpass, plus a little of the raw
    // excitation to keep the top octaves alive.
    let pole = 0.95;
    let mut state = 0.0f64;
    for v in x.iter_mut() {
        let e = rng.laplacian();
        state = pole * state + (1.0 - pole) * e;
        *v = state + 0.05 * e;
    }

    // Piecewise-linear envelope with pauses.
    let step = (ENVELOPE_STEP_S * sample_rate as f64).round() as usize;
    let points = n / step + 2;
    let levels: Vec<f64> = (0..points)
        .map(|_| {
            if rng.uniform() < PAUSE_PROB {
                0.0
            } else {
                0.15 + rng.gaussian().abs()
            }
        })
        .collect();
    for (i, v) in x.iter_mut().enumerate() {
        let k = i / step;
        let frac = (i % step) as f64 / step as f64;
        let level = levels[k] * (1.0 - frac) + levels[k + 1] * frac;
        *v *= level;
    }

    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let scale = if rms > 0.0 { 1.0 / rms } else { 1.0 };
    x.into_iter().map(|v| T::of(v * scale)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_rms_and_deterministic() {
        let mut rng = Rng::seeded(5);
        let a = speech_like::<f64>(2.0, 16000, &mut rng);
        let mut rng = Rng::seeded(5);
        let b = speech_like::<f64>(2.0, 16000, &mut rng);
        assert_eq!(a, b);
        let rms = (a.iter().map(|v| v * v).sum::<f64>() / a.len() as f64).sqrt();
        assert!((rms - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heavier_than_gaussian_marginals() {
        let mut rng = Rng::seeded(6);
        let x = speech_like::<f64>(10.0, 16000, &mut rng);
        let n = x.len() as f64;
        let var = x.iter().map(|v| v * v).sum::<f64>() / n;
        let kurt = x.iter().map(|v| v.powi(4)).sum::<f64>() / (n * var * var);
        assert!(kurt > 5.0, "kurtosis {kurt} not super-Gaussian");
    }

    #[test]
    fn amplitude_modulation_creates_quiet_stretches() {
        let mut rng = Rng::seeded(7);
        let x = speech_like::<f64>(10.0, 16000, &mut rng);
        let win = 1600;
        let powers: Vec<f64> = x
            .chunks(win)
            .map(|c| c.iter().map(|v| v * v).sum::<f64>() / c.len() as f64)
            .collect();
        let max = powers.iter().cloned().fold(0.0, f64::max);
        let min = powers.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min < 0.05 * max, "dynamics too flat: min {min}, max {max}");
    }
}

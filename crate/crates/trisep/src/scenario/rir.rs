//! Image-method room impulse responses.
//!
//! Rigid-box image model with uniform wall reflectance derived from the
//! Sabine absorption for the requested decay time, fractional delays realized
//! by a Hann-windowed sinc, and the original 100 Hz high-pass that removes
//! the coherent DC buildup of the all-positive image amplitudes (without it
//! the measured decay reads ~30% long).

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{Point, RoomSpec};

/// Speed of sound in m/s used throughout.
pub const SPEED_OF_SOUND: f64 = 343.0;

/// Half-width factor of the fractional-delay interpolation window, seconds.
const SINC_HALF_WINDOW_S: f64 = 0.004;

impl RoomSpec {
    /// Sabine absorption coefficient implied by rt60; exceeds 1 when the
    /// requested decay is unattainable for the room volume.
    pub fn sabine_absorption(&self) -> f64 {
        let v = self.length * self.width * self.height;
        let s = 2.0
            * (self.length * self.width + self.length * self.height + self.width * self.height);
        0.161 * v / (s * self.rt60)
    }

    /// Shortest attainable rt60 (where absorption reaches 1).
    pub fn min_rt60(&self) -> f64 {
        let v = self.length * self.width * self.height;
        let s = 2.0
            * (self.length * self.width + self.length * self.height + self.width * self.height);
        0.161 * v / s
    }

    fn contains_strictly(&self, p: Point) -> bool {
        p[0] > 0.0 && p[0] < self.length && p[1] > 0.0 && p[1] < self.width && p[2] > 0.0
            && p[2] < self.height
    }
}

/// Simulates the impulse response between a source and a microphone.
pub fn image_method_rir<T: Scalar>(room: &RoomSpec, src: Point, mic: Point) -> Result<Vec<T>> {
    if room.rt60 <= 0.0 {
        return Err(Error::Geometry("rt60 must be positive".into()));
    }
    for (name, p) in [("source", src), ("microphone", mic)] {
        if !room.contains_strictly(p) {
            return Err(Error::Geometry(format!(
                "{name} position {p:?} is not strictly inside the room"
            )));
        }
    }
    let dist_m = dist(src, mic);
    if dist_m < 1e-9 {
        return Err(Error::Geometry(
            "source and microphone positions coincide".into(),
        ));
    }
    let absorption = room.sabine_absorption();
    if absorption > 1.0 {
        return Err(Error::Geometry(format!(
            "rt60 {} s is unattainable for this room (absorption {absorption:.3} > 1)",
            room.rt60
        )));
    }
    let beta = (1.0 - absorption).sqrt();

    let fs = room.sample_rate as f64;
    let cts = SPEED_OF_SOUND / fs; // meters per sample
    let tw = 2 * (SINC_HALF_WINDOW_S * fs).round() as usize; // interpolation window taps
    let direct_delay = dist_m / cts;
    let n_samples = ((1.5 * room.rt60 * fs).ceil() as usize)
        .max(direct_delay.ceil() as usize + tw + 1);

    // Work in sample units.
    let ls = [room.length / cts, room.width / cts, room.height / cts];
    let s = [src[0] / cts, src[1] / cts, src[2] / cts];
    let m = [mic[0] / cts, mic[1] / cts, mic[2] / cts];
    let n_img: Vec<i64> = ls
        .iter()
        .map(|l| (n_samples as f64 / (2.0 * l)).ceil() as i64)
        .collect();

    let mut h = vec![0.0f64; n_samples];
    let gain_norm = 1.0 / (4.0 * std::f64::consts::PI * cts);
    let rot = 2.0 * std::f64::consts::PI / tw as f64;
    let (rot_cos, rot_sin) = (rot.cos(), rot.sin());

    for mx in -n_img[0]..=n_img[0] {
        for my in -n_img[1]..=n_img[1] {
            for mz in -n_img[2]..=n_img[2] {
                let rm = [
                    2.0 * mx as f64 * ls[0],
                    2.0 * my as f64 * ls[1],
                    2.0 * mz as f64 * ls[2],
                ];
                for q in 0..2i64 {
                    for j in 0..2i64 {
                        for k in 0..2i64 {
                            let rp = [
                                (1 - 2 * q) as f64 * s[0] - m[0] + rm[0],
                                (1 - 2 * j) as f64 * s[1] - m[1] + rm[1],
                                (1 - 2 * k) as f64 * s[2] - m[2] + rm[2],
                            ];
                            let d = (rp[0] * rp[0] + rp[1] * rp[1] + rp[2] * rp[2]).sqrt();
                            let fd = d.floor();
                            if fd as usize >= n_samples {
                                continue;
                            }
                            let order = (mx - q).abs()
                                + mx.abs()
                                + (my - j).abs()
                                + my.abs()
                                + (mz - k).abs()
                                + mz.abs();
                            let gain = beta.powi(order as i32) * gain_norm / d.max(1e-12);

                            // Hann-windowed sinc at fractional delay d−fd.
                            // t runs t0, t0+1, …; sin(πt) alternates in sign
                            // with a single evaluation, the Hann cosine walks
                            // by complex rotation.
                            let t0 = 1.0 - tw as f64 / 2.0 - (d - fd);
                            let sin_pi_t0 = (std::f64::consts::PI * t0).sin();
                            let theta0 = rot * t0;
                            let (mut cs, mut sn) = (theta0.cos(), theta0.sin());
                            let start = fd as i64 - tw as i64 / 2 + 1;
                            let mut sign = 1.0f64;
                            for i in 0..tw {
                                let t = t0 + i as f64;
                                let sinc = if t.abs() < 1e-9 {
                                    1.0
                                } else {
                                    sign * sin_pi_t0 / (std::f64::consts::PI * t)
                                };
                                let idx = start + i as i64;
                                if idx >= 0 && (idx as usize) < n_samples {
                                    let hann = 0.5 * (1.0 + cs);
                                    h[idx as usize] += gain * hann * sinc;
                                }
                                let next_cs = cs * rot_cos - sn * rot_sin;
                                sn = sn * rot_cos + cs * rot_sin;
                                cs = next_cs;
                                sign = -sign;
                            }
                        }
                    }
                }
            }
        }
    }

    highpass_100hz(&mut h, fs);
    Ok(h.into_iter().map(T::of).collect())
}

/// The image method's classic 100 Hz high-pass companion filter; removes the
/// nonzero DC component that otherwise slows the measured energy decay.
fn highpass_100hz(h: &mut [f64], fs: f64) {
    let w = 2.0 * std::f64::consts::PI * 100.0 / fs;
    let r1 = (-w).exp();
    let b1 = 2.0 * r1 * w.cos();
    let b2 = -r1 * r1;
    let a1 = -(1.0 + r1);
    let mut y = [0.0f64; 3];
    for v in h.iter_mut() {
        y[2] = y[1];
        y[1] = y[0];
        y[0] = b1 * y[1] + b2 * y[2] + *v;
        *v = y[0] + a1 * y[1] + r1 * y[2];
    }
}

fn dist(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room(rt60: f64) -> RoomSpec {
        RoomSpec {
            length: 4.0,
            width: 3.0,
            height: 2.5,
            rt60,
            sample_rate: 16000,
        }
    }

    #[test]
    fn coincident_positions_error() {
        let p = [1.5, 1.5, 1.2];
        assert!(matches!(
            image_method_rir::<f64>(&room(0.3), p, p),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn outside_positions_error() {
        let r = room(0.3);
        assert!(image_method_rir::<f64>(&r, [4.5, 1.0, 1.0], [1.0, 1.0, 1.0]).is_err());
        assert!(image_method_rir::<f64>(&r, [1.0, 1.0, 1.0], [1.0, 3.0, 1.0]).is_err());
    }

    #[test]
    fn infeasible_rt60_errors() {
        // Below the Sabine bound the absorption would exceed 1.
        let r = room(0.3);
        let infeasible = r.min_rt60() * 0.9;
        assert!(matches!(
            image_method_rir::<f64>(&room(infeasible), [1.0, 1.0, 1.0], [2.0, 2.0, 1.5]),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn anechoic_limit_is_a_single_scaled_impulse() {
        // Absorption → 1 from the feasible side: every reflected image carries
        // a vanishing amplitude and only the direct pulse survives.
        let base = room(0.3);
        let r = room(base.min_rt60() * (1.0 + 1e-6));
        let cts = SPEED_OF_SOUND / 16000.0;
        // Pick a distance that lands on an integer sample delay so the
        // windowed sinc collapses onto one tap.
        let d_samples = 40.0;
        let src = [1.0, 1.0, 1.2];
        let mic = [1.0 + d_samples * cts, 1.0, 1.2];
        let h = image_method_rir::<f64>(&r, src, mic).unwrap();
        let peak_idx = h
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap()
            .0;
        assert_eq!(peak_idx, (d_samples * cts * 16000.0 / SPEED_OF_SOUND) as usize);
        let total: f64 = h.iter().map(|v| v * v).sum();
        let peak = h[peak_idx] * h[peak_idx];
        // The 100 Hz high-pass rings for a couple of milliseconds after the
        // pulse, so a few percent of the energy sits in its decay tail.
        assert!(
            peak / total > 0.95,
            "direct pulse holds {:.4} of the energy",
            peak / total
        );
        let expected_gain = 1.0 / (4.0 * std::f64::consts::PI * d_samples * cts);
        assert!((h[peak_idx] - expected_gain).abs() / expected_gain < 0.05);
    }

    #[test]
    fn length_covers_rt60() {
        let r = room(0.3);
        let h = image_method_rir::<f64>(&r, [1.1, 1.3, 1.2], [2.9, 1.9, 1.4]).unwrap();
        assert!(h.len() >= (0.3 * 16000.0) as usize);
    }

    #[test]
    fn schroeder_decay_reaches_minus_60_db_near_rt60() {
        let r = room(0.3);
        let h = image_method_rir::<f64>(&r, [1.1, 1.3, 1.2], [2.9, 1.9, 1.4]).unwrap();
        let t60 = edc_crossing_seconds(&h, 16000.0, -60.0);
        assert!(
            (t60 - 0.3).abs() / 0.3 <= 0.20,
            "measured t60 {t60:.3} s vs nominal 0.3 s"
        );
    }

    #[test]
    fn decay_slope_consistent_with_rt60() {
        // T30-style reading: fit the Schroeder curve between −5 and −35 dB
        // and extrapolate to −60; immune to late-tail truncation.
        for (dims, rt60) in [([4.0, 3.0, 2.5], 0.3), ([5.0, 4.0, 3.0], 0.6)] {
            let r = RoomSpec {
                length: dims[0],
                width: dims[1],
                height: dims[2],
                rt60,
                sample_rate: 16000,
            };
            let h = image_method_rir::<f64>(&r, [1.1, 1.3, 1.2], [2.9, 1.9, 1.4]).unwrap();
            let edc = schroeder_edc_db(&h);
            let i5 = edc.iter().position(|&v| v < -5.0).unwrap();
            let i35 = edc.iter().position(|&v| v < -35.0).unwrap();
            // Least-squares slope in dB per sample.
            let n = (i35 - i5) as f64;
            let mean_x = (i5 + i35 - 1) as f64 / 2.0;
            let mean_y = edc[i5..i35].iter().sum::<f64>() / n;
            let mut num = 0.0;
            let mut den = 0.0;
            for (k, &v) in edc[i5..i35].iter().enumerate() {
                let x = (i5 + k) as f64 - mean_x;
                num += x * (v - mean_y);
                den += x * x;
            }
            let slope = num / den;
            let t60 = -60.0 / slope / 16000.0;
            assert!(
                (t60 - rt60).abs() / rt60 <= 0.20,
                "slope-fit t60 {t60:.3} s vs nominal {rt60} s"
            );
        }
    }

    fn schroeder_edc_db(h: &[f64]) -> Vec<f64> {
        let mut acc = 0.0;
        let mut rev: Vec<f64> = h.iter().rev().map(|v| {
            acc += v * v;
            acc
        }).collect();
        rev.reverse();
        let total = rev[0];
        rev.into_iter()
            .map(|e| 10.0 * (e / total).max(1e-30).log10())
            .collect()
    }

    fn edc_crossing_seconds(h: &[f64], fs: f64, level_db: f64) -> f64 {
        let edc = schroeder_edc_db(h);
        edc.iter().position(|&v| v < level_db).unwrap_or(edc.len()) as f64 / fs
    }
}

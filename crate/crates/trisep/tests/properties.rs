//! Randomized property checks for the public signal-level API.

use proptest::prelude::*;
use trisep::metrics::DB_CAP;
use trisep::{analyze, segment_ratio, si_sdr, synthesize, StftConfig, Window};

fn signal(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, len)
}

proptest! {
    #[test]
    fn si_sdr_is_invariant_to_positive_scaling(
        r in signal(16..128),
        noise in signal(16..128),
        c in 0.01f64..100.0,
    ) {
        let n = r.len().min(noise.len());
        let r = &r[..n];
        prop_assume!(r.iter().any(|&v| v != 0.0));
        let e: Vec<f64> = r.iter().zip(&noise[..n]).map(|(&a, &b)| a + 0.3 * b).collect();
        let base = si_sdr(&e, r).unwrap();
        let scaled_e: Vec<f64> = e.iter().map(|&v| c * v).collect();
        let scaled_r: Vec<f64> = r.iter().map(|&v| c * v).collect();
        prop_assert!((si_sdr(&scaled_e, r).unwrap() - base).abs() < 1e-9);
        prop_assert!((si_sdr(&e, &scaled_r).unwrap() - base).abs() < 1e-9);
    }

    #[test]
    fn si_sdr_respects_the_cap(e in signal(16..64), r in signal(16..64)) {
        let n = e.len().min(r.len());
        let r = &r[..n];
        prop_assume!(r.iter().map(|&v| v * v).sum::<f64>() > 0.0);
        let v = si_sdr(&e[..n], r).unwrap();
        prop_assert!((-DB_CAP..=DB_CAP).contains(&v));
    }

    #[test]
    fn segment_ratios_ignore_overall_gain(x in signal(64..256), c in 0.01f64..100.0) {
        let half = x.len() / 2;
        let num = (0, half);
        let den = (half, x.len());
        prop_assume!(x[half..].iter().any(|&v| v != 0.0));
        let base = segment_ratio(&x, num, den).unwrap();
        let scaled: Vec<f64> = x.iter().map(|&v| c * v).collect();
        prop_assert!((segment_ratio(&scaled, num, den).unwrap() - base).abs() < 1e-9);
    }

    #[test]
    fn swapping_ratio_segments_flips_the_sign(x in signal(64..256)) {
        let half = x.len() / 2;
        let a = (0, half);
        let b = (half, x.len());
        prop_assume!(x[..half].iter().any(|&v| v != 0.0));
        prop_assume!(x[half..].iter().any(|&v| v != 0.0));
        let fwd = segment_ratio(&x, a, b).unwrap();
        let rev = segment_ratio(&x, b, a).unwrap();
        prop_assert!((fwd + rev).abs() < 1e-9);
    }

    #[test]
    fn stft_round_trip_reconstructs_the_signal(x in signal(256..1024)) {
        let cfg = StftConfig::new(64, 32, Window::SqrtHann, 16000).unwrap();
        let spec = analyze(&[x.clone()], &cfg).unwrap();
        let back = synthesize(&spec).unwrap();
        for (i, &v) in x.iter().enumerate() {
            prop_assert!((back[0][i] - v).abs() < 1e-9, "sample {i}: {} vs {v}", back[0][i]);
        }
    }
}

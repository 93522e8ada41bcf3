//! Simulated living-room scenarios: image-method acoustics, the four-segment
//! source overlap layout, SIR/SER calibration, and directory round-tripping.
//!
//! Segment layout (normative): I interferer only; II target + interferer;
//! III target + interferer + echo; IV interferer + echo.

mod ctf;
mod rir;
mod sources;

pub use ctf::{ctf_from_rir, ctf_mix, CtfFilter};
pub use rir::{image_method_rir, SPEED_OF_SOUND};
pub use sources::speech_like;

use crate::audio::{read_wav, write_wav};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::{czero, Cx, Scalar};
use crate::stft::{StftConfig, Window};
use rustfft::FftPlanner;
use std::path::Path;

/// A position in meters.
pub type Point = [f64; 3];

/// Shoebox room with a target decay time.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomSpec {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub rt60: f64,
    pub sample_rate: u32,
}

/// Complete description of one simulated scene.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub room: RoomSpec,
    pub mic_positions: [Point; 2],
    pub loudspeaker_position: Point,
    pub target_position: Point,
    pub interferer_position: Point,
    pub ser_db: f64,
    pub sir_db: f64,
    pub segment_seconds: f64,
    pub seed: u64,
}

/// Dry input signals for the three acoustic paths.
#[derive(Debug, Clone)]
pub struct ScenarioSources<T> {
    /// Active in segments II and III.
    pub target: Vec<T>,
    /// Active throughout.
    pub interferer: Vec<T>,
    /// Loudspeaker feed, active in segments III and IV.
    pub echo_playback: Vec<T>,
}

/// Time-domain impulse responses plus their frame-domain approximations.
#[derive(Debug, Clone)]
pub struct MixingSystem<T> {
    pub rir_target: [Vec<T>; 2],
    pub rir_interferer: [Vec<T>; 2],
    pub rir_echo: [Vec<T>; 2],
    /// Near-end mixing (target, interferer) per bin, M×2 per tap.
    pub ctf_a: CtfFilter<T>,
    /// Echo path per bin, M×1 per tap.
    pub ctf_b: CtfFilter<T>,
}

/// Per-source microphone images.
#[derive(Debug, Clone)]
pub struct Stems<T> {
    pub target: Vec<Vec<T>>,
    pub interferer: Vec<Vec<T>>,
    pub echo: Vec<Vec<T>>,
}

/// Everything a separation + evaluation run needs.
#[derive(Debug, Clone)]
pub struct ScenarioBundle<T> {
    pub mic_signals: Vec<Vec<T>>,
    pub farend_reference: Vec<T>,
    /// Direct path + 50 ms early reflections of the target at mic 1.
    pub groundtruth_target_early: Vec<T>,
    pub segment_boundaries: [(usize, usize); 4],
    pub stems: Stems<T>,
    pub sample_rate: u32,
}

impl ScenarioSpec {
    /// Randomizes geometry the way the experiments describe: room dimensions
    /// uniform in [4,8]×[3,6]×[2.5,4] m, the 10 cm two-mic array at least
    /// 50 cm from every wall, the loudspeaker 15 cm below the array, and the
    /// two near-end sources placed freely.
    pub fn sample(rt60: f64, ser_db: f64, seed: u64) -> Self {
        Self::sample_with_segments(rt60, ser_db, 5.0, seed)
    }

    /// `sample` with an explicit segment length.
    pub fn sample_with_segments(rt60: f64, ser_db: f64, segment_seconds: f64, seed: u64) -> Self {
        let mut rng = Rng::seeded(seed);
        Self::sample_with(&mut rng, rt60, ser_db, segment_seconds, seed)
    }

    pub(crate) fn sample_with(
        rng: &mut Rng,
        rt60: f64,
        ser_db: f64,
        segment_seconds: f64,
        seed: u64,
    ) -> Self {
        let length = rng.range(4.0, 8.0);
        let width = rng.range(3.0, 6.0);
        let height = rng.range(2.5, 4.0);
        let margin = 0.55;
        let center = [
            rng.range(margin, length - margin),
            rng.range(margin, width - margin),
            rng.range(0.9, 1.6),
        ];
        let theta = rng.range(0.0, 2.0 * std::f64::consts::PI);
        let (dx, dy) = (0.05 * theta.cos(), 0.05 * theta.sin());
        let mic_positions = [
            [center[0] - dx, center[1] - dy, center[2]],
            [center[0] + dx, center[1] + dy, center[2]],
        ];
        let loudspeaker_position = [center[0], center[1], center[2] - 0.15];
        let mut place = |avoid: &[Point]| loop {
            let p = [
                rng.range(0.5, length - 0.5),
                rng.range(0.5, width - 0.5),
                rng.range(0.8, (height - 0.3).min(2.0)),
            ];
            if avoid.iter().all(|a| dist(*a, p) >= 0.4) && dist(center, p) >= 0.4 {
                break p;
            }
        };
        let target_position = place(&[]);
        let interferer_position = place(&[target_position]);
        ScenarioSpec {
            room: RoomSpec {
                length,
                width,
                height,
                rt60,
                sample_rate: 16000,
            },
            mic_positions,
            loudspeaker_position,
            target_position,
            interferer_position,
            ser_db,
            sir_db: 0.0,
            segment_seconds,
            seed,
        }
    }

    pub fn segment_samples(&self) -> usize {
        (self.segment_seconds * self.room.sample_rate as f64).round() as usize
    }
}

impl<T: Scalar> MixingSystem<T> {
    pub fn from_spec(spec: &ScenarioSpec) -> Result<Self> {
        let [tgt, itf, echo] = rirs_for_spec(spec)?;
        let cfg = StftConfig::new(1024, 512, Window::SqrtHann, spec.room.sample_rate)?;
        let ctf_target = ctf_from_rir(&tgt, &cfg);
        let ctf_interferer = ctf_from_rir(&itf, &cfg);
        let ctf_a = CtfFilter::hcat(&ctf_target, &ctf_interferer);
        let ctf_b = ctf_from_rir(&echo, &cfg);
        Ok(MixingSystem {
            rir_target: tgt,
            rir_interferer: itf,
            rir_echo: echo,
            ctf_a,
            ctf_b,
        })
    }
}

fn rirs_for_spec<T: Scalar>(spec: &ScenarioSpec) -> Result<[[Vec<T>; 2]; 3]> {
    let room = &spec.room;
    let pair = |src: Point| -> Result<[Vec<T>; 2]> {
        Ok([
            image_method_rir(room, src, spec.mic_positions[0])?,
            image_method_rir(room, src, spec.mic_positions[1])?,
        ])
    };
    Ok([
        pair(spec.target_position)?,
        pair(spec.interferer_position)?,
        pair(spec.loudspeaker_position)?,
    ])
}

/// Full linear convolution via FFT.
pub fn convolve<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut fa: Vec<Cx<T>> = a
        .iter()
        .map(|&v| Cx::new(v, T::zero()))
        .chain(std::iter::repeat(czero()))
        .take(n)
        .collect();
    let mut fb: Vec<Cx<T>> = b
        .iter()
        .map(|&v| Cx::new(v, T::zero()))
        .chain(std::iter::repeat(czero()))
        .take(n)
        .collect();
    fft.process(&mut fa);
    fft.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(fb.iter()) {
        *x *= y;
    }
    ifft.process(&mut fa);
    let scale = T::one() / T::of(n as f64);
    fa.into_iter().take(out_len).map(|v| v.re * scale).collect()
}

/// Mixes dry sources into microphone signals with calibrated SIR/SER.
///
/// Sources are gated dry (so reverberation tails bleed across segment
/// boundaries naturally), convolved with their impulse responses, and the
/// interferer/echo images are scaled so segment-III energy ratios at mic 1
/// match the spec. The far-end reference is scaled together with the echo.
pub fn synthesize_scenario<T: Scalar>(
    spec: &ScenarioSpec,
    sources: &ScenarioSources<T>,
) -> Result<ScenarioBundle<T>> {
    let seg = spec.segment_samples();
    let total = 4 * seg;
    if sources.target.len() < 2 * seg {
        return Err(Error::Dimension(format!(
            "target source too short: {} samples for two {seg}-sample segments",
            sources.target.len()
        )));
    }
    if sources.interferer.len() < total {
        return Err(Error::Dimension(format!(
            "interferer source too short: {} samples for four {seg}-sample segments",
            sources.interferer.len()
        )));
    }
    if sources.echo_playback.len() < 2 * seg {
        return Err(Error::Dimension(format!(
            "echo playback too short: {} samples for two {seg}-sample segments",
            sources.echo_playback.len()
        )));
    }

    // Gated dry timelines over the full four segments.
    let mut target_tl = vec![T::zero(); total];
    target_tl[seg..3 * seg].copy_from_slice(&sources.target[..2 * seg]);
    let interferer_tl = sources.interferer[..total].to_vec();
    let mut echo_tl = vec![T::zero(); total];
    echo_tl[2 * seg..total].copy_from_slice(&sources.echo_playback[..2 * seg]);

    let [rir_t, rir_i, rir_e] = rirs_for_spec::<T>(spec)?;
    let image = |dry: &[T], rirs: &[Vec<T>; 2]| -> Vec<Vec<T>> {
        rirs.iter()
            .map(|h| {
                let mut y = convolve(dry, h);
                y.truncate(total);
                y.resize(total, T::zero());
                y
            })
            .collect()
    };
    let target_img = image(&target_tl, &rir_t);
    let mut interferer_img = image(&interferer_tl, &rir_i);
    let mut echo_img = image(&echo_tl, &rir_e);

    // Segment-III calibration at mic 1.
    let iii = 2 * seg..3 * seg;
    let e_t = energy(&target_img[0][iii.clone()]);
    let e_i = energy(&interferer_img[0][iii.clone()]);
    let e_e = energy(&echo_img[0][iii.clone()]);
    if e_t == T::zero() {
        return Err(Error::Config(
            "target image carries no energy in segment III; cannot calibrate".into(),
        ));
    }
    let g_i = gain_for(e_t, e_i, spec.sir_db);
    let g_e = gain_for(e_t, e_e, spec.ser_db);
    for ch in &mut interferer_img {
        for v in ch.iter_mut() {
            *v *= g_i;
        }
    }
    for ch in &mut echo_img {
        for v in ch.iter_mut() {
            *v *= g_e;
        }
    }
    let farend_reference: Vec<T> = echo_tl.iter().map(|&v| v * g_e).collect();

    let mic_signals: Vec<Vec<T>> = (0..2)
        .map(|m| {
            (0..total)
                .map(|i| target_img[m][i] + interferer_img[m][i] + echo_img[m][i])
                .collect()
        })
        .collect();

    // Early-reflection reference: target RIR at mic 1 cut 50 ms after the
    // direct arrival, convolved with the same gated dry target.
    let fs = spec.room.sample_rate as f64;
    let arrival = (dist(spec.target_position, spec.mic_positions[0]) / SPEED_OF_SOUND * fs)
        .round() as usize;
    let cut = (arrival + (0.05 * fs).round() as usize + 1).min(rir_t[0].len());
    let mut groundtruth = convolve(&target_tl, &rir_t[0][..cut]);
    groundtruth.truncate(total);
    groundtruth.resize(total, T::zero());

    Ok(ScenarioBundle {
        mic_signals,
        farend_reference,
        groundtruth_target_early: groundtruth,
        segment_boundaries: [
            (0, seg),
            (seg, 2 * seg),
            (2 * seg, 3 * seg),
            (3 * seg, total),
        ],
        stems: Stems {
            target: target_img,
            interferer: interferer_img,
            echo: echo_img,
        },
        sample_rate: spec.room.sample_rate,
    })
}

/// Deterministic dry sources for a spec: the two near-end talkers and the
/// far-end playback. Drawn from the spec's seed on a stream independent of
/// geometry sampling, so editing the sampled geometry keeps the sources.
pub fn scenario_sources<T: Scalar>(spec: &ScenarioSpec) -> ScenarioSources<T> {
    let mut rng = Rng::seeded(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let s = spec.segment_seconds;
    let fs = spec.room.sample_rate;
    ScenarioSources {
        target: speech_like(2.0 * s, fs, &mut rng),
        interferer: speech_like(4.0 * s, fs, &mut rng),
        echo_playback: speech_like(2.0 * s, fs, &mut rng),
    }
}

/// Samples a scene and its sources from one seed and mixes them.
pub fn simulate<T: Scalar>(
    rt60: f64,
    ser_db: f64,
    seed: u64,
    segment_seconds: f64,
) -> Result<(ScenarioSpec, ScenarioBundle<T>)> {
    let spec = ScenarioSpec::sample_with_segments(rt60, ser_db, segment_seconds, seed);
    let bundle = synthesize_scenario(&spec, &scenario_sources(&spec))?;
    Ok((spec, bundle))
}

fn gain_for<T: Scalar>(e_ref: T, e_src: T, ratio_db: f64) -> T {
    if e_src == T::zero() {
        T::zero()
    } else {
        (e_ref / e_src / T::of(10f64.powf(ratio_db / 10.0))).sqrt()
    }
}

fn energy<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).fold(T::zero(), |a, b| a + b)
}

fn dist(a: Point, b: Point) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Writes mic.wav, farend.wav, ref_early.wav, stems/ and scenario.txt.
pub fn write_scenario_dir<T: Scalar>(
    dir: &Path,
    spec: &ScenarioSpec,
    bundle: &ScenarioBundle<T>,
) -> Result<()> {
    std::fs::create_dir_all(dir.join("stems"))?;
    let fs = bundle.sample_rate;
    write_wav(&dir.join("mic.wav"), &bundle.mic_signals, fs)?;
    write_wav(&dir.join("farend.wav"), &[bundle.farend_reference.clone()], fs)?;
    write_wav(
        &dir.join("ref_early.wav"),
        &[bundle.groundtruth_target_early.clone()],
        fs,
    )?;
    write_wav(&dir.join("stems/target.wav"), &bundle.stems.target, fs)?;
    write_wav(&dir.join("stems/interferer.wav"), &bundle.stems.interferer, fs)?;
    write_wav(&dir.join("stems/echo.wav"), &bundle.stems.echo, fs)?;

    let mut meta = String::new();
    meta.push_str("# trisep scenario metadata\n");
    let mut kv = |k: &str, v: String| {
        meta.push_str(k);
        meta.push_str(" = ");
        meta.push_str(&v);
        meta.push('\n');
    };
    // Default float formatting prints the shortest string that parses back
    // to the same f64, so the spec survives the round trip bit-exact.
    kv("seed", spec.seed.to_string());
    kv("sample_rate", spec.room.sample_rate.to_string());
    kv("room_length", spec.room.length.to_string());
    kv("room_width", spec.room.width.to_string());
    kv("room_height", spec.room.height.to_string());
    kv("rt60", spec.room.rt60.to_string());
    kv("ser_db", spec.ser_db.to_string());
    kv("sir_db", spec.sir_db.to_string());
    kv("segment_seconds", spec.segment_seconds.to_string());
    let pt = |p: Point| format!("{} {} {}", p[0], p[1], p[2]);
    kv("mic1", pt(spec.mic_positions[0]));
    kv("mic2", pt(spec.mic_positions[1]));
    kv("loudspeaker", pt(spec.loudspeaker_position));
    kv("target", pt(spec.target_position));
    kv("interferer", pt(spec.interferer_position));
    kv(
        "segments",
        bundle
            .segment_boundaries
            .iter()
            .map(|(a, b)| format!("{a}:{b}"))
            .collect::<Vec<_>>()
            .join(","),
    );
    std::fs::write(dir.join("scenario.txt"), meta)?;
    Ok(())
}

/// Reads a directory previously written by `write_scenario_dir`.
pub fn read_scenario_dir<T: Scalar>(dir: &Path) -> Result<(ScenarioSpec, ScenarioBundle<T>)> {
    let meta = std::fs::read_to_string(dir.join("scenario.txt"))?;
    let mut map = std::collections::HashMap::new();
    for line in meta.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let get = |k: &str| -> Result<&String> {
        map.get(k)
            .ok_or_else(|| Error::Config(format!("scenario.txt is missing key '{k}'")))
    };
    let num = |k: &str| -> Result<f64> {
        get(k)?
            .parse()
            .map_err(|_| Error::Config(format!("scenario.txt key '{k}' is not a number")))
    };
    let point = |k: &str| -> Result<Point> {
        let parts: Vec<f64> = get(k)?
            .split_whitespace()
            .filter_map(|t| t.parse().ok())
            .collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("scenario.txt key '{k}' is not a point")));
        }
        Ok([parts[0], parts[1], parts[2]])
    };
    let spec = ScenarioSpec {
        room: RoomSpec {
            length: num("room_length")?,
            width: num("room_width")?,
            height: num("room_height")?,
            rt60: num("rt60")?,
            sample_rate: num("sample_rate")? as u32,
        },
        mic_positions: [point("mic1")?, point("mic2")?],
        loudspeaker_position: point("loudspeaker")?,
        target_position: point("target")?,
        interferer_position: point("interferer")?,
        ser_db: num("ser_db")?,
        sir_db: num("sir_db")?,
        segment_seconds: num("segment_seconds")?,
        seed: num("seed")? as u64,
    };
    let mut bounds = [(0usize, 0usize); 4];
    let toks: Vec<&str> = get("segments")?.split(',').collect();
    if toks.len() != 4 {
        return Err(Error::Config("scenario.txt needs four segments".into()));
    }
    for (slot, tok) in bounds.iter_mut().zip(toks) {
        let (a, b) = tok
            .split_once(':')
            .ok_or_else(|| Error::Config("malformed segment interval".into()))?;
        *slot = (
            a.parse().map_err(|_| Error::Config("bad segment bound".into()))?,
            b.parse().map_err(|_| Error::Config("bad segment bound".into()))?,
        );
    }
    let (mic_signals, fs) = read_wav(&dir.join("mic.wav"))?;
    let (farend, _) = read_wav(&dir.join("farend.wav"))?;
    let (reference, _) = read_wav(&dir.join("ref_early.wav"))?;
    let (target, _) = read_wav(&dir.join("stems/target.wav"))?;
    let (interferer, _) = read_wav(&dir.join("stems/interferer.wav"))?;
    let (echo, _) = read_wav(&dir.join("stems/echo.wav"))?;
    Ok((
        spec,
        ScenarioBundle {
            mic_signals,
            farend_reference: farend.into_iter().next().unwrap_or_default(),
            groundtruth_target_early: reference.into_iter().next().unwrap_or_default(),
            segment_boundaries: bounds,
            stems: Stems {
                target,
                interferer,
                echo,
            },
            sample_rate: fs,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast_spec(seed: u64) -> ScenarioSpec {
        // One-second segments keep the unit tests quick.
        let mut rng = Rng::seeded(seed);
        ScenarioSpec::sample_with(&mut rng, 0.3, 0.0, 1.0, seed)
    }

    fn fast_sources(spec: &ScenarioSpec, seed: u64) -> ScenarioSources<f64> {
        let mut rng = Rng::seeded(seed ^ 0x5eed);
        let fs = spec.room.sample_rate;
        ScenarioSources {
            target: speech_like(2.0 * spec.segment_seconds, fs, &mut rng),
            interferer: speech_like(4.0 * spec.segment_seconds, fs, &mut rng),
            echo_playback: speech_like(2.0 * spec.segment_seconds, fs, &mut rng),
        }
    }

    #[test]
    fn sampled_geometry_respects_constraints() {
        for seed in 0..20 {
            let s = fast_spec(seed);
            assert!(s.room.length >= 4.0 && s.room.length <= 8.0);
            assert!(s.room.width >= 3.0 && s.room.width <= 6.0);
            assert!(s.room.height >= 2.5 && s.room.height <= 4.0);
            let spacing = dist(s.mic_positions[0], s.mic_positions[1]);
            assert!((spacing - 0.1).abs() < 1e-9, "mic spacing {spacing}");
            for m in s.mic_positions {
                assert!(m[0] >= 0.5 && m[0] <= s.room.length - 0.5);
                assert!(m[1] >= 0.5 && m[1] <= s.room.width - 0.5);
            }
            let ls = s.loudspeaker_position;
            let array_z = s.mic_positions[0][2];
            assert!((array_z - ls[2] - 0.15).abs() < 1e-9);
        }
    }

    #[test]
    fn segment_iii_energies_match_at_unit_ratios() {
        let spec = fast_spec(11);
        let bundle = synthesize_scenario(&spec, &fast_sources(&spec, 11)).unwrap();
        let (a, b) = bundle.segment_boundaries[2];
        let et = energy(&bundle.stems.target[0][a..b]);
        let ei = energy(&bundle.stems.interferer[0][a..b]);
        let ee = energy(&bundle.stems.echo[0][a..b]);
        let db = |x: f64, y: f64| 10.0 * (x / y).log10();
        assert!(db(et, ei).abs() < 0.1, "target/interferer {}", db(et, ei));
        assert!(db(et, ee).abs() < 0.1, "target/echo {}", db(et, ee));
    }

    #[test]
    fn ser_minus_10_scales_echo_up() {
        let mut spec = fast_spec(12);
        spec.ser_db = -10.0;
        let bundle = synthesize_scenario(&spec, &fast_sources(&spec, 12)).unwrap();
        let (a, b) = bundle.segment_boundaries[2];
        let et = energy(&bundle.stems.target[0][a..b]);
        let ee = energy(&bundle.stems.echo[0][a..b]);
        let ser = 10.0 * (et / ee).log10();
        assert!((ser + 10.0).abs() < 0.1, "ser {ser}");
    }

    #[test]
    fn superposition_is_sample_exact() {
        let spec = fast_spec(13);
        let bundle = synthesize_scenario(&spec, &fast_sources(&spec, 13)).unwrap();
        for m in 0..2 {
            for i in 0..bundle.mic_signals[m].len() {
                let sum = bundle.stems.target[m][i]
                    + bundle.stems.interferer[m][i]
                    + bundle.stems.echo[m][i];
                assert_eq!(bundle.mic_signals[m][i], sum);
            }
        }
    }

    #[test]
    fn muted_interferer_and_echo_leave_target_image_alone() {
        let spec = fast_spec(14);
        let mut sources = fast_sources(&spec, 14);
        sources.interferer.iter_mut().for_each(|v| *v = 0.0);
        sources.echo_playback.iter_mut().for_each(|v| *v = 0.0);
        let bundle = synthesize_scenario(&spec, &sources).unwrap();
        let (a, b) = bundle.segment_boundaries[1];
        for i in a..b {
            assert_eq!(bundle.mic_signals[0][i], bundle.stems.target[0][i]);
        }
        assert!(energy(&bundle.mic_signals[0]) > 0.0);
    }

    #[test]
    fn fixed_seed_reproduces_bit_identical_output() {
        let (spec_a, a) = simulate::<f64>(0.3, 0.0, 99, 1.0).unwrap();
        let (spec_b, b) = simulate::<f64>(0.3, 0.0, 99, 1.0).unwrap();
        assert_eq!(spec_a, spec_b);
        assert_eq!(a.mic_signals, b.mic_signals);
        assert_eq!(a.farend_reference, b.farend_reference);
        assert_eq!(a.groundtruth_target_early, b.groundtruth_target_early);
    }

    #[test]
    fn scenario_dir_round_trips() {
        let (spec, bundle) = simulate::<f32>(0.3, -10.0, 7, 1.0).unwrap();
        let dir = std::env::temp_dir().join("trisep_scenario_rt");
        std::fs::remove_dir_all(&dir).ok();
        write_scenario_dir(&dir, &spec, &bundle).unwrap();
        let (spec2, bundle2) = read_scenario_dir::<f32>(&dir).unwrap();
        assert_eq!(spec.seed, spec2.seed);
        assert_eq!(spec.room.rt60, spec2.room.rt60);
        assert_eq!(spec.mic_positions, spec2.mic_positions);
        assert_eq!(bundle.segment_boundaries, bundle2.segment_boundaries);
        // f32 bundle written as float32 WAV reads back bit-exact.
        assert_eq!(bundle.mic_signals, bundle2.mic_signals);
        assert_eq!(bundle.farend_reference, bundle2.farend_reference);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn convolve_matches_direct_small_case() {
        let a = [1.0f64, 2.0, 3.0];
        let b = [0.5f64, -1.0];
        let y = convolve(&a, &b);
        let want = [0.5, 0.0, -0.5, -3.0];
        assert_eq!(y.len(), 4);
        for (got, want) in y.iter().zip(want.iter()) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn short_sources_error() {
        let spec = fast_spec(15);
        let mut sources = fast_sources(&spec, 15);
        sources.target.truncate(100);
        assert!(matches!(
            synthesize_scenario(&spec, &sources),
            Err(Error::Dimension(_))
        ));
    }
}

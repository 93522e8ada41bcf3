//! The simulate, separate and evaluate commands plus the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use trisep::audio::{read_wav, write_wav};
use trisep::scenario::{
    read_scenario_dir, scenario_sources, synthesize_scenario, write_scenario_dir, ScenarioSpec,
};
use trisep::{analyze, cascade, evaluate, online_run, synthesize, Error, Result, Spectrogram};

use crate::config::{Mode, RunConfig};

/// Writes `manifest.txt`: command, version, config hash, timings, and the
/// full config so the run can be reconstructed from the output directory.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    cfg: &RunConfig,
    timings: &[(String, f64)],
) -> Result<()> {
    let mut out = String::from("# trisep run manifest\n");
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    kv("command", command.into());
    kv("version", env!("CARGO_PKG_VERSION").into());
    kv("config_hash", cfg.hash_hex());
    for (name, seconds) in timings {
        kv(name, seconds.to_string());
    }
    for line in cfg.to_text().lines() {
        out.push_str("config.");
        out.push_str(line);
        out.push('\n');
    }
    std::fs::write(dir.join("manifest.txt"), out)?;
    Ok(())
}

/// Reads one `key = value` entry back out of a manifest.
pub fn manifest_value(dir: &Path, key: &str) -> Option<String> {
    let text = std::fs::read_to_string(dir.join("manifest.txt")).ok()?;
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            if k.trim() == key {
                return Some(v.trim().to_string());
            }
        }
    }
    None
}

pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<()> {
    let start = Instant::now();
    let mut spec =
        ScenarioSpec::sample_with_segments(cfg.rt60, cfg.ser_db, cfg.segment_seconds, cfg.seed);
    if let Some(v) = cfg.room_length {
        spec.room.length = v;
    }
    if let Some(v) = cfg.room_width {
        spec.room.width = v;
    }
    if let Some(v) = cfg.room_height {
        spec.room.height = v;
    }
    let bundle = synthesize_scenario::<f64>(&spec, &scenario_sources(&spec))?;
    std::fs::create_dir_all(out)?;
    write_scenario_dir(out, &spec, &bundle)?;
    write_manifest(
        out,
        "simulate",
        cfg,
        &[("wall_seconds".into(), start.elapsed().as_secs_f64())],
    )?;
    println!(
        "wrote {} ({} channels, {:.1} s at {} Hz)",
        out.display(),
        bundle.mic_signals.len(),
        bundle.mic_signals[0].len() as f64 / bundle.sample_rate as f64,
        bundle.sample_rate
    );
    Ok(())
}

/// Runs the configured algorithm on a mixture (and far-end) WAV and writes
/// one WAV per separated source plus the manifest.
pub fn cmd_separate(
    cfg: &RunConfig,
    mixture: &Path,
    farend: Option<&Path>,
    out: &Path,
) -> Result<()> {
    if cfg.algorithm.needs_farend() && farend.is_none() {
        return Err(Error::Config(format!(
            "algorithm {} needs a far-end reference (--farend)",
            cfg.algorithm
        )));
    }
    let start = Instant::now();
    let (mix, fs) = read_wav::<f64>(mixture)?;
    let stft = cfg.stft(fs)?;
    let x = analyze(&mix, &stft)?;
    let far: Option<Spectrogram<f64>> = match farend {
        Some(path) => {
            let (r, far_fs) = read_wav::<f64>(path)?;
            if far_fs != fs {
                return Err(Error::Audio(format!(
                    "far-end sample rate {far_fs} does not match mixture rate {fs}"
                )));
            }
            Some(analyze(&r, &stft)?)
        }
        None => None,
    };

    let mut timings: Vec<(String, f64)> = Vec::new();
    let sources = match cfg.mode {
        Mode::Batch => {
            let run = cascade(
                &x,
                far.as_ref(),
                cfg.algorithm,
                &cfg.taps()?,
                &cfg.prior()?,
                cfg.iters,
                None,
            )?;
            for (name, seconds) in &run.stage_seconds {
                timings.push((format!("stage_{name}_seconds"), *seconds));
            }
            run.sources
        }
        Mode::Online => online_run(&x, far.as_ref(), &cfg.online()?, cfg.algorithm)?.0,
    };
    let est = synthesize(&sources)?;

    std::fs::create_dir_all(out)?;
    for (i, ch) in est.iter().enumerate() {
        write_wav(&out.join(format!("source{}.wav", i + 1)), &[ch.clone()], fs)?;
    }
    timings.push(("wall_seconds".into(), start.elapsed().as_secs_f64()));
    write_manifest(out, "separate", cfg, &timings)?;
    println!(
        "wrote {} separated sources to {}",
        est.len(),
        out.display()
    );
    Ok(())
}

/// Collects `source*.wav` from a separation output directory, first channel
/// of each, sorted by file name.
fn read_estimate(dir: &Path) -> Result<Vec<Vec<f64>>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| e == "wav")
                && p.file_stem()
                    .and_then(|s| s.to_str())
                    .is_some_and(|s| s.starts_with("source"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Config(format!(
            "no source*.wav files in {}",
            dir.display()
        )));
    }
    let mut channels = Vec::with_capacity(paths.len());
    for path in paths {
        let (chs, _) = read_wav::<f64>(&path)?;
        channels.extend(chs.into_iter().take(1));
    }
    Ok(channels)
}

pub fn cmd_evaluate(separated: &Path, scenario: &Path, out: Option<&Path>) -> Result<()> {
    let (spec, bundle) = read_scenario_dir::<f64>(scenario)?;
    let est = read_estimate(separated)?;
    let report = evaluate(&est, &bundle)?.with_condition(spec.room.rt60, spec.ser_db);
    let algorithm =
        manifest_value(separated, "config.algorithm").unwrap_or_else(|| "unknown".into());

    let text = format!("algorithm = {algorithm}\n{}", report.to_text());
    let csv = format!(
        "algorithm,rt60,ser_db,sdr_db,sier_db,siir_db,sdr_improve_db,sier_improve_db,siir_improve_db\n{algorithm},{},{},{},{},{},{},{},{}\n",
        report.rt60,
        report.ser_db,
        report.sdr_db,
        report.sier_db,
        report.siir_db,
        report.sdr_improve_db,
        report.sier_improve_db,
        report.siir_improve_db,
    );
    let out = out.unwrap_or(separated);
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("report.txt"), &text)?;
    std::fs::write(out.join("metrics.csv"), &csv)?;
    print!("{text}");
    Ok(())
}

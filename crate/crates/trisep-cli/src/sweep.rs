//! The bench and reproduce commands: timing comparisons across algorithms
//! and the full seeds x conditions x algorithms improvement grid.

use std::path::Path;
use std::time::Instant;

use trisep::metrics::aggregate_improvements;
use trisep::sepcore::FilterTaps;
use trisep::{
    analyze, cascade, evaluate, online_run, simulate, synthesize, Algorithm, MetricsReport,
    Result, Spectrogram,
};

use crate::config::{fnv1a64, Mode, RunConfig};
use crate::run::write_manifest;

fn run_once(
    cfg: &RunConfig,
    algorithm: Algorithm,
    taps: &FilterTaps,
    x: &Spectrogram<f64>,
    r: &Spectrogram<f64>,
) -> Result<Spectrogram<f64>> {
    let far = algorithm.needs_farend().then_some(r);
    match cfg.mode {
        Mode::Batch => Ok(cascade(x, far, algorithm, taps, &cfg.prior()?, cfg.iters, None)?.sources),
        Mode::Online => {
            let online = trisep::OnlineConfig::new(cfg.alpha, taps.clone(), cfg.prior()?)?
                .with_refresh_stride(cfg.refresh_stride)?;
            Ok(online_run(x, far, &online, algorithm)?.0)
        }
    }
}

/// One warmup run, then the median of `repeats` timed runs.
fn median_seconds(
    cfg: &RunConfig,
    algorithm: Algorithm,
    taps: &FilterTaps,
    x: &Spectrogram<f64>,
    r: &Spectrogram<f64>,
    repeats: usize,
) -> Result<f64> {
    run_once(cfg, algorithm, taps, x, r)?;
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        run_once(cfg, algorithm, taps, x, r)?;
        times.push(t.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    Ok(times[times.len() / 2])
}

/// Times every algorithm on one fixture and reports ratios against Joint-SS;
/// optionally sweeps the dereverberation tap count to expose the cubic cost
/// growth of the stacked solve.
pub fn cmd_bench(cfg: &RunConfig, out: &Path, repeats: usize, sweep_taps: &[usize]) -> Result<()> {
    let (_, scene) = simulate::<f64>(cfg.rt60, cfg.ser_db, cfg.seed, cfg.segment_seconds)?;
    let stft = cfg.stft(scene.sample_rate)?;
    let x = analyze(&scene.mic_signals, &stft)?;
    let r = analyze(&[scene.farend_reference.clone()], &stft)?;
    let taps = cfg.taps()?;
    let mics = scene.mic_signals.len();

    let mut medians = Vec::new();
    for algorithm in Algorithm::compared() {
        let med = median_seconds(cfg, algorithm, &taps, &x, &r, repeats)?;
        eprintln!("{algorithm}: {med:.3} s");
        medians.push((algorithm, med));
    }
    let joint = medians
        .iter()
        .find(|(a, _)| *a == Algorithm::JointSs)
        .map(|(_, m)| *m)
        .unwrap();

    let mut text = format!(
        "mode = {}, {:.1} s fixture, median of {repeats} after 1 warmup\n",
        cfg.mode.token(),
        scene.mic_signals[0].len() as f64 / scene.sample_rate as f64,
    );
    let mut csv = String::from("algorithm,median_seconds,ratio_vs_joint-ss\n");
    for (algorithm, med) in &medians {
        let ratio = med / joint;
        text.push_str(&format!("{algorithm:<12} {med:>9.3} s  x{ratio:.3}\n"));
        csv.push_str(&format!("{algorithm},{med},{ratio}\n"));
    }

    if !sweep_taps.is_empty() {
        // Stacked dimension of the joint solve; its refresh cost is cubic.
        text.push_str("\njoint-ss dereverberation tap sweep\n");
        csv.push_str("\ntaps_dr,stacked_dim,median_seconds\n");
        let mut points = Vec::new();
        for &l2 in sweep_taps {
            let taps = FilterTaps::new(cfg.taps_aec, l2, cfg.delta)?;
            let dim = mics + cfg.taps_aec + l2 * mics;
            let med = median_seconds(cfg, Algorithm::JointSs, &taps, &x, &r, repeats)?;
            eprintln!("joint-ss taps_dr={l2} (dim {dim}): {med:.3} s");
            text.push_str(&format!("taps_dr={l2:<3} dim={dim:<3} {med:>9.3} s\n"));
            csv.push_str(&format!("{l2},{dim},{med}\n"));
            points.push(((dim as f64).ln(), med.ln()));
        }
        if points.len() >= 2 {
            let slope = fit_slope(&points);
            text.push_str(&format!("log-log slope vs stacked dim: {slope:.2}\n"));
            csv.push_str(&format!("slope,,{slope}\n"));
        }
    }

    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("bench.txt"), &text)?;
    std::fs::write(out.join("bench.csv"), &csv)?;
    write_manifest(out, "bench", cfg, &[])?;
    print!("{text}");
    Ok(())
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    cov / var
}

/// Deterministic per-cell seed, stable across machines.
fn cell_seed(master: u64, rt60: f64, ser: f64, index: usize) -> u64 {
    fnv1a64(format!("{master}|{rt60}|{ser}|{index}").as_bytes())
}

/// Runs seeds x conditions x the four algorithms and writes the three
/// mean-improvement tables plus a long-format CSV of every run.
pub fn cmd_reproduce(
    cfg: &RunConfig,
    out: &Path,
    seeds: usize,
    rt60_grid: &[f64],
    ser_grid: &[f64],
) -> Result<()> {
    let start = Instant::now();
    let mut runs: Vec<(String, MetricsReport)> = Vec::new();
    let mut runs_csv =
        String::from("algorithm,rt60,ser_db,seed,sdr_improve_db,sier_improve_db,siir_improve_db\n");
    let taps = cfg.taps()?;
    let total = rt60_grid.len() * ser_grid.len() * seeds;
    let mut done = 0usize;

    for &rt60 in rt60_grid {
        for &ser in ser_grid {
            for index in 0..seeds {
                let seed = cell_seed(cfg.seed, rt60, ser, index);
                let (_, scene) = simulate::<f64>(rt60, ser, seed, cfg.segment_seconds)?;
                let stft = cfg.stft(scene.sample_rate)?;
                let x = analyze(&scene.mic_signals, &stft)?;
                let r = analyze(&[scene.farend_reference.clone()], &stft)?;
                for algorithm in Algorithm::compared() {
                    let sources = run_once(cfg, algorithm, &taps, &x, &r)?;
                    let est = synthesize(&sources)?;
                    let report = evaluate(&est, &scene)?.with_condition(rt60, ser);
                    runs_csv.push_str(&format!(
                        "{algorithm},{rt60},{ser},{seed},{},{},{}\n",
                        report.sdr_improve_db, report.sier_improve_db, report.siir_improve_db
                    ));
                    runs.push((algorithm.token().to_string(), report));
                }
                done += 1;
                eprintln!("cell {done}/{total} (rt60={rt60}, ser={ser}, seed {index})");
            }
        }
    }

    let tables = aggregate_improvements(&runs);
    let mut text = String::new();
    for table in &tables {
        text.push_str(&table.to_text());
        text.push('\n');
    }
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("tables.txt"), &text)?;
    for table in &tables {
        std::fs::write(out.join(format!("{}.csv", table.metric)), table.to_csv())?;
    }
    std::fs::write(out.join("runs.csv"), &runs_csv)?;
    write_manifest(
        out,
        "reproduce",
        cfg,
        &[("wall_seconds".into(), start.elapsed().as_secs_f64())],
    )?;
    print!("{text}");
    Ok(())
}

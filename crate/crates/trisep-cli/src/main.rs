//! Command line front end: scenario synthesis, separation, evaluation,
//! benchmarking and full reproduction sweeps.
//!
//! Exit codes: 0 success, 2 usage or invalid parameters, 3 file I/O,
//! 4 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trisep::{Algorithm, Error};

mod config;
mod run;
mod sweep;

use config::{Mode, RunConfig};

#[derive(Parser)]
#[command(
    name = "trisep",
    version,
    about = "Joint echo cancellation, dereverberation and source separation",
    after_help = "Config files are flat `key = value` text; every key has a \
                  matching flag and flags win. See `--help` of each command."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Field overrides shared by every command: a config file first, then flags.
#[derive(Args, Default)]
struct Overrides {
    /// Key-value config file applied before any flag
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// joint-ss | draec-bss | dr-aec-bss | aec-dr-bss | bss
    #[arg(long)]
    algorithm: Option<String>,
    /// batch | online
    #[arg(long)]
    mode: Option<String>,
    /// STFT frame size in samples
    #[arg(long)]
    frame_size: Option<usize>,
    /// STFT hop in samples
    #[arg(long)]
    hop: Option<usize>,
    /// Echo filter taps per far-end channel
    #[arg(long)]
    taps_aec: Option<usize>,
    /// Dereverberation taps per microphone
    #[arg(long)]
    taps_dr: Option<usize>,
    /// Dereverberation prediction delay in frames
    #[arg(long)]
    delta: Option<usize>,
    /// Source prior shape in (0, 2]
    #[arg(long)]
    gamma: Option<f64>,
    /// Forgetting factor for online statistics, in (0, 1)
    #[arg(long)]
    alpha: Option<f64>,
    /// Batch iteration budget
    #[arg(long)]
    iters: Option<usize>,
    /// Online coefficient refresh stride in frames
    #[arg(long)]
    refresh_stride: Option<usize>,
    /// Reverberation time for simulation, seconds
    #[arg(long)]
    rt60: Option<f64>,
    /// Signal-to-echo ratio for simulation, dB
    #[arg(long)]
    ser: Option<f64>,
    /// Master random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Length of each of the four scenario segments, seconds
    #[arg(long)]
    segment_seconds: Option<f64>,
}

impl Overrides {
    /// defaults <- config file <- flags, in that order.
    fn resolve(&self, mut cfg: RunConfig) -> Result<RunConfig, Error> {
        if let Some(path) = &self.config {
            cfg.load_file(path)?;
        }
        if let Some(v) = &self.algorithm {
            cfg.algorithm = Algorithm::parse(v)?;
        }
        if let Some(v) = &self.mode {
            cfg.mode = Mode::parse(v)?;
        }
        if let Some(v) = self.frame_size {
            cfg.frame_size = v;
        }
        if let Some(v) = self.hop {
            cfg.hop = v;
        }
        if let Some(v) = self.taps_aec {
            cfg.taps_aec = v;
        }
        if let Some(v) = self.taps_dr {
            cfg.taps_dr = v;
        }
        if let Some(v) = self.delta {
            cfg.delta = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.iters {
            cfg.iters = v;
        }
        if let Some(v) = self.refresh_stride {
            cfg.refresh_stride = v;
        }
        if let Some(v) = self.rt60 {
            cfg.rt60 = v;
        }
        if let Some(v) = self.ser {
            cfg.ser_db = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.segment_seconds {
            cfg.segment_seconds = v;
        }
        // Surface parameter problems before any heavy work.
        cfg.taps()?;
        cfg.prior()?;
        cfg.online()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a scenario directory (mixture, far-end, stems, metadata)
    Simulate {
        #[command(flatten)]
        overrides: Overrides,
        /// Output scenario directory
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Separate a mixture WAV into per-source WAVs
    Separate {
        #[command(flatten)]
        overrides: Overrides,
        /// Input mixture WAV (one channel per microphone)
        #[arg(long, value_name = "FILE")]
        mixture: Option<PathBuf>,
        /// Far-end reference WAV (required unless --algorithm bss)
        #[arg(long, value_name = "FILE")]
        farend: Option<PathBuf>,
        /// Output directory for source WAVs and the manifest
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Score a separation output against its scenario
    Evaluate {
        /// Directory holding source*.wav from `separate`
        #[arg(long, value_name = "DIR")]
        separated: PathBuf,
        /// Scenario directory from `simulate`
        #[arg(long, value_name = "DIR")]
        scenario: PathBuf,
        /// Report directory (defaults to the separated directory)
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Time every algorithm on one fixture; report ratios vs joint-ss
    Bench {
        #[command(flatten)]
        overrides: Overrides,
        /// Output directory for bench.txt / bench.csv
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Timed runs per algorithm (after one warmup)
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Also sweep joint-ss over these dereverberation tap counts
        #[arg(long, value_delimiter = ',', value_name = "N,N,...")]
        sweep_taps: Vec<usize>,
    },
    /// Run seeds x {rt60} x {ser} x all four algorithms; emit mean tables
    Reproduce {
        #[command(flatten)]
        overrides: Overrides,
        /// Output directory for tables and CSVs
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Independent seeds per condition
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Reverberation times to cover
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.6,0.8")]
        rt60_grid: Vec<f64>,
        /// Signal-to-echo ratios to cover
        #[arg(long, value_delimiter = ',', default_value = "0,-10")]
        ser_grid: Vec<f64>,
    },
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate { overrides, out } => {
            let cfg = overrides.resolve(RunConfig::default())?;
            run::cmd_simulate(&cfg, &out)
        }
        Command::Separate {
            overrides,
            mixture,
            farend,
            out,
        } => {
            let cfg = overrides.resolve(RunConfig::default())?;
            let mixture = mixture.or_else(|| cfg.mixture.clone()).ok_or_else(|| {
                Error::Config("separate needs a mixture WAV (--mixture)".into())
            })?;
            let farend = farend.or_else(|| cfg.farend.clone());
            let out = out
                .or_else(|| cfg.out_dir.clone())
                .ok_or_else(|| Error::Config("separate needs an output directory (--out)".into()))?;
            run::cmd_separate(&cfg, &mixture, farend.as_deref(), &out)
        }
        Command::Evaluate {
            separated,
            scenario,
            out,
        } => run::cmd_evaluate(&separated, &scenario, out.as_deref()),
        Command::Bench {
            overrides,
            out,
            repeats,
            sweep_taps,
        } => {
            // The complexity comparison lives in the per-frame solves, so
            // bench defaults to streaming mode and a short fixture.
            let mut base = RunConfig::default();
            base.mode = Mode::Online;
            base.segment_seconds = 1.0;
            let cfg = overrides.resolve(base)?;
            sweep::cmd_bench(&cfg, &out, repeats, &sweep_taps)
        }
        Command::Reproduce {
            overrides,
            out,
            seeds,
            rt60_grid,
            ser_grid,
        } => {
            let cfg = overrides.resolve(RunConfig::default())?;
            if seeds == 0 || rt60_grid.is_empty() || ser_grid.is_empty() {
                return Err(Error::Config(
                    "reproduce needs at least one seed, one rt60 and one ser value".into(),
                ));
            }
            sweep::cmd_reproduce(&cfg, &out, seeds, &rt60_grid, &ser_grid)
        }
    }
}

fn exit_class(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Dimension(_) | Error::Geometry(_) => 2,
        Error::Io(_) | Error::Audio(_) => 3,
        Error::ZeroRegressor | Error::Singular { .. } | Error::Silent(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_class(&e))
        }
    }
}

//! Run configuration: defaults, the flat key-value file format, and the
//! canonical rendering that run manifests embed and hash.

use std::path::{Path, PathBuf};

use trisep::sepcore::FilterTaps;
use trisep::{Algorithm, Error, GgdPrior, OnlineConfig, Result, StftConfig, Window};

/// Processing mode: whole-signal batch or frame-by-frame streaming.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Batch,
    Online,
}

impl Mode {
    pub fn parse(token: &str) -> Result<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "batch" => Ok(Mode::Batch),
            "online" => Ok(Mode::Online),
            other => Err(Error::Config(format!(
                "unknown mode '{other}', expected batch or online"
            ))),
        }
    }

    pub fn token(&self) -> &'static str {
        match self {
            Mode::Batch => "batch",
            Mode::Online => "online",
        }
    }
}

/// Everything one run needs. Every field has a default; a config file and
/// then command-line flags override individual fields, in that order.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub mode: Mode,
    pub frame_size: usize,
    pub hop: usize,
    pub taps_aec: usize,
    pub taps_dr: usize,
    pub delta: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub refresh_stride: usize,
    pub iters: usize,
    pub rt60: f64,
    pub ser_db: f64,
    pub seed: u64,
    pub segment_seconds: f64,
    /// Optional room dimension overrides for `simulate`.
    pub room_length: Option<f64>,
    pub room_width: Option<f64>,
    pub room_height: Option<f64>,
    pub mixture: Option<PathBuf>,
    pub farend: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algorithm: Algorithm::DraecBss,
            mode: Mode::Batch,
            frame_size: 1024,
            hop: 512,
            taps_aec: 5,
            taps_dr: 5,
            delta: 2,
            gamma: 0.2,
            lambda: 1.0,
            alpha: 0.999,
            refresh_stride: 1,
            iters: 20,
            rt60: 0.3,
            ser_db: 0.0,
            seed: 1,
            segment_seconds: 5.0,
            room_length: None,
            room_width: None,
            room_height: None,
            mixture: None,
            farend: None,
            out_dir: None,
        }
    }
}

const KEYS: &[&str] = &[
    "algorithm",
    "mode",
    "frame_size",
    "hop",
    "taps_aec",
    "taps_dr",
    "delta",
    "gamma",
    "lambda",
    "alpha",
    "refresh_stride",
    "iters",
    "rt60",
    "ser_db",
    "seed",
    "segment_seconds",
    "room_length",
    "room_width",
    "room_height",
    "mixture",
    "farend",
    "out_dir",
];

impl RunConfig {
    /// Applies one `key = value` pair.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.trim().parse().map_err(|_| {
                Error::Config(format!("config key '{key}' has unparsable value '{value}'"))
            })
        }
        let value = value.trim();
        match key {
            "algorithm" => self.algorithm = Algorithm::parse(value)?,
            "mode" => self.mode = Mode::parse(value)?,
            "frame_size" => self.frame_size = num(key, value)?,
            "hop" => self.hop = num(key, value)?,
            "taps_aec" => self.taps_aec = num(key, value)?,
            "taps_dr" => self.taps_dr = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "lambda" => self.lambda = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "refresh_stride" => self.refresh_stride = num(key, value)?,
            "iters" => self.iters = num(key, value)?,
            "rt60" => self.rt60 = num(key, value)?,
            "ser_db" => self.ser_db = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "segment_seconds" => self.segment_seconds = num(key, value)?,
            "room_length" => self.room_length = Some(num(key, value)?),
            "room_width" => self.room_width = Some(num(key, value)?),
            "room_height" => self.room_height = Some(num(key, value)?),
            "mixture" => self.mixture = Some(PathBuf::from(value)),
            "farend" => self.farend = Some(PathBuf::from(value)),
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            other => {
                return Err(Error::Config(format!(
                    "unknown config key '{other}'; known keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Merges a flat key-value file over the current values. Blank lines and
    /// `#` comments are skipped.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "{}:{}: expected 'key = value', got '{line}'",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.apply(key.trim(), value)?;
        }
        Ok(())
    }

    /// Canonical rendering: every field, fixed order, `key = value` lines.
    /// Optional fields render only when set, so the hash covers exactly what
    /// shaped the run.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("algorithm", self.algorithm.token().into());
        kv("mode", self.mode.token().into());
        kv("frame_size", self.frame_size.to_string());
        kv("hop", self.hop.to_string());
        kv("taps_aec", self.taps_aec.to_string());
        kv("taps_dr", self.taps_dr.to_string());
        kv("delta", self.delta.to_string());
        kv("gamma", self.gamma.to_string());
        kv("lambda", self.lambda.to_string());
        kv("alpha", self.alpha.to_string());
        kv("refresh_stride", self.refresh_stride.to_string());
        kv("iters", self.iters.to_string());
        kv("rt60", self.rt60.to_string());
        kv("ser_db", self.ser_db.to_string());
        kv("seed", self.seed.to_string());
        kv("segment_seconds", self.segment_seconds.to_string());
        for (k, v) in [
            ("room_length", self.room_length),
            ("room_width", self.room_width),
            ("room_height", self.room_height),
        ] {
            if let Some(v) = v {
                kv(k, v.to_string());
            }
        }
        for (k, v) in [
            ("mixture", &self.mixture),
            ("farend", &self.farend),
            ("out_dir", &self.out_dir),
        ] {
            if let Some(v) = v {
                kv(k, v.display().to_string());
            }
        }
        out
    }

    /// FNV-1a hash of the canonical rendering, as 16 hex digits.
    pub fn hash_hex(&self) -> String {
        format!("{:016x}", fnv1a64(self.to_text().as_bytes()))
    }

    pub fn taps(&self) -> Result<FilterTaps> {
        FilterTaps::new(self.taps_aec, self.taps_dr, self.delta)
    }

    pub fn prior(&self) -> Result<GgdPrior> {
        GgdPrior::new(self.gamma, self.lambda)
    }

    pub fn stft(&self, sample_rate: u32) -> Result<StftConfig> {
        StftConfig::new(self.frame_size, self.hop, Window::SqrtHann, sample_rate)
    }

    pub fn online(&self) -> Result<OnlineConfig> {
        OnlineConfig::new(self.alpha, self.taps()?, self.prior()?)?
            .with_refresh_stride(self.refresh_stride)
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

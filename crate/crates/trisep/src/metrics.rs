//! Separation quality metrics.
//!
//! Quality is scored three ways on time-domain signals: scale-invariant SDR
//! against the early-reflection target reference, and two segment-energy
//! ratios that isolate echo and interferer suppression. The four-segment
//! timeline is: I interferer only, II + target, III + echo, IV target gone.
//! SIER compares III to IV (how much of what remains after the target stops
//! is leakage), SIIR compares II to I.
//!
//! All ratios are reported in dB and clamped to ±[`DB_CAP`] so that perfect
//! or silent signals stay finite and improvement arithmetic never produces
//! NaN.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::ScenarioBundle;

/// Magnitude bound for every reported dB value.
pub const DB_CAP: f64 = 100.0;

/// Scores for one separated signal plus deltas over the unprocessed mixture.
///
/// The improvement fields always satisfy `improve = processed - unprocessed`
/// with both sides evaluated on the same scenario against the same reference.
/// `rt60` and `ser_db` are condition labels for aggregation; [`evaluate`]
/// leaves them NaN and the caller stamps them via [`MetricsReport::with_condition`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub sdr_db: f64,
    pub sier_db: f64,
    pub siir_db: f64,
    pub sdr_improve_db: f64,
    pub sier_improve_db: f64,
    pub siir_improve_db: f64,
    pub rt60: f64,
    pub ser_db: f64,
}

impl MetricsReport {
    pub fn with_condition(mut self, rt60: f64, ser_db: f64) -> Self {
        self.rt60 = rt60;
        self.ser_db = ser_db;
        self
    }

    /// Flat key-value rendering, one field per line, diff-friendly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in [
            ("sdr_db", self.sdr_db),
            ("sier_db", self.sier_db),
            ("siir_db", self.siir_db),
            ("sdr_improve_db", self.sdr_improve_db),
            ("sier_improve_db", self.sier_improve_db),
            ("siir_improve_db", self.siir_improve_db),
            ("rt60", self.rt60),
            ("ser_db", self.ser_db),
        ] {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }
}

/// Scale-invariant SDR in dB: `10 log10(|a r|^2 / |a r - e|^2)` with the
/// least-squares scalar `a = <e, r> / |r|^2`. Scaling either argument by a
/// positive constant leaves the value unchanged. A perfect estimate returns
/// the +[`DB_CAP`] cap; an estimate orthogonal to the reference returns the
/// -[`DB_CAP`] floor.
pub fn si_sdr<T: Scalar>(estimate: &[T], reference: &[T]) -> Result<f64> {
    if estimate.len() != reference.len() {
        return Err(Error::Dimension(format!(
            "estimate has {} samples but reference has {}",
            estimate.len(),
            reference.len()
        )));
    }
    let ref_energy = energy(reference);
    if ref_energy == 0.0 {
        return Err(Error::Silent("si-sdr reference carries no energy".into()));
    }
    let alpha = dot(estimate, reference) / ref_energy;
    let mut signal = 0.0;
    let mut distortion = 0.0;
    for (&e, &r) in estimate.iter().zip(reference) {
        let s = alpha * r.to_f64();
        let d = s - e.to_f64();
        signal += s * s;
        distortion += d * d;
    }
    Ok(capped_db(signal, distortion))
}

/// Energy ratio between two half-open sample intervals of one signal, in dB.
/// An empty or silent denominator segment is an error; a silent numerator
/// clamps to the -[`DB_CAP`] floor.
pub fn segment_ratio<T: Scalar>(
    signal: &[T],
    seg_num: (usize, usize),
    seg_den: (usize, usize),
) -> Result<f64> {
    let num = slice_interval(signal, seg_num)?;
    let den = slice_interval(signal, seg_den)?;
    if den.is_empty() {
        return Err(Error::Silent(format!(
            "denominator segment {}..{} is empty",
            seg_den.0, seg_den.1
        )));
    }
    let e_den = energy(den);
    if e_den == 0.0 {
        return Err(Error::Silent(format!(
            "denominator segment {}..{} carries no energy",
            seg_den.0, seg_den.1
        )));
    }
    Ok(capped_db(energy(num), e_den))
}

/// Scores a separated output against a scenario and the unprocessed mixture.
///
/// SDR is measured on segment III (all three sources active) against the
/// early-reflection target reference. When `estimate` has several channels
/// the one with the best segment-III SDR is scored; that resolves the
/// source-ordering ambiguity of blind separation. SIER and SIIR come from
/// the segment energies of the chosen channel, and every improvement is the
/// same score minus its value on mixture channel 1, so evaluating the
/// mixture itself reports exactly zero improvement.
pub fn evaluate<T: Scalar>(
    estimate: &[Vec<T>],
    scenario: &ScenarioBundle<T>,
) -> Result<MetricsReport> {
    if estimate.is_empty() {
        return Err(Error::Dimension("estimate has no channels".into()));
    }
    let n = scenario.groundtruth_target_early.len();
    for (c, ch) in estimate.iter().enumerate() {
        if ch.len() != n {
            return Err(Error::Dimension(format!(
                "estimate channel {c} has {} samples but the scenario has {n}",
                ch.len()
            )));
        }
    }
    let mixture = &scenario.mic_signals[0];
    if mixture.len() != n {
        return Err(Error::Dimension(format!(
            "mixture has {} samples but the reference has {n}",
            mixture.len()
        )));
    }

    let mut best: Option<(f64, f64, f64)> = None;
    for ch in estimate {
        let scores = channel_scores(ch, scenario)?;
        if best.is_none_or(|b| scores.0 > b.0) {
            best = Some(scores);
        }
    }
    let (sdr, sier, siir) = best.unwrap();
    let (sdr0, sier0, siir0) = channel_scores(mixture, scenario)?;

    Ok(MetricsReport {
        sdr_db: sdr,
        sier_db: sier,
        siir_db: siir,
        sdr_improve_db: sdr - sdr0,
        sier_improve_db: sier - sier0,
        siir_improve_db: siir - siir0,
        rt60: f64::NAN,
        ser_db: f64::NAN,
    })
}

/// (SDR, SIER, SIIR) for one channel. Segment ratios are computed directly
/// from energies rather than through [`segment_ratio`]: a well-separated
/// output can be dead silent where only suppressed sources were active, and
/// that must saturate at the cap, not error.
fn channel_scores<T: Scalar>(signal: &[T], scenario: &ScenarioBundle<T>) -> Result<(f64, f64, f64)> {
    let [seg1, seg2, seg3, seg4] = scenario.segment_boundaries;
    let sdr = si_sdr(
        slice_interval(signal, seg3)?,
        slice_interval(&scenario.groundtruth_target_early, seg3)?,
    )?;
    let seg_energy = |seg: (usize, usize)| slice_interval(signal, seg).map(energy);
    let sier = capped_db(seg_energy(seg3)?, seg_energy(seg4)?);
    let siir = capped_db(seg_energy(seg2)?, seg_energy(seg1)?);
    Ok((sdr, sier, siir))
}

fn slice_interval<T>(signal: &[T], (start, end): (usize, usize)) -> Result<&[T]> {
    if start > end || end > signal.len() {
        return Err(Error::Dimension(format!(
            "interval {start}..{end} does not fit a signal of {} samples",
            signal.len()
        )));
    }
    Ok(&signal[start..end])
}

fn energy<T: Scalar>(x: &[T]) -> f64 {
    x.iter()
        .map(|&v| {
            let v = v.to_f64();
            v * v
        })
        .sum()
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x.to_f64() * y.to_f64()).sum()
}

fn capped_db(num: f64, den: f64) -> f64 {
    if num == 0.0 && den == 0.0 {
        0.0
    } else if den == 0.0 {
        DB_CAP
    } else if num == 0.0 {
        -DB_CAP
    } else {
        (10.0 * (num / den).log10()).clamp(-DB_CAP, DB_CAP)
    }
}

/// One metric of a reproduction sweep as a wide table: rows are algorithms,
/// columns are (rt60, ser) conditions, cells are means over seeds.
#[derive(Debug, Clone)]
pub struct AggregateTable {
    pub metric: &'static str,
    /// Distinct (rt60, ser_db) pairs, rt60 ascending then ser descending.
    pub conditions: Vec<(f64, f64)>,
    /// Algorithm name and per-condition mean, NaN where no runs matched.
    pub rows: Vec<(String, Vec<f64>)>,
}

/// Collapses labeled per-run reports into the three mean-improvement tables
/// (SDR, SIER, SIIR). Rows keep the first-seen algorithm order.
pub fn aggregate_improvements(runs: &[(String, MetricsReport)]) -> [AggregateTable; 3] {
    let mut conditions: Vec<(f64, f64)> = runs.iter().map(|(_, r)| (r.rt60, r.ser_db)).collect();
    conditions.sort_by(|a, b| {
        a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1))
    });
    conditions.dedup_by(|a, b| a.0.total_cmp(&b.0).is_eq() && a.1.total_cmp(&b.1).is_eq());

    let mut algorithms: Vec<String> = Vec::new();
    for (name, _) in runs {
        if !algorithms.contains(name) {
            algorithms.push(name.clone());
        }
    }

    let table = |metric: &'static str, pick: fn(&MetricsReport) -> f64| -> AggregateTable {
        let rows = algorithms
            .iter()
            .map(|alg| {
                let means = conditions
                    .iter()
                    .map(|&(rt60, ser)| {
                        let cell: Vec<f64> = runs
                            .iter()
                            .filter(|(name, r)| {
                                name == alg
                                    && r.rt60.total_cmp(&rt60).is_eq()
                                    && r.ser_db.total_cmp(&ser).is_eq()
                            })
                            .map(|(_, r)| pick(r))
                            .collect();
                        if cell.is_empty() {
                            f64::NAN
                        } else {
                            cell.iter().sum::<f64>() / cell.len() as f64
                        }
                    })
                    .collect();
                (alg.clone(), means)
            })
            .collect();
        AggregateTable {
            metric,
            conditions: conditions.clone(),
            rows,
        }
    };

    [
        table("sdr_improve_db", |r| r.sdr_improve_db),
        table("sier_improve_db", |r| r.sier_improve_db),
        table("siir_improve_db", |r| r.siir_improve_db),
    ]
}

impl AggregateTable {
    fn headers(&self) -> Vec<String> {
        self.conditions
            .iter()
            .map(|&(rt60, ser)| format!("rt60={rt60}/ser={ser}"))
            .collect()
    }

    /// Fixed-width plain text with the metric name as a title line.
    pub fn to_text(&self) -> String {
        let headers = self.headers();
        let name_w = self
            .rows
            .iter()
            .map(|(n, _)| n.len())
            .chain(["algorithm".len()])
            .max()
            .unwrap();
        let col_w = headers.iter().map(|h| h.len()).max().unwrap_or(8).max(8);
        let mut out = format!("{}\n{:<name_w$}", self.metric, "algorithm");
        for h in &headers {
            out.push_str(&format!("  {h:>col_w$}"));
        }
        out.push('\n');
        for (name, means) in &self.rows {
            out.push_str(&format!("{name:<name_w$}"));
            for m in means {
                out.push_str(&format!("  {:>col_w$}", format!("{m:.2}")));
            }
            out.push('\n');
        }
        out
    }

    /// CSV with one row per algorithm and one column per condition.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("algorithm");
        for h in self.headers() {
            out.push(',');
            out.push_str(&h);
        }
        out.push('\n');
        for (name, means) in &self.rows {
            out.push_str(name);
            for m in means {
                out.push_str(&format!(",{m}"));
            }
            out.push('\n');
        }
        out
    }
}

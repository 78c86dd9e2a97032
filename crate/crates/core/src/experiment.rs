//! Experiment orchestration: time series of `D_n`, separation of the null
//! and alternative distributions of `Z_n`, and power tables.
//!
//! Replicates fan out over a rayon pool, but every random stream is derived
//! from `(master_seed, n, stream)` and results are collected in index order,
//! so outputs are byte-identical for any worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{
    calibrate_any_size, conditioned_seeds, distance_step, h_linear, statistics_for_seeds,
    Hypothesis,
};
use crate::error::{Error, Result};
use crate::models::{derive_seed, grow_pair, Schedule};
use crate::plot;
use crate::resistance::DistanceParams;
use crate::summary::{BoxSummary, Standardization};

/// Attempts allowed per requested sample when conditioning evaluation
/// samples on a hypothesis.
const CONDITIONING_BUDGET: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Timeseries,
    Separation,
    Power,
    OracleCheck,
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "timeseries" => Ok(ExperimentKind::Timeseries),
            "separation" => Ok(ExperimentKind::Separation),
            "power" => Ok(ExperimentKind::Power),
            "oracle_check" | "oracle-check" => Ok(ExperimentKind::OracleCheck),
            other => Err(Error::Config(format!("unknown experiment kind {other:?}"))),
        }
    }
}

/// Either an explicit list of sizes or an inclusive range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NValues {
    List(Vec<usize>),
    Range {
        start: usize,
        end: usize,
        #[serde(default = "one")]
        step: usize,
    },
}

fn one() -> usize {
    1
}

impl NValues {
    pub fn resolve(&self) -> Vec<usize> {
        match self {
            NValues::List(v) => v.clone(),
            NValues::Range { start, end, step } => {
                (*start..=*end).step_by((*step).max(1)).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_n_values")]
    pub n_values: NValues,
    #[serde(default = "Schedule::separated")]
    pub schedule: Schedule,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Worker threads; `None` uses the global pool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Symmetric-log y axis for the separation box plots.
    #[serde(default)]
    pub log_y: bool,
}

fn default_n_values() -> NValues {
    NValues::List(vec![64, 128, 256])
}
fn default_replicates() -> usize {
    200
}
fn default_level() -> f64 {
    0.05
}
fn default_beta() -> f64 {
    1.0
}
fn default_seed() -> u64 {
    1
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            n_values: default_n_values(),
            schedule: Schedule::separated(),
            replicates: default_replicates(),
            level: default_level(),
            beta: default_beta(),
            master_seed: default_seed(),
            out_dir: default_out_dir(),
            workers: None,
            log_y: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.n_values.resolve()
    }

    pub fn params(&self) -> Result<DistanceParams> {
        DistanceParams::new(self.beta)
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = self.sizes();
        if sizes.is_empty() {
            return Err(Error::Config("n_values must not be empty".into()));
        }
        if let Some(&n) = sizes.iter().find(|&&n| n < 4) {
            return Err(Error::Config(format!("n_values must all be >= 4, got {n}")));
        }
        if self.replicates < 1 {
            return Err(Error::Config("replicates must be >= 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        self.params()
            .map_err(|e| Error::Config(e.to_string()))
            .map(|_| ())
    }

    /// The configuration with `n_values` expanded, as echoed into outputs.
    pub fn resolved(&self) -> ExperimentConfig {
        ExperimentConfig {
            n_values: NValues::List(self.sizes()),
            ..self.clone()
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeSeriesRow {
    pub n: usize,
    pub d_n: f64,
    pub h: f64,
    pub k_n: usize,
    pub k_np1: usize,
    pub cross_edge_event: bool,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct TimeSeriesRecord {
    pub rows: Vec<TimeSeriesRow>,
}

impl TimeSeriesRecord {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("n,d_n,k_n,k_np1,event\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.n, r.d_n, r.k_n, r.k_np1, r.cross_edge_event
            );
        }
        out
    }
}

/// One independent growth pair per `n`, seeded by `derive_seed(master, n)`.
pub fn run_timeseries(cfg: &ExperimentConfig) -> Result<TimeSeriesRecord> {
    cfg.validate()?;
    let params = cfg.params()?;
    let samples = cfg
        .sizes()
        .into_iter()
        .map(|n| cfg.schedule.evaluate(n))
        .collect::<Result<Vec<_>>>()?;
    let master = cfg.master_seed;
    let rows = with_workers(cfg.workers, || {
        samples
            .par_iter()
            .map(|s| {
                let pair = grow_pair(s.n, s.p, s.q, derive_seed(master, s.n as u64))?;
                Ok(TimeSeriesRow {
                    n: s.n,
                    d_n: distance_step(&pair, params),
                    h: h_linear(s.n, pair.k_before),
                    k_n: pair.k_before,
                    k_np1: pair.k_after,
                    cross_edge_event: pair.has_new_cross_edges(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(TimeSeriesRecord { rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisSample {
    pub hypothesis: Hypothesis,
    pub z_raw: Vec<f64>,
    /// Present unless the normalization was degenerate.
    pub z_normalized: Option<Vec<f64>>,
    /// Box summary of the normalized values, or of the raw values when
    /// normalization failed.
    pub summary: Option<BoxSummary>,
    pub attempts: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationRecord {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub level: f64,
    /// `z_ε` calibrated on an independent null sample.
    pub threshold: f64,
    pub null: HypothesisSample,
    pub alt: HypothesisSample,
    /// Fraction of alternative samples with `Z ≥ z_ε`.
    pub power: f64,
    /// Fraction of (evaluation) null samples with `Z ≥ z_ε`.
    pub level_empirical: f64,
    pub normalization: Option<Standardization>,
    pub normalization_error: Option<String>,
}

fn rejection_rate(z: &[f64], threshold: f64) -> f64 {
    z.iter().filter(|&&x| x >= threshold).count() as f64 / z.len() as f64
}

fn conditioned_statistics(
    n: usize,
    p: f64,
    q: f64,
    hypothesis: Hypothesis,
    stream: u64,
    wanted: usize,
    params: DistanceParams,
) -> Result<(Vec<f64>, usize)> {
    let budget = CONDITIONING_BUDGET * wanted;
    let (seeds, attempts) = conditioned_seeds(n, p, q, hypothesis, stream, wanted, budget)?;
    if seeds.len() < wanted {
        return Err(Error::CalibrationStarved {
            found: seeds.len(),
            wanted,
            attempts,
        });
    }
    let z = statistics_for_seeds(n, p, q, &seeds, params)?
        .into_iter()
        .map(|s| s.z)
        .collect();
    Ok((z, attempts))
}

/// Separation record at a single size.
///
/// Three independent streams per `n`: null pairs for calibrating `z_ε`,
/// null pairs for the empirical level and the plotted null distribution,
/// and alternative pairs.
pub fn separation_at(
    schedule: &Schedule,
    n: usize,
    replicates: usize,
    level: f64,
    master_seed: u64,
    params: DistanceParams,
) -> Result<SeparationRecord> {
    let sample = schedule.evaluate(n)?;
    let base = derive_seed(master_seed, n as u64);
    let est = calibrate_any_size(schedule, n, level, replicates, derive_seed(base, 0), params)?;
    let (z0, a0) = conditioned_statistics(
        n,
        sample.p,
        sample.q,
        Hypothesis::Null,
        derive_seed(base, 1),
        replicates,
        params,
    )?;
    let (z1, a1) = conditioned_statistics(
        n,
        sample.p,
        sample.q,
        Hypothesis::Alternative,
        derive_seed(base, 2),
        replicates,
        params,
    )?;

    let (normalization, normalization_error) = match Standardization::fit(&z0) {
        Ok(st) => (Some(st), None),
        Err(e) => (None, Some(e)),
    };
    let build = |hypothesis, z_raw: Vec<f64>, attempts| {
        let z_normalized = normalization.map(|st| z_raw.iter().map(|&z| st.apply(z)).collect());
        let summary = BoxSummary::from_values(z_normalized.as_deref().unwrap_or(&z_raw));
        HypothesisSample {
            hypothesis,
            z_raw,
            z_normalized,
            summary,
            attempts,
        }
    };
    Ok(SeparationRecord {
        n,
        p: sample.p,
        q: sample.q,
        level,
        threshold: est.threshold,
        power: rejection_rate(&z1, est.threshold),
        level_empirical: rejection_rate(&z0, est.threshold),
        null: build(Hypothesis::Null, z0, a0),
        alt: build(Hypothesis::Alternative, z1, a1),
        normalization,
        normalization_error,
    })
}

pub fn run_separation(cfg: &ExperimentConfig) -> Result<Vec<SeparationRecord>> {
    cfg.validate()?;
    let params = cfg.params()?;
    with_workers(cfg.workers, || {
        cfg.sizes()
            .into_iter()
            .map(|n| {
                separation_at(
                    &cfg.schedule,
                    n,
                    cfg.replicates,
                    cfg.level,
                    cfg.master_seed,
                    params,
                )
            })
            .collect::<Result<Vec<_>>>()
    })?
}

pub fn separation_csv(records: &[SeparationRecord]) -> String {
    let mut out = String::from("n,hypothesis,replicate,z_raw,z_normalized\n");
    for rec in records {
        for sample in [&rec.null, &rec.alt] {
            for (r, z) in sample.z_raw.iter().enumerate() {
                let _ = write!(out, "{},{},{},{},", rec.n, sample.hypothesis.label(), r, z);
                if let Some(norm) = &sample.z_normalized {
                    let _ = write!(out, "{}", norm[r]);
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn power_csv(records: &[SeparationRecord]) -> String {
    let mut out = String::from("n,epsilon,threshold,power,level_empirical\n");
    for rec in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            rec.n, rec.level, rec.threshold, rec.power, rec.level_empirical
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentOutput {
    TimeSeries(TimeSeriesRecord),
    Separation(Vec<SeparationRecord>),
}

/// Writes the SVG figures for `output` into `out_dir`.
pub fn emit_plots(
    output: &ExperimentOutput,
    out_dir: &Path,
    kind: ExperimentKind,
    log_y: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let mut put = |name: &str, svg: String| -> Result<()> {
        let path = out_dir.join(name);
        fs::write(&path, svg)?;
        files.push(path);
        Ok(())
    };
    match output {
        ExperimentOutput::TimeSeries(rec) => put("timeseries.svg", plot::timeseries_svg(rec))?,
        ExperimentOutput::Separation(recs) => {
            if kind != ExperimentKind::Power {
                let scale = if log_y {
                    plot::YScale::SymLog
                } else {
                    plot::YScale::Linear
                };
                put("separation.svg", plot::separation_svg(recs, scale))?;
            }
            put("power.svg", plot::power_svg(recs))?;
        }
    }
    Ok(files)
}

/// Runs the configured experiment and writes the resolved config, the CSV
/// tables and the figures into `cfg.out_dir`. Returns the files written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(ExperimentOutput, Vec<PathBuf>)> {
    cfg.validate()?;
    let dir = cfg.out_dir.as_path();
    let output = match cfg.kind {
        ExperimentKind::Timeseries => ExperimentOutput::TimeSeries(run_timeseries(cfg)?),
        ExperimentKind::Separation | ExperimentKind::Power => {
            ExperimentOutput::Separation(run_separation(cfg)?)
        }
        ExperimentKind::OracleCheck => {
            return Err(Error::Config(
                "oracle checks are run with `oracle-check`, not as an experiment".into(),
            ))
        }
    };
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, text)?;
        files.push(path);
        Ok(())
    };
    put("config.json", cfg.resolved().to_json_pretty())?;
    match &output {
        ExperimentOutput::TimeSeries(rec) => put("timeseries.csv", rec.to_csv_string())?,
        ExperimentOutput::Separation(recs) => {
            if cfg.kind == ExperimentKind::Separation {
                put("separation.csv", separation_csv(recs))?;
            }
            put("power.csv", power_csv(recs))?;
        }
    }
    files.extend(emit_plots(&output, dir, cfg.kind, cfg.log_y)?);
    Ok((output, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_validation() {
        let cfg = ExperimentConfig::from_json(r#"{"kind":"separation"}"#).unwrap();
        assert_eq!(cfg.sizes(), vec![64, 128, 256]);
        assert_eq!(cfg.replicates, 200);
        assert_eq!(cfg.schedule, Schedule::separated());

        for bad in [
            r#"{"kind":"separation","n_values":[]}"#,
            r#"{"kind":"separation","n_values":[3]}"#,
            r#"{"kind":"separation","replicates":0}"#,
            r#"{"kind":"separation","level":1.5}"#,
            r#"{"kind":"separation","beta":0}"#,
            r#"{"kind":"separation","bogus":1}"#,
            r#"{"kind":"nope"}"#,
        ] {
            assert!(ExperimentConfig::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn range_sizes() {
        let cfg =
            ExperimentConfig::from_json(r#"{"kind":"timeseries","n_values":{"start":8,"end":14,"step":3}}"#)
                .unwrap();
        assert_eq!(cfg.sizes(), vec![8, 11, 14]);
        assert_eq!(cfg.resolved().n_values, NValues::List(vec![8, 11, 14]));
    }

    #[test]
    fn schedule_errors_carry_n() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Timeseries);
        cfg.schedule.p = crate::models::Rule::PowerLog { c: 1.0, a: 2.0, b: 0.5 };
        cfg.n_values = NValues::List(vec![16]);
        assert!(matches!(
            run_timeseries(&cfg),
            Err(Error::ScheduleOutOfRange { n: 16, which: "p", .. })
        ));
    }
}

//! Hypothesis test for community merging between consecutive snapshots.
//!
//! For a growth pair the distance `D_n` between the subgraph on `[n]` and
//! the grown graph is turned into
//!
//! ```text
//! Z_n = (16 m_n² / n⁴) · (D_n − n)
//! ```
//!
//! and `H0: k_n = k_{n+1}` is rejected when `Z_n ≥ z_ε`. The threshold has
//! no closed form; it is calibrated empirically as the upper `ε` quantile of
//! `Z_n` over simulated pairs conditioned on `H0`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{derive_seed, final_step, grow_pair, same_community, GrowthPair, Schedule};
use crate::resistance::{rd_distance_matrices, resistance_matrix, DistanceParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// No cross-community edge created by the new vertex.
    Null,
    /// At least one new cross-community edge.
    Alternative,
}

impl Hypothesis {
    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::Null => "H0",
            Hypothesis::Alternative => "H1",
        }
    }

    fn admits(self, new_cross_edges: usize) -> bool {
        match self {
            Hypothesis::Null => new_cross_edges == 0,
            Hypothesis::Alternative => new_cross_edges > 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    AcceptH0,
    RejectH0,
}

/// Closed rejection region: `Z ≥ threshold` rejects.
pub fn decide(z: f64, threshold: f64) -> Verdict {
    if z >= threshold {
        Verdict::RejectH0
    } else {
        Verdict::AcceptH0
    }
}

/// `D_n`: renormalized resistance distance between the subgraph (padded with
/// the not-yet-attached vertex) and the grown graph.
///
/// The grown graph's resistances come from the subgraph's by one
/// single-edge update per edge of the new vertex.
pub fn distance_step(pair: &GrowthPair, params: DistanceParams) -> f64 {
    let before = resistance_matrix(&pair.sub);
    let after = before
        .extend_with_vertex(pair.new_vertex_neighbors())
        .expect("new vertex neighbors lie in the subgraph");
    rd_distance_matrices(&before, &after, params)
}

/// Leading linear term `⌊n/2⌋ + ⌈n/2⌉·k/(1+k)` of `D_n` under `H0`.
pub fn h_linear(n: usize, k: usize) -> f64 {
    let k = k as f64;
    (n / 2) as f64 + n.div_ceil(2) as f64 * k / (1.0 + k)
}

/// `Z_n = (16 m² / n⁴)(D_n − n)`.
pub fn z_statistic(d_n: f64, m_n: usize, n: usize) -> f64 {
    let density = m_n as f64 / (n as f64 * n as f64);
    16.0 * density * density * (d_n - n as f64)
}

/// `4 m_n / n²`, which tracks `p_n` when cross edges are rare.
pub fn estimate_p(m_n: usize, n: usize) -> f64 {
    4.0 * m_n as f64 / (n as f64 * n as f64)
}

/// Everything the test computes for one pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairStatistics {
    pub n: usize,
    pub d_n: f64,
    pub h: f64,
    pub z: f64,
    pub k_before: usize,
    pub k_after: usize,
    pub m_before: usize,
}

pub fn pair_statistics(pair: &GrowthPair, params: DistanceParams) -> PairStatistics {
    let n = pair.n();
    let d_n = distance_step(pair, params);
    PairStatistics {
        n,
        d_n,
        h: h_linear(n, pair.k_before),
        z: z_statistic(d_n, pair.m_before, n),
        k_before: pair.k_before,
        k_after: pair.k_after,
        m_before: pair.m_before,
    }
}

/// Scans attempts `derive_seed(master_seed, a)` for `a = 0, 1, ...` and
/// keeps the seeds whose growth pair satisfies `hypothesis`, until `wanted`
/// seeds are found or `max_attempts` are spent. Returns the kept seeds and
/// the number of attempts used.
///
/// Only the final growth step decides `k_after − k_before`, so rejected
/// attempts never build the full graph.
pub fn conditioned_seeds(
    n: usize,
    p: f64,
    q: f64,
    hypothesis: Hypothesis,
    master_seed: u64,
    wanted: usize,
    max_attempts: usize,
) -> Result<(Vec<u64>, usize)> {
    let mut seeds = Vec::with_capacity(wanted);
    let mut attempts = 0;
    while seeds.len() < wanted && attempts < max_attempts {
        let seed = derive_seed(master_seed, attempts as u64);
        attempts += 1;
        let cross = final_step(n, p, q, seed)?
            .into_iter()
            .filter(|&i| !same_community(i, n))
            .count();
        if hypothesis.admits(cross) {
            seeds.push(seed);
        }
    }
    Ok((seeds, attempts))
}

/// One growth pair conditioned on `hypothesis`, by rejection over at most
/// `max_attempts` derived seeds. `None` when the budget runs out.
pub fn sample_conditioned(
    n: usize,
    p: f64,
    q: f64,
    hypothesis: Hypothesis,
    seed: u64,
    max_attempts: usize,
) -> Result<Option<GrowthPair>> {
    let (seeds, _) = conditioned_seeds(n, p, q, hypothesis, seed, 1, max_attempts)?;
    seeds.first().map(|&s| grow_pair(n, p, q, s)).transpose()
}

/// Index of the `1 − level` quantile under the "higher" rule: the smallest
/// order statistic at or above the interpolation point.
fn higher_quantile_index(len: usize, level: f64) -> usize {
    let pos = (len - 1) as f64 * (1.0 - level);
    // Guard against `pos` landing a rounding error above an integer.
    ((pos - 1e-9).ceil().max(0.0) as usize).min(len - 1)
}

/// Empirical `1 − level` quantile of ascending `sorted`, higher rule.
pub fn upper_quantile(sorted: &[f64], level: f64) -> f64 {
    sorted[higher_quantile_index(sorted.len(), level)]
}

/// Calibrated rejection threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdEstimate {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub level: f64,
    /// Requested number of null replicates.
    pub replicates: usize,
    pub threshold: f64,
    /// Null statistics in replicate order.
    pub z_values: Vec<f64>,
    /// The same values, ascending.
    pub samples: Vec<f64>,
    pub master_seed: u64,
    pub attempts: usize,
}

impl ThresholdEstimate {
    /// Builds an estimate from already computed null statistics.
    pub fn from_samples(
        n: usize,
        p: f64,
        q: f64,
        level: f64,
        z_values: Vec<f64>,
        master_seed: u64,
    ) -> Result<Self> {
        check_level(level)?;
        if z_values.is_empty() || z_values.iter().any(|z| z.is_nan()) {
            return Err(Error::InvalidParameter(
                "threshold needs at least one non-NaN sample".into(),
            ));
        }
        let mut samples = z_values.clone();
        samples.sort_by(f64::total_cmp);
        let threshold = upper_quantile(&samples, level);
        Ok(ThresholdEstimate {
            n,
            p,
            q,
            level,
            replicates: z_values.len(),
            threshold,
            attempts: z_values.len(),
            z_values,
            samples,
            master_seed,
        })
    }

    /// Fraction of attempts that satisfied the null conditioning.
    pub fn acceptance_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.z_values.len() as f64 / self.attempts as f64
        }
    }

    /// CSV with a `#` metadata line, then `replicate,z_value` rows.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# n={},p={},q={},epsilon={},M={},master_seed={}",
            self.n, self.p, self.q, self.level, self.replicates, self.master_seed
        );
        out.push_str("replicate,z_value\n");
        for (r, z) in self.z_values.iter().enumerate() {
            let _ = writeln!(out, "{r},{z}");
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let meta = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::parse(1, "empty threshold file"))?;
        let meta = meta
            .strip_prefix('#')
            .ok_or_else(|| Error::parse(1, "missing metadata line"))?;
        let field = |name: &str| -> Result<String> {
            meta.split(',')
                .filter_map(|kv| kv.trim().split_once('='))
                .find(|(k, _)| *k == name)
                .map(|(_, v)| v.to_string())
                .ok_or_else(|| Error::parse(1, format!("missing {name}")))
        };
        let num = |s: String| -> Result<f64> {
            s.parse().map_err(|_| Error::parse(1, format!("bad number {s:?}")))
        };
        let n = num(field("n")?)? as usize;
        let p = num(field("p")?)?;
        let q = num(field("q")?)?;
        let level = num(field("epsilon")?)?;
        let replicates = num(field("M")?)? as usize;
        let master_seed: u64 = field("master_seed")?
            .parse()
            .map_err(|_| Error::parse(1, "bad master_seed"))?;

        match lines.next().transpose()? {
            Some(h) if h.trim() == "replicate,z_value" => {}
            _ => return Err(Error::parse(2, "expected `replicate,z_value` header")),
        }
        let mut z_values = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let z = line
                .split_once(',')
                .and_then(|(_, z)| z.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::parse(idx + 3, "bad row"))?;
            z_values.push(z);
        }
        let mut est = ThresholdEstimate::from_samples(n, p, q, level, z_values, master_seed)?;
        est.replicates = replicates;
        Ok(est)
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("level must lie in (0, 1), got {level}")))
    }
}

/// Null statistics of `seeds` in seed order; computed in parallel.
pub fn statistics_for_seeds(
    n: usize,
    p: f64,
    q: f64,
    seeds: &[u64],
    params: DistanceParams,
) -> Result<Vec<PairStatistics>> {
    seeds
        .par_iter()
        .map(|&s| grow_pair(n, p, q, s).map(|pair| pair_statistics(&pair, params)))
        .collect()
}

/// Calibrates `z_ε` at size `n` from `replicates` growth pairs conditioned on
/// `H0` by rejection. At most `10 · replicates` attempts are made; finding
/// fewer than half the requested pairs is reported as starvation, otherwise
/// the pairs found are used.
pub fn calibrate_threshold(
    schedule: &Schedule,
    n: usize,
    level: f64,
    replicates: usize,
    master_seed: u64,
    params: DistanceParams,
) -> Result<ThresholdEstimate> {
    if replicates < 20 {
        return Err(Error::InvalidParameter(format!(
            "calibration needs at least 20 replicates, got {replicates}"
        )));
    }
    calibrate_any_size(schedule, n, level, replicates, master_seed, params)
}

/// [`calibrate_threshold`] without the minimum replicate count, for
/// exploratory runs with tiny `M`.
pub(crate) fn calibrate_any_size(
    schedule: &Schedule,
    n: usize,
    level: f64,
    replicates: usize,
    master_seed: u64,
    params: DistanceParams,
) -> Result<ThresholdEstimate> {
    check_level(level)?;
    if replicates == 0 {
        return Err(Error::InvalidParameter("calibration needs replicates".into()));
    }
    let sample = schedule.evaluate(n)?;
    let budget = 10 * replicates;
    let (seeds, attempts) = conditioned_seeds(
        n,
        sample.p,
        sample.q,
        Hypothesis::Null,
        master_seed,
        replicates,
        budget,
    )?;
    if 2 * seeds.len() < replicates {
        return Err(Error::CalibrationStarved {
            found: seeds.len(),
            wanted: replicates,
            attempts,
        });
    }
    let z_values = statistics_for_seeds(n, sample.p, sample.q, &seeds, params)?
        .into_iter()
        .map(|s| s.z)
        .collect();
    let mut est =
        ThresholdEstimate::from_samples(n, sample.p, sample.q, level, z_values, master_seed)?;
    est.replicates = replicates;
    est.attempts = attempts;
    Ok(est)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestOutcome {
    pub n: usize,
    pub d_n: f64,
    /// `h(n, k_n)` from the true `k_n`; a diagnostic, not used by the test.
    pub h: f64,
    pub z_n: f64,
    pub threshold: f64,
    pub level: f64,
    pub verdict: Verdict,
}

/// Runs the test on one pair against a threshold calibrated at the same size.
pub fn test_step(
    pair: &GrowthPair,
    est: &ThresholdEstimate,
    params: DistanceParams,
) -> Result<TestOutcome> {
    if pair.n() != est.n {
        return Err(Error::ConfigMismatch(format!(
            "pair has n = {}, threshold was calibrated at n = {}",
            pair.n(),
            est.n
        )));
    }
    let stats = pair_statistics(pair, params);
    Ok(TestOutcome {
        n: stats.n,
        d_n: stats.d_n,
        h: stats.h,
        z_n: stats.z,
        threshold: est.threshold,
        level: est.level,
        verdict: decide(stats.z, est.threshold),
    })
}

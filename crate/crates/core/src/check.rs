//! Self-check of the numerical resistance code against the exact oracle
//! and against full recomputation after single-edge updates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::models::derive_seed;
use crate::resistance::{oracle_resistance, resistance_matrix, Resistance, ResistanceMatrix};

/// Relative tolerance for matrix vs. oracle and update vs. recomputation.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleCheckConfig {
    /// Largest graph size in the oracle suite.
    pub oracle_n_max: usize,
    /// Largest graph size in the update suite.
    pub update_n_max: usize,
    pub trials: usize,
    pub seed: u64,
    /// Deliberately perturbs one computed value, to exercise the failure path.
    pub corrupt: bool,
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        OracleCheckConfig {
            oracle_n_max: 12,
            update_n_max: 30,
            trials: 200,
            seed: 1,
            corrupt: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OracleReport {
    pub oracle_graphs: usize,
    pub oracle_pairs: usize,
    pub max_oracle_error: f64,
    pub update_cases: usize,
    pub bridge_updates: usize,
    pub same_component_updates: usize,
    pub max_update_error: f64,
    pub monotonicity_violations: usize,
    pub failures: Vec<String>,
}

impl OracleReport {
    /// No mismatches, and both update branches were exercised.
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
            && self.monotonicity_violations == 0
            && self.bridge_updates > 0
            && self.same_component_updates > 0
    }

    pub fn summary(&self) -> String {
        format!(
            "oracle: {} graphs, {} pairs, max rel error {:.3e}\n\
             updates: {} cases ({} bridge, {} same-component), max rel error {:.3e}, \
             {} monotonicity violations\n{}",
            self.oracle_graphs,
            self.oracle_pairs,
            self.max_oracle_error,
            self.update_cases,
            self.bridge_updates,
            self.same_component_updates,
            self.max_update_error,
            self.monotonicity_violations,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

fn rel_error(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

/// Random graph on `n` vertices: a random recursive tree (when `connected`)
/// plus independent extra edges with probability `p`.
fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, connected: bool) -> Graph {
    let mut edges = Vec::new();
    if connected {
        for v in 1..n {
            edges.push((rng.random_range(0..v), v));
        }
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).expect("endpoints in range")
}

fn compare(
    got: Resistance,
    want: Resistance,
    what: &str,
    max_error: &mut f64,
    failures: &mut Vec<String>,
) {
    match (got, want) {
        (Resistance::Disconnected, Resistance::Disconnected) => {}
        (Resistance::Finite(a), Resistance::Finite(b)) => {
            let e = rel_error(a, b);
            *max_error = max_error.max(e);
            if e.is_nan() || e > CHECK_TOLERANCE {
                failures.push(format!("{what}: got {a}, expected {b}"));
            }
        }
        _ => failures.push(format!("{what}: got {got:?}, expected {want:?}")),
    }
}

pub fn run_oracle_check(cfg: &OracleCheckConfig) -> OracleReport {
    let mut report = OracleReport::default();
    let mut corrupt = cfg.corrupt;

    for t in 0..cfg.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, t as u64));
        let n = rng.random_range(2..=cfg.oracle_n_max.max(2));
        let p = rng.random_range(0.05..0.6);
        // Every fourth graph skips the spanning tree, so disconnected
        // pairs are covered too.
        let g = random_graph(&mut rng, n, p, t % 4 != 3);
        let r = resistance_matrix(&g);
        report.oracle_graphs += 1;
        for u in 0..n {
            for v in u..n {
                let mut got = r.get(u, v);
                if corrupt {
                    got = Resistance::Finite(got.finite().unwrap_or(0.0) + 0.5);
                    corrupt = false;
                }
                let what = format!("oracle trial {t} (n={n}) pair ({u},{v})");
                compare(
                    got,
                    oracle_resistance(&g, u, v),
                    &what,
                    &mut report.max_oracle_error,
                    &mut report.failures,
                );
                report.oracle_pairs += 1;
            }
        }
    }

    for t in 0..cfg.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed ^ 0x5eed, t as u64));
        let n = rng.random_range(3..=cfg.update_n_max.max(3));
        let p = rng.random_range(0.02..0.3);
        let g = random_graph(&mut rng, n, p, t % 2 == 0);
        let missing: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .filter(|&(u, v)| !g.has_edge(u, v))
            .collect();
        if missing.is_empty() {
            continue;
        }
        let (a, b) = missing[rng.random_range(0..missing.len())];
        let before = resistance_matrix(&g);
        if before.labeling().same_component(a, b) {
            report.same_component_updates += 1;
        } else {
            report.bridge_updates += 1;
        }
        let updated = match before.update_add_edge(a, b) {
            Ok(m) => m,
            Err(e) => {
                report.failures.push(format!("update trial {t}: {e}"));
                continue;
            }
        };
        let mut edges = g.edges().to_vec();
        edges.push((a, b));
        let after = Graph::from_edges(n, edges).expect("endpoints in range");
        let direct = resistance_matrix(&after);
        report.update_cases += 1;
        check_update(&mut report, t, &before, &updated, &direct);
    }
    report
}

fn check_update(
    report: &mut OracleReport,
    t: usize,
    before: &ResistanceMatrix,
    updated: &ResistanceMatrix,
    direct: &ResistanceMatrix,
) {
    let n = before.size();
    for u in 0..n {
        for v in u..n {
            let what = format!("update trial {t} pair ({u},{v})");
            compare(
                updated.get(u, v),
                direct.get(u, v),
                &what,
                &mut report.max_update_error,
                &mut report.failures,
            );
            // Adding an edge never increases a resistance.
            if let (Some(old), Some(new)) = (before.get(u, v).finite(), updated.get(u, v).finite()) {
                if new > old + CHECK_TOLERANCE * old.max(1.0) {
                    report.monotonicity_violations += 1;
                }
            } else if updated.get(u, v).is_disconnected() && !before.get(u, v).is_disconnected() {
                report.monotonicity_violations += 1;
            }
        }
    }
}

//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line with the
//! measured quantities, then asserts. Criteria run one at a time so the
//! reported runtimes are not inflated by each other.

mod common;

use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::Rng;
use respert::detection::{conditioned_seeds, estimate_p, statistics_for_seeds, Hypothesis};
use respert::experiment::{
    power_csv, run_separation, separation_at, separation_csv, ExperimentConfig, ExperimentKind,
    NValues,
};
use respert::models::{count_cross_edges, sample_sbm, same_community, Schedule};
use respert::{
    oracle_resistance, rd_distance, resistance_matrix, DistanceParams, Graph, Resistance,
};

use common::{connected_graph, gnp, non_edges, plus_edge, rng};

static SERIAL: Mutex<()> = Mutex::new(());

fn report(id: u32, name: &str, ok: bool, detail: String, elapsed: Duration) -> bool {
    println!(
        "criterion {id} [{}] {name}: {detail} ({:.2} s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    ok
}

fn criterion(id: u32, name: &str, budget: Duration, body: impl FnOnce() -> (bool, String)) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let (ok, detail) = body();
    let elapsed = start.elapsed();
    let ok = report(id, name, ok && elapsed < budget, detail, elapsed);
    assert!(ok, "criterion {id} failed");
}

fn finite(r: Resistance) -> f64 {
    r.finite().expect("connected pair")
}

#[test]
fn criterion_1_analytic_resistances() {
    criterion(1, "analytic resistances", Duration::from_secs(1), || {
        let cases = [
            (Graph::from_edges(2, [(0, 1)]).unwrap(), (0, 1), 1.0),
            (Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap(), (0, 2), 2.0),
            (Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap(), (0, 1), 2.0 / 3.0),
            (
                Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap(),
                (1, 3),
                0.5,
            ),
        ];
        let err = cases
            .iter()
            .map(|(g, (u, v), want)| (finite(resistance_matrix(g).get(*u, *v)) - want).abs())
            .fold(0.0, f64::max);
        (err <= 1e-9, format!("max error {err:.2e}"))
    });
}

#[test]
fn criterion_2_oracle_equivalence() {
    criterion(2, "oracle equivalence", Duration::from_secs(30), || {
        let mut err: f64 = 0.0;
        for t in 0..200 {
            let mut rng = rng(2002, t);
            let n = rng.random_range(2..=12);
            let extra = rng.random_range(0.0..0.5);
            let g = connected_graph(&mut rng, n, extra);
            let r = resistance_matrix(&g);
            for u in 0..n {
                for v in 0..n {
                    let d = finite(r.get(u, v)) - finite(oracle_resistance(&g, u, v));
                    err = err.max(d.abs());
                }
            }
        }
        (err <= 1e-8, format!("200 connected graphs, max error {err:.2e}"))
    });
}

#[test]
fn criterion_3_rank_one_update() {
    criterion(3, "rank-one update", Duration::from_secs(60), || {
        let (mut err, mut rise): (f64, f64) = (0.0, 0.0);
        let (mut bridges, mut inside, mut label_mismatch, mut cases) = (0, 0, 0, 0);
        let mut t = 0;
        while cases < 200 {
            let mut rng = rng(2003, t);
            t += 1;
            let n = rng.random_range(3..=30);
            let p = rng.random_range(0.02..0.25);
            let g = gnp(&mut rng, n, p);
            let missing = non_edges(&g);
            if missing.is_empty() {
                continue;
            }
            cases += 1;
            let (a, b) = missing[rng.random_range(0..missing.len())];
            let before = resistance_matrix(&g);
            if before.labeling().same_component(a, b) {
                inside += 1;
            } else {
                bridges += 1;
            }
            let updated = before.update_add_edge(a, b).unwrap();
            let direct = resistance_matrix(&plus_edge(&g, a, b));
            for u in 0..n {
                for v in 0..n {
                    match (updated.get(u, v), direct.get(u, v)) {
                        (Resistance::Finite(x), Resistance::Finite(y)) => {
                            err = err.max((x - y).abs())
                        }
                        (x, y) if x == y => {}
                        _ => label_mismatch += 1,
                    }
                    if let (Resistance::Finite(old), Resistance::Finite(new)) =
                        (before.get(u, v), updated.get(u, v))
                    {
                        rise = rise.max(new - old);
                    }
                }
            }
        }
        let ok = err <= 1e-8 && rise <= 1e-10 && label_mismatch == 0 && bridges > 0 && inside > 0;
        (
            ok,
            format!(
                "{cases} graphs ({inside} same-component, {bridges} bridge), max error {err:.2e}, \
                 max increase {rise:.2e}, sentinel mismatches {label_mismatch}"
            ),
        )
    });
}

#[test]
fn criterion_4_rd_metric_axioms() {
    criterion(4, "RD metric axioms", Duration::from_secs(60), || {
        let params = DistanceParams::default();
        let d = |a: &Graph, b: &Graph| rd_distance(a, b, params);
        let mut violations = 0;
        let mut padding_nonzero = 0;
        for t in 0..100 {
            let mut rng = rng(2004, t);
            let n = rng.random_range(1..=20);
            let gs: Vec<Graph> = (0..3)
                .map(|_| {
                    let p = rng.random_range(0.0..0.5);
                    gnp(&mut rng, n, p)
                })
                .collect();
            let (a, b, c) = (&gs[0], &gs[1], &gs[2]);
            for (x, y) in [(a, b), (b, c), (a, c)] {
                if d(x, y) < 0.0 || d(x, y) != d(y, x) {
                    violations += 1;
                }
            }
            for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                if d(x, z) > d(x, y) + d(y, z) + 1e-12 {
                    violations += 1;
                }
            }
            for g in &gs {
                if d(g, &g.padded_to(n + 1)) != 0.0 {
                    padding_nonzero += 1;
                }
            }
        }
        (
            violations == 0 && padding_nonzero == 0,
            format!("100 triples, {violations} axiom violations, {padding_nonzero} nonzero padding distances"),
        )
    });
}

#[test]
fn criterion_5_nash_williams() {
    criterion(5, "Nash-Williams cutset bound", Duration::from_secs(120), || {
        let (n, p, q) = (200, 0.2, 0.005);
        let (mut violations, mut pairs) = (0, 0);
        let mut tightest = f64::INFINITY;
        for seed in 0..50 {
            let g = sample_sbm(n, p, q, 5000 + seed).unwrap();
            let k = count_cross_edges(&g) as f64;
            let r = resistance_matrix(&g);
            for u in 0..n {
                for v in (u + 1)..n {
                    if same_community(u, v) {
                        continue;
                    }
                    if let Resistance::Finite(x) = r.get(u, v) {
                        pairs += 1;
                        tightest = tightest.min(x - 1.0 / k);
                        if x < 1.0 / k - 1e-9 {
                            violations += 1;
                        }
                    }
                }
            }
        }
        (
            violations == 0,
            format!("{pairs} cross pairs, {violations} below 1/k, min slack {tightest:.3e}"),
        )
    });
}

#[test]
fn criterion_6_null_excess_bounds() {
    criterion(6, "H0 boundedness of D_n - h", Duration::from_secs(600), || {
        let params = DistanceParams::default();
        let mut negative = 0;
        let mut worst = f64::INFINITY;
        let mut lines = Vec::new();
        let mut scaled_ok = true;
        for n in [128, 256, 512] {
            let s = Schedule::separated().evaluate(n).unwrap();
            let (seeds, _) =
                conditioned_seeds(n, s.p, s.q, Hypothesis::Null, 6000 + n as u64, 100, 10_000)
                    .unwrap();
            let stats = statistics_for_seeds(n, s.p, s.q, &seeds, params).unwrap();
            let excess: Vec<f64> = stats.iter().map(|st| st.d_n - st.h).collect();
            let neg = excess.iter().filter(|&&e| e < -1e-9).count();
            let within = excess.iter().filter(|&&e| s.p * s.p * e <= 64.0).count();
            negative += neg;
            worst = excess.iter().copied().fold(worst, f64::min);
            scaled_ok &= within * 100 >= 99 * excess.len();
            lines.push(format!(
                "n={n}: {neg}/{} below -1e-9, {within}/{} with p^2(D-h) <= 64",
                excess.len(),
                excess.len()
            ));
        }
        (
            negative == 0 && scaled_ok,
            format!(
                "{}; min D-h {worst:.3}; sign condition {}, scaled bound {}",
                lines.join("; "),
                if negative == 0 { "met" } else { "NOT met" },
                if scaled_ok { "met" } else { "NOT met" }
            ),
        )
    });
}

#[test]
fn criterion_7_power_and_level() {
    criterion(7, "level, power and overlap", Duration::from_secs(600), || {
        let params = DistanceParams::default();
        let (m, level) = (200, 0.05);
        let mut powers = Vec::new();
        let mut main = None;
        for n in [128, 256, 512] {
            let rec = separation_at(&Schedule::separated(), n, m, level, 7, params).unwrap();
            powers.push(rec.power);
            if n == 256 {
                main = Some((rec.level_empirical, rec.power));
            }
        }
        let (lvl, pow) = main.unwrap();
        let overlap = separation_at(&Schedule::overlapping(), 256, m, level, 7, params).unwrap();
        let monotone = powers.windows(2).all(|w| w[1] >= w[0]);
        let ok = lvl <= 0.08 && pow >= 0.95 && overlap.power <= 0.6 && monotone;
        (
            ok,
            format!(
                "n=256 level {lvl:.3} power {pow:.3}; overlapping power {:.3}; \
                 power at n=128,256,512: {powers:?}",
                overlap.power
            ),
        )
    });
}

#[test]
fn criterion_8_edge_count_estimator() {
    criterion(8, "edge-count estimator", Duration::from_secs(60), || {
        let (n, p, q) = (1000, 0.05, 1e-4);
        let good = (0..100)
            .filter(|&seed| {
                let m = sample_sbm(n, p, q, 8000 + seed).unwrap().edge_count();
                (estimate_p(m, n) - p).abs() <= 0.1 * p
            })
            .count();
        (good >= 95, format!("{good}/100 seeds within 10% of p"))
    });
}

#[test]
fn criterion_9_determinism() {
    criterion(9, "determinism across runs and workers", Duration::from_secs(600), || {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Separation);
        cfg.n_values = NValues::List(vec![64, 128]);
        cfg.replicates = 100;
        cfg.master_seed = 9;
        let mut outputs = Vec::new();
        for workers in [None, Some(1), Some(3)] {
            cfg.workers = workers;
            let recs = run_separation(&cfg).unwrap();
            outputs.push((separation_csv(&recs), power_csv(&recs)));
        }
        let identical = outputs.windows(2).all(|w| w[0] == w[1]);
        let rows = outputs[0].0.lines().count() - 1;
        (
            identical,
            format!("3 runs (default, 1 and 3 workers), {rows} rows each, identical: {identical}"),
        )
    });
}

use std::fs;
use std::path::Path;

use respert::experiment::{
    emit_plots, run_experiment, run_separation, run_timeseries, ExperimentConfig, ExperimentKind,
    ExperimentOutput, NValues,
};
use respert::models::{Rule, Schedule};
use respert::summary::{mean, std_dev, linear_quantile};
use respert::Error;

fn small(kind: ExperimentKind, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(kind);
    cfg.n_values = NValues::List(vec![16, 24]);
    cfg.replicates = 20;
    cfg.master_seed = 5;
    cfg.out_dir = out.to_path_buf();
    cfg
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn separation_outputs_are_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_experiment(&small(ExperimentKind::Separation, a.path())).unwrap();
    let mut cfg = small(ExperimentKind::Separation, b.path());
    cfg.workers = Some(2);
    run_experiment(&cfg).unwrap();
    for name in ["separation.csv", "power.csv", "separation.svg", "power.svg"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn csv_row_counts_match_configuration() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&small(ExperimentKind::Separation, dir.path())).unwrap();
    assert_eq!(read(dir.path(), "separation.csv").lines().count(), 1 + 2 * 2 * 20);
    assert_eq!(read(dir.path(), "power.csv").lines().count(), 1 + 2);

    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::Timeseries, dir.path());
    cfg.n_values = NValues::Range { start: 8, end: 40, step: 1 };
    run_experiment(&cfg).unwrap();
    let csv = read(dir.path(), "timeseries.csv");
    assert_eq!(csv.lines().next(), Some("n,d_n,k_n,k_np1,event"));
    assert_eq!(csv.lines().count(), 1 + 33);
}

#[test]
fn power_kind_writes_only_the_power_table() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&small(ExperimentKind::Power, dir.path())).unwrap();
    assert!(dir.path().join("power.csv").exists());
    assert!(dir.path().join("power.svg").exists());
    assert!(!dir.path().join("separation.csv").exists());
}

#[test]
fn resolved_config_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::Timeseries, dir.path());
    cfg.n_values = NValues::Range { start: 8, end: 12, step: 2 };
    run_experiment(&cfg).unwrap();
    let echoed = ExperimentConfig::from_json(&read(dir.path(), "config.json")).unwrap();
    assert_eq!(echoed, cfg.resolved());
    assert_eq!(echoed.sizes(), vec![8, 10, 12]);
}

#[test]
fn timeseries_is_reproducible() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Timeseries);
    cfg.n_values = NValues::Range { start: 10, end: 60, step: 1 };
    let a = run_timeseries(&cfg).unwrap().to_csv_string();
    cfg.workers = Some(3);
    assert_eq!(a, run_timeseries(&cfg).unwrap().to_csv_string());
}

#[test]
fn no_events_without_cross_probability() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Timeseries);
    cfg.n_values = NValues::Range { start: 8, end: 80, step: 1 };
    cfg.schedule.q = Rule::Constant { c: 0.0 };
    let rec = run_timeseries(&cfg).unwrap();
    assert_eq!(rec.rows.len(), 73);
    assert!(rec.rows.iter().all(|r| !r.cross_edge_event && r.k_n == 0));
}

#[test]
fn events_match_cross_edge_counts() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Timeseries);
    cfg.n_values = NValues::Range { start: 8, end: 120, step: 1 };
    cfg.schedule = Schedule::overlapping();
    for r in run_timeseries(&cfg).unwrap().rows {
        assert_eq!(r.cross_edge_event, r.k_np1 > r.k_n);
    }
}

#[test]
fn single_replicate_flags_normalization() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::Separation, dir.path());
    cfg.replicates = 1;
    let recs = run_separation(&cfg).unwrap();
    for rec in &recs {
        assert!(rec.normalization.is_none());
        assert!(rec.normalization_error.is_some());
        assert!(rec.null.z_normalized.is_none());
        assert_eq!(rec.null.z_raw.len(), 1);
    }
    run_experiment(&cfg).unwrap();
}

#[test]
fn null_sample_is_standardized() {
    let dir = tempfile::tempdir().unwrap();
    for rec in run_separation(&small(ExperimentKind::Separation, dir.path())).unwrap() {
        let z = rec.null.z_normalized.as_ref().unwrap();
        assert!(mean(z).abs() < 1e-9);
        assert!((std_dev(z) - 1.0).abs() < 1e-9);
        assert_eq!(rec.alt.z_normalized.as_ref().unwrap().len(), rec.alt.z_raw.len());
    }
}

#[test]
fn box_plots_have_two_glyphs_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(ExperimentKind::Separation, dir.path());
    let output = ExperimentOutput::Separation(run_separation(&cfg).unwrap());
    emit_plots(&output, dir.path(), cfg.kind, false).unwrap();
    let linear = read(dir.path(), "separation.svg");
    assert_eq!(linear.matches("fill-opacity=\"0.35\"").count(), 2 * 2);
    emit_plots(&output, dir.path(), cfg.kind, true).unwrap();
    let log = read(dir.path(), "separation.svg");
    assert!(log.contains("symmetric log"));
    assert_ne!(linear, log);
}

#[test]
fn unwritable_output_directory_is_an_io_error() {
    let file = tempfile::NamedTempFile::new().unwrap();
    let output = ExperimentOutput::Separation(Vec::new());
    let err = emit_plots(&output, &file.path().join("sub"), ExperimentKind::Separation, false);
    assert!(matches!(err, Err(Error::Io(_))));
}

#[test]
fn schedule_violations_are_config_errors() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Timeseries);
    cfg.n_values = NValues::List(vec![2]);
    assert!(run_timeseries(&cfg).is_err());
}

/// Cross-edge events stand out against the null fluctuation of `D_n − h`.
#[test]
fn events_coincide_with_spikes() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Timeseries);
    cfg.n_values = NValues::Range { start: 32, end: 512, step: 1 };
    let rec = run_timeseries(&cfg).unwrap();
    let mut quiet: Vec<f64> = rec
        .rows
        .iter()
        .filter(|r| !r.cross_edge_event)
        .map(|r| r.d_n - r.h)
        .collect();
    quiet.sort_by(f64::total_cmp);
    let iqr = linear_quantile(&quiet, 0.75) - linear_quantile(&quiet, 0.25);
    let events: Vec<_> = rec.rows.iter().filter(|r| r.cross_edge_event).collect();
    let spikes = events.iter().filter(|r| r.d_n - r.h > 5.0 * iqr).count();
    println!("{} events, {spikes} spikes, null IQR {iqr:.3}", events.len());
    assert!(!events.is_empty());
    assert!(spikes * 5 >= events.len() * 4);
}

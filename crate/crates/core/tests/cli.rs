use std::path::Path;
use std::process::Command;

use bcs_quench::config::{schema_json, Mode, RunConfig};
use bcs_quench::run::{run, RunOptions};

const BIN: &str = env!("CARGO_BIN_EXE_bcs-quench");

const QUENCH: &str = r#"{
    "model": {
        "chi_n_mhz": 1.2,
        "couplings": "random_cos",
        "dispersion": { "e_w_mhz": 0.83 },
        "drive_area_pi": 0.586
    },
    "numerics": { "n_spins": 200, "dt_us": 0.004, "t_end_us": 6.0, "seed": 3 },
    "analysis": { "late_window_us": [2.0, 5.0] }
}"#;

fn scan_json(steps: usize) -> String {
    format!(
        r#"{{
        "scan": {{
            "chi_ratio": {{ "min": 0.2, "max": 2.0, "steps": {steps} }},
            "delta_ratio": {{ "min": 0.0, "max": 2.0, "steps": {steps} }},
            "n_spins": 100,
            "window_chi_n": [10.0, 30.0]
        }}
    }}"#
    )
}

fn opts(dir: &Path) -> RunOptions {
    RunOptions { out_dir: Some(dir.to_path_buf()), ..Default::default() }
}

fn data_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.to_string_lossy().ends_with("_manifest.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn csv_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn shipped_schema_is_current() {
    let shipped = include_str!("../schema/run_config.schema.json");
    assert_eq!(shipped, schema_json(), "regenerate with `bcs-quench schema`");
}

#[test]
fn quench_writes_trajectory_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_json_str(QUENCH).unwrap();
    run(Mode::Quench, &cfg, &opts(dir.path())).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("quench_trajectory.csv")).unwrap();
    assert!(csv.starts_with("t_s,re_delta,im_delta,abs_norm\n"));
    assert_eq!(csv.lines().count(), 1501 + 1);
    let metrics: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("quench_metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["label"], "II");
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("quench_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn same_seed_gives_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = RunConfig::from_json_str(QUENCH).unwrap();
    run(Mode::Quench, &cfg, &opts(a.path())).unwrap();
    run(Mode::Quench, &cfg, &opts(b.path())).unwrap();
    assert_eq!(data_files(a.path()), data_files(b.path()));

    let c = tempfile::tempdir().unwrap();
    run(Mode::Quench, &cfg, &RunOptions { seed: Some(4), ..opts(c.path()) }).unwrap();
    assert_ne!(data_files(a.path()), data_files(c.path()));
}

#[test]
fn parallel_scan_matches_serial() {
    let cfg = RunConfig::from_json_str(&scan_json(3)).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(Mode::Scan2d, &cfg, &RunOptions { threads: Some(1), ..opts(a.path()) }).unwrap();
    run(Mode::Scan2d, &cfg, &RunOptions { threads: Some(3), ..opts(b.path()) }).unwrap();
    assert_eq!(data_files(a.path()), data_files(b.path()));
}

#[test]
fn two_by_two_scan_has_four_rows_per_observable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_json_str(&scan_json(2)).unwrap();
    run(Mode::Scan2d, &cfg, &opts(dir.path())).unwrap();
    for name in ["phase_diagram", "avg", "std", "osc_amp", "osc_freq_hz", "label"] {
        assert_eq!(csv_rows(&dir.path().join(format!("scan2d_{name}.csv"))), 4, "{name}");
    }
    assert!(csv_rows(&dir.path().join("scan2d_boundaries.csv")) > 0);
}

#[test]
fn empty_scan_writes_headers_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_json_str(&scan_json(0)).unwrap();
    run(Mode::Scan2d, &cfg, &opts(dir.path())).unwrap();
    for name in ["phase_diagram", "avg", "std", "osc_amp", "osc_freq_hz", "label", "boundaries"] {
        assert_eq!(csv_rows(&dir.path().join(format!("scan2d_{name}.csv"))), 0, "{name}");
    }
    assert!(dir.path().join("scan2d_manifest.json").exists());
}

#[test]
fn lax_and_twospin_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_json_str(r#"{ "lax": { "points": [[1.5, 2.5], [0.2, 0.0]] } }"#).unwrap();
    run(Mode::Lax, &cfg, &opts(dir.path())).unwrap();
    let roots: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("lax_roots.json")).unwrap()).unwrap();
    assert_eq!(roots[0]["label_analytic"], "IIIb");
    assert_eq!(roots[0]["label_numeric"], "IIIb");
    assert_eq!(roots[1]["label_numeric"], "I");

    let cfg = RunConfig::from_json_str(
        r#"{ "twospin": { "chi_n_mhz": 1.0, "delta_s_mhz": 1.4, "t_end_us": 3.0, "dt_us": 0.0005 } }"#,
    )
    .unwrap();
    run(Mode::Twospin, &cfg, &opts(dir.path())).unwrap();
    let f: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("twospin_frequency.json")).unwrap()).unwrap();
    assert!(f["rms_numeric_vs_analytic"].as_f64().unwrap() < 1e-9);
}

#[test]
fn analyze_reads_back_a_quench() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_json_str(QUENCH).unwrap();
    run(Mode::Quench, &cfg, &opts(dir.path())).unwrap();
    let input = dir.path().join("quench_trajectory.csv");
    let json = format!(
        r#"{{ "analyze": {{ "input": {} }}, "analysis": {{ "late_window_us": [2.0, 5.0] }} }}"#,
        serde_json::to_string(&input).unwrap()
    );
    run(Mode::Analyze, &RunConfig::from_json_str(&json).unwrap(), &opts(dir.path())).unwrap();
    let read = |f: &str| -> serde_json::Value {
        serde_json::from_slice(&std::fs::read(dir.path().join(f)).unwrap()).unwrap()
    };
    let (q, a) = (read("quench_metrics.json"), read("analyze_metrics.json"));
    let (x, y) = (q["late"]["avg"].as_f64().unwrap(), a["metrics"]["avg"].as_f64().unwrap());
    assert!((x - y).abs() < 1e-12);
}

#[test]
fn ideal_flag_zeroes_dissipation() {
    let lossy = QUENCH.replace(r#""drive_area_pi": 0.586"#, r#""drive_area_pi": 0.586, "big_gamma_n_mhz": 0.3"#);
    let cfg = RunConfig::from_json_str(&lossy).unwrap();
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(Mode::Quench, &cfg, &RunOptions { ideal: true, ..opts(a.path()) }).unwrap();
    let mut clean = RunConfig::from_json_str(QUENCH).unwrap();
    clean.model.as_mut().unwrap().gamma_el_mhz = Some(0.0);
    run(Mode::Quench, &clean, &opts(b.path())).unwrap();
    run(Mode::Quench, &cfg, &opts(c.path())).unwrap();
    let traj = |d: &Path| std::fs::read(d.join("quench_trajectory.csv")).unwrap();
    assert_eq!(traj(a.path()), traj(b.path()));
    assert_ne!(traj(a.path()), traj(c.path()));
}

fn bin(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().unwrap()
}

#[test]
fn malformed_config_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{ "numerics": { "n_spins": 10, "dt_us": 0.01, "t_end_us": 1.0, "bogus": 1 } }"#).unwrap();
    let o = bin(&["quench", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());

    // valid JSON, but the mode needs a model section
    std::fs::write(&cfg, r#"{ "numerics": { "n_spins": 10, "dt_us": 0.01, "t_end_us": 1.0 } }"#).unwrap();
    let o = bin(&["quench", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn error_classes_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let missing = bin(&["lax", "--config", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(4));

    // a step far above the stability guard
    let cfg = dir.path().join("coarse.json");
    std::fs::write(&cfg, QUENCH.replace(r#""dt_us": 0.004"#, r#""dt_us": 0.5"#)).unwrap();
    let guard = bin(&["quench", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(guard.status.code(), Some(5));
    assert!(!out.exists());
}

#[test]
fn cli_runs_lax_and_reports_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lax.json");
    std::fs::write(&cfg, r#"{ "mode": "lax", "lax": { "points": [[1.0, 0.5]] } }"#).unwrap();
    let o = bin(&["lax", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let listed = String::from_utf8(o.stdout).unwrap();
    assert_eq!(listed.lines().count(), 3);

    // a config written for another mode is refused
    let o = bin(&["twospin", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

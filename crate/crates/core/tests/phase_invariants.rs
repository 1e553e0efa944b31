//! Dynamical labels of idealized runs against the analytic classifier on a
//! 21 x 21 grid, away from the boundaries.

use bcs_quench::config::RunConfig;
use bcs_quench::run::{agreement, scan_grid};

fn score(couplings: &str, mode: &str, extra: &str) -> f64 {
    let cfg = RunConfig::from_json_str(&format!(
        r#"{{ "scan": {{
            "chi_ratio": {{ "min": 0.05, "max": 3.0, "steps": 21 }},
            "delta_ratio": {{ "min": 0.0, "max": 3.0, "steps": 21 }},
            "n_spins": 1000,
            "couplings": "{couplings}",
            "phase_mode": "{mode}"{extra}
        }} }}"#
    ))
    .unwrap();
    let points = scan_grid(&cfg, 5).unwrap();
    let (agree, off) = agreement(&points);
    assert!(off > 200);
    agree as f64 / off as f64
}

#[test]
fn inhomogeneous_grid_agrees() {
    let s = score("random_cos", "inhomogeneous", "");
    assert!(s >= 0.95, "agreement {s}");
}

#[test]
fn homogeneous_grid_agrees() {
    // Higgs oscillations in phase II only decay as a power law here, so the
    // window sits later than the default one. Spins start along x.
    let s = score(
        "homogeneous",
        "homogeneous",
        r#", "drive_area_pi": 0.5, "window_chi_n": [100.0, 260.0]"#,
    );
    assert!(s >= 0.95, "agreement {s}");
}

//! Coarse idealized phase diagram in (chi N/E_W, delta_s/E_W), compared point
//! by point with the analytic classifier.
//!
//! Run with: cargo run --release --example phase_diagram -- [steps] [n_spins]

use bcs_quench::config::{GridAxis, RunConfig, ScanConfig};
use bcs_quench::lax::{PhaseLabel, PhaseMode};
use bcs_quench::model::CouplingKind;
use bcs_quench::run::{agreement, scan_grid};

fn glyph(l: PhaseLabel) -> char {
    match l {
        PhaseLabel::I => '.',
        PhaseLabel::II | PhaseLabel::IIPrime => 'o',
        PhaseLabel::IIIa => 'a',
        PhaseLabel::IIIb | PhaseLabel::III => '#',
    }
}

fn main() -> bcs_quench::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let steps = args.next().unwrap_or(16);
    let n_spins = args.next().unwrap_or(800);
    let scan = ScanConfig {
        chi_ratio: GridAxis { min: 0.05, max: 3.0, steps },
        delta_ratio: GridAxis { min: 0.0, max: 3.0, steps },
        e_w_mhz: 1.0,
        n_spins,
        couplings: CouplingKind::RandomCos,
        drive_area_pi: 0.586,
        window_chi_n: [22.6, 60.3],
        boundary_margin: 0.1,
        dt_ew: None,
        phase_mode: PhaseMode::Inhomogeneous,
    };
    let cfg = RunConfig { scan: Some(scan), ..RunConfig::from_json_str("{}")? };
    let points = scan_grid(&cfg, 0)?;

    // rows: delta_s/E_W from top to bottom; columns: chi N/E_W left to right
    println!("dynamical | analytic   ('.' I, 'o' II, '#' III)");
    for j in (0..steps).rev() {
        let row: Vec<_> = (0..steps).map(|i| &points[i * steps + j]).collect();
        let dyn_row: String = row.iter().map(|p| glyph(p.label)).collect();
        let ana_row: String = row.iter().map(|p| glyph(p.analytic)).collect();
        println!("{:4.2} {dyn_row} | {ana_row}", row[0].delta_ratio);
    }
    let (agree, off) = agreement(&points);
    println!("agreement off the boundaries: {agree}/{off}");
    Ok(())
}

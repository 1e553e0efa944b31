//! Phase-II quench with and without axial motion.
//!
//! Usage: `cargo run --release --example motion -- [trap_khz] [n_atoms] [t_end_us]`

use std::f64::consts::{PI, TAU};

use bcs_quench::analysis;
use bcs_quench::dynamics::{Trajectory, STABILITY_LIMIT};
use bcs_quench::model::{build_dispersion, mhz_to_rad, CouplingProfile, DispersionSpec, ModelParams};
use bcs_quench::motion::{self, MotionParams};

fn run(mp: &MotionParams, n: usize, t_end: f64) -> bcs_quench::Result<Trajectory> {
    let couplings = CouplingProfile {
        kind: mp.site,
        zeta: mp.site_phases(n).into_iter().map(f64::cos).collect(),
        n_eff: n as f64 / 2.0,
    };
    let dispersion = build_dispersion(&DispersionSpec::uniform(mhz_to_rad(0.83)), n)?;
    let mut params = ModelParams::ideal(mhz_to_rad(1.29), couplings, dispersion);
    params.gamma_mo = mp.gamma_mo;
    let levels = motion::thermal_sample(mp, n, 10);
    let state = motion::prepare_motional_state(&params, mp, &levels, 0.586 * PI, 0.0)?;
    let dt = 0.8 * STABILITY_LIMIT / params.frequency_scale().max(2.0 * mp.omega_t);
    motion::evolve_motion(&state, &params, mp, dt, t_end)
}

/// The strongest local maxima of the detrended `|Delta|` spectrum below 3 MHz.
fn peaks(traj: &Trajectory, t1: f64, t2: f64) -> bcs_quench::Result<Vec<(f64, f64)>> {
    let spec = analysis::spectrum(traj, t1, t2, 2)?;
    let (f, p) = (&spec.frequencies, &spec.power);
    let mut local: Vec<(f64, f64)> = (1..f.len() - 1)
        .filter(|&k| f[k] < 3e6 && p[k] > p[k - 1] && p[k] > p[k + 1])
        .map(|k| (f[k], p[k]))
        .collect();
    local.sort_by(|a, b| b.1.total_cmp(&a.1));
    local.truncate(5);
    Ok(local)
}

fn main() -> bcs_quench::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let trap_khz = args.first().copied().unwrap_or(165.0);
    let n = args.get(1).map(|v| *v as usize).unwrap_or(400);
    let t_end = args.get(2).copied().unwrap_or(40.0) * 1e-6;

    let mut exp = MotionParams::experiment();
    exp.omega_t = TAU * trap_khz * 1e3;
    exp.nbar = motion::nbar_from_temperature(15e-6, exp.omega_t);
    exp.n_max = motion::default_n_max(exp.nbar);
    let still = MotionParams { eta: 0.0, gamma_mo: 0.0, ..exp.clone() };
    println!("trap {trap_khz} kHz, nbar {:.3}, n_max {}, {n} atoms", exp.nbar, exp.n_max);

    for (name, mp) in [("with motion", &exp), ("without motion", &still)] {
        let traj = run(mp, n, t_end)?;
        let m = analysis::window_metrics(&traj, t_end * 0.5, t_end * 0.99)?;
        println!("{name}: late avg {:.4}", m.avg);
        for (f, p) in peaks(&traj, 2e-6, t_end * 0.99)? {
            println!("  peak {:8.1} kHz  power {p:.3e}", f / 1e3);
        }
    }
    Ok(())
}

//! Higgs scaling: oscillation frequency against twice the long-time gap for
//! a sweep of the initial phase spread phi0.
//!
//! Run with: cargo run --release --example higgs

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use bcs_quench::analysis::{higgs_regression, phase_metrics, window_metrics};
use bcs_quench::dynamics::{evolve, QuenchSchedule};
use bcs_quench::model::{build_dispersion, mhz_to_rad, prepare_initial_state, CouplingProfile, DispersionSpec, ModelParams};

fn main() -> bcs_quench::Result<()> {
    let n = 2000;
    let couplings = CouplingProfile::homogeneous(n);
    let dispersion = build_dispersion(&DispersionSpec::uniform(mhz_to_rad(0.83)), n)?;
    let params = ModelParams::ideal(mhz_to_rad(1.2), couplings, dispersion);
    let mut points = Vec::new();
    println!("phi0/pi  f_osc (MHz)  2 Delta_inf/2pi (MHz)");
    for k in 1..=5 {
        let phi0 = 0.2 * PI * k as f64;
        let state = prepare_initial_state(&params.couplings, FRAC_PI_2, phi0, &params.dispersion)?;
        let traj = evolve(&state, &params, &QuenchSchedule::none(), 2e-9, 20e-6)?;
        let early = phase_metrics(&traj, 0.0, 5e-6, 2)?;
        let late = window_metrics(&traj, 16e-6, 20e-6)?;
        let omega = TAU * early.osc_freq.unwrap_or(f64::NAN);
        let delta_inf = late.avg * traj.delta_init;
        println!("{:7.1}  {:11.4}  {:.4}", phi0 / PI, omega / TAU / 1e6, 2.0 * delta_inf / TAU / 1e6);
        points.push((omega, delta_inf));
    }
    let fit = higgs_regression(&points)?;
    println!("omega_osc = ({:.3} +- {:.3}) x 2 Delta_inf + {:.3e} rad/s", fit.slope, fit.slope_err, fit.intercept);
    Ok(())
}

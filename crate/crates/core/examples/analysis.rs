//! Trajectory analysis on synthetic and simulated traces: windowed metrics,
//! the detrended spectrum and the 1/e decay time of phase I.
//!
//! Run with: cargo run --release --example analysis

use std::f64::consts::{FRAC_PI_2, TAU};

use bcs_quench::analysis::{decay_time, oscillation_peak, phase_metrics, spectrum_of};
use bcs_quench::dynamics::{evolve, QuenchSchedule};
use bcs_quench::model::{build_dispersion, prepare_initial_state, CouplingProfile, DispersionSpec, ModelParams};

fn main() -> bcs_quench::Result<()> {
    // a damped 1.3 Hz tone on a slow drift
    let dt = 0.01;
    let trace: Vec<f64> = (0..4000)
        .map(|i| {
            let t = i as f64 * dt;
            0.6 + 0.01 * t + 0.2 * (-t / 15.0).exp() * (TAU * 1.3 * t).cos()
        })
        .collect();
    let spec = spectrum_of(&trace, dt, 1)?;
    let peak = oscillation_peak(&spec, 0.1);
    println!("synthetic tone: peak at {:.4} Hz, amplitude {:.4}", peak.freq.unwrap_or(f64::NAN), peak.amplitude);

    // phase I at chi = 0: coherence decays like a sinc of the band width
    let n = 4000;
    let e_w = 1.0;
    let couplings = CouplingProfile::homogeneous(n);
    let dispersion = build_dispersion(&DispersionSpec::uniform(e_w), n)?;
    let state = prepare_initial_state(&couplings, FRAC_PI_2, 0.0, &dispersion)?;
    let params = ModelParams::ideal(0.0, couplings, dispersion);
    let traj = evolve(&state, &params, &QuenchSchedule::none(), 1e-3, 60.0)?;
    let fit = decay_time(&traj, 0.0, TAU / e_w)?;
    println!("chi = 0: 1/e time x E_W/2pi = {:.3}", fit.one_over_e * e_w / TAU);
    let m = phase_metrics(&traj, 20.0, 60.0, 2)?;
    println!("chi = 0 late window: avg {:.4}, std {:.4}, osc_amp {:.4}", m.avg, m.std, m.osc_amp);
    Ok(())
}

//! Single quench into phase II at the standard operating point
//! (E_W/2pi = 0.83 MHz, chi N/2pi = 1.2 MHz), ideal and with dissipation.
//!
//! Run with: cargo run --release --example quench

use std::f64::consts::PI;

use bcs_quench::analysis;
use bcs_quench::dynamics::{evolve, QuenchSchedule};
use bcs_quench::model::{
    build_dispersion, mhz_to_rad, prepare_initial_state, sample_couplings, CouplingKind, DispersionSpec, ModelParams,
};

fn main() -> bcs_quench::Result<()> {
    let n = 2000;
    let couplings = sample_couplings(CouplingKind::RandomCos, n, 1);
    let dispersion = build_dispersion(&DispersionSpec::uniform(mhz_to_rad(0.83)), n)?;
    let state = prepare_initial_state(&couplings, 0.586 * PI, 0.0, &dispersion)?;
    let ideal = ModelParams::ideal(mhz_to_rad(1.2), couplings, dispersion);

    // superradiant loss and elastic dephasing of the same order as in the experiment
    let mut lossy = ideal.clone();
    lossy.big_gamma = mhz_to_rad(0.05) / lossy.couplings.n_eff;
    lossy.gamma_el = mhz_to_rad(0.004);

    let dt = 2e-9;
    for (name, params) in [("ideal", &ideal), ("dissipative", &lossy)] {
        let traj = evolve(&state, params, &QuenchSchedule::none(), dt, 10e-6)?;
        let m = analysis::phase_metrics(&traj, 3e-6, 8e-6, 2)?;
        println!("{name}: Delta_init/2pi = {:.3} MHz", traj.delta_init / (2.0 * PI) / 1e6);
        println!("  late avg {:.4}  std {:.4}  osc_amp {:.4}", m.avg, m.std, m.osc_amp);
        println!("  t_us   |Delta|/Delta_init");
        // every 0.2 us over the first 4 us, where the Higgs transient lives
        for k in (0..=20).map(|k| k * 100) {
            println!("  {:5.2}  {:.4}", traj.times[k] * 1e6, traj.norm_delta[k]);
        }
    }
    Ok(())
}

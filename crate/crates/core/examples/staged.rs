//! Two-stage protocol: start in a bimodal band, then switch to a continuous
//! band at the first minimum of |Delta|, keeping each atom's energy rank.
//!
//! Run with: cargo run --release --example staged

use std::f64::consts::PI;

use bcs_quench::dynamics::{staged_quench, QuenchSchedule};
use bcs_quench::model::{
    build_dispersion, mhz_to_rad, prepare_initial_state, sample_couplings, CouplingKind, DispersionSpec, ModelParams,
};

fn main() -> bcs_quench::Result<()> {
    let n = 2000;
    let couplings = sample_couplings(CouplingKind::RandomCos, n, 2);
    let dispersion = build_dispersion(&DispersionSpec::bimodal(mhz_to_rad(2.0), mhz_to_rad(0.3)), n)?;
    let state = prepare_initial_state(&couplings, 0.586 * PI, 0.0, &dispersion)?;
    let params = ModelParams::ideal(mhz_to_rad(1.2), couplings, dispersion);
    let schedule = QuenchSchedule::bimodal_to_continuous(mhz_to_rad(0.83));

    let traj = staged_quench(&state, &params, &schedule, 2e-9, 8e-6)?;
    for (stage, t) in &traj.switches {
        println!("stage {stage} switched at t = {:.3} us", t * 1e6);
    }
    let e = &traj.final_params.dispersion;
    let (lo, hi) = e.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    println!("final band [{:.3}, {:.3}] MHz", lo / (2.0 * PI) / 1e6, hi / (2.0 * PI) / 1e6);
    for k in (0..=16).map(|k| (k * traj.times.len() / 16).min(traj.times.len() - 1)) {
        println!("{:5.2} us  {:.4}", traj.times[k] * 1e6, traj.norm_delta[k]);
    }
    Ok(())
}

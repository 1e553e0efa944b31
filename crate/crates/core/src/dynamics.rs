//! Mean-field time evolution with dissipation.
//!
//! Each spin obeys `dS_k/dt = b_k x S_k + damping`, with effective field
//!
//! ```text
//! b_k = ( 2 chi zeta_k A - Gamma zeta_k B,
//!         2 chi zeta_k B + Gamma zeta_k A,
//!         eps_k )
//! A = sum_j zeta_j Sx_j,   B = sum_j zeta_j Sy_j
//! ```
//!
//! The `chi` part is the Heisenberg flow of
//! `H = chi sum_jk zeta_j zeta_k S_j^+ S_k^- + sum_k eps_k S_k^z`. The `Gamma`
//! part is the collective jump `sqrt(Gamma) sum_k zeta_k S_k^-` after the
//! factorization `<S_j^a S_k^b> -> <S_j^a><S_k^b>`: it contributes
//! `Gamma zeta_k Sz_k (A, B)` to `(dSx, dSy)` and `-Gamma zeta_k (A Sx_k + B Sy_k)`
//! to `dSz`, which is again a rotation and conserves each Bloch norm. The
//! `j = k` self terms dropped by the factorization are `O(1/N)`.
//!
//! Single-particle channels damp the Bloch vector:
//! spontaneous emission `sqrt(gamma) S_k^-` gives `-gamma/2` on `Sx, Sy` and
//! `-gamma (Sz + 1/2)` on `Sz`; elastic dephasing `sqrt(2 gamma_el) S_k^z`
//! gives `-gamma_el` on `Sx, Sy`.
//!
//! Collective quantities enter only through `A` and `B`, so one evaluation
//! costs `O(N)`.

use crate::error::{Error, Result};
use crate::model::{build_dispersion, collective_coherence, CouplingProfile, DispersionSpec, ModelParams, SpinEnsembleState, C64};

/// Largest allowed `dt * frequency_scale`.
pub const STABILITY_LIMIT: f64 = 0.05;

/// Debounce for the first-minimum trigger: consecutive decreasing samples
/// required before a minimum may fire.
pub const MINIMUM_DEBOUNCE: usize = 3;

/// Right-hand side of a first-order system on a flat `f64` state.
pub trait OdeSystem {
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

/// Classical fixed-step fourth-order Runge-Kutta with reusable buffers.
#[derive(Clone, Debug)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self { k1: vec![0.0; dim], k2: vec![0.0; dim], k3: vec![0.0; dim], k4: vec![0.0; dim], tmp: vec![0.0; dim] }
    }

    pub fn step<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, dt: f64, y: &mut [f64]) {
        let h2 = 0.5 * dt;
        sys.rhs(t, y, &mut self.k1);
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *t = y + h2 * k;
        }
        sys.rhs(t + h2, &self.tmp, &mut self.k2);
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *t = y + h2 * k;
        }
        sys.rhs(t + h2, &self.tmp, &mut self.k3);
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *t = y + dt * k;
        }
        sys.rhs(t + dt, &self.tmp, &mut self.k4);
        let h6 = dt / 6.0;
        for i in 0..y.len() {
            y[i] += h6 * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

/// The mean-field spin system for one parameter set.
pub struct MeanField<'a> {
    pub params: &'a ModelParams,
}

impl OdeSystem for MeanField<'_> {
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let p = self.params;
        let zeta = &p.couplings.zeta;
        let (mut a, mut b) = (0.0, 0.0);
        for (s, z) in y.chunks_exact(3).zip(zeta) {
            a += z * s[0];
            b += z * s[1];
        }
        let transverse = 0.5 * p.gamma + p.gamma_el;
        for ((s, d), (z, eps)) in y.chunks_exact(3).zip(dy.chunks_exact_mut(3)).zip(zeta.iter().zip(&p.dispersion)) {
            let bx = z * (2.0 * p.chi * a - p.big_gamma * b);
            let by = z * (2.0 * p.chi * b + p.big_gamma * a);
            let bz = *eps;
            d[0] = by * s[2] - bz * s[1] - transverse * s[0];
            d[1] = bz * s[0] - bx * s[2] - transverse * s[1];
            d[2] = bx * s[1] - by * s[0] - p.gamma * (s[2] + 0.5);
        }
    }
}

fn flatten(state: &SpinEnsembleState) -> Vec<f64> {
    state.bloch.iter().flat_map(|s| s.iter().copied()).collect()
}

fn unflatten(y: &[f64]) -> Vec<[f64; 3]> {
    y.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
}

/// Per-spin time derivatives of the Bloch vectors.
pub fn derivative(state: &SpinEnsembleState, params: &ModelParams) -> Vec<[f64; 3]> {
    let y = flatten(state);
    let mut dy = vec![0.0; y.len()];
    MeanField { params }.rhs(state.time, &y, &mut dy);
    unflatten(&dy)
}

/// Reference implementation summing the pair interaction explicitly, `O(N^2)`.
pub fn derivative_pairwise(state: &SpinEnsembleState, params: &ModelParams) -> Vec<[f64; 3]> {
    let zeta = &params.couplings.zeta;
    let transverse = 0.5 * params.gamma + params.gamma_el;
    state
        .bloch
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let (mut bx, mut by) = (0.0, 0.0);
            for (j, sj) in state.bloch.iter().enumerate() {
                let w = zeta[k] * zeta[j];
                bx += w * (2.0 * params.chi * sj[0] - params.big_gamma * sj[1]);
                by += w * (2.0 * params.chi * sj[1] + params.big_gamma * sj[0]);
            }
            let bz = params.dispersion[k];
            [
                by * s[2] - bz * s[1] - transverse * s[0],
                bz * s[0] - bx * s[2] - transverse * s[1],
                bx * s[1] - by * s[0] - params.gamma * (s[2] + 0.5),
            ]
        })
        .collect()
}

/// Dissipation rates that a schedule stage may replace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates {
    pub gamma: f64,
    pub big_gamma: f64,
    pub gamma_el: f64,
    pub gamma_mo: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Trigger {
    AtTime(f64),
    /// First local minimum of `|Delta|`.
    AtFirstMinimum,
}

/// One parameter change applied between integration steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Stage {
    pub trigger: Trigger,
    /// New dispersion, assigned to spins preserving their energy rank.
    pub dispersion: Option<DispersionSpec>,
    pub couplings: Option<CouplingProfile>,
    pub rates: Option<Rates>,
}

impl Stage {
    pub fn new(trigger: Trigger) -> Self {
        Self { trigger, dispersion: None, couplings: None, rates: None }
    }

    pub fn with_dispersion(mut self, spec: DispersionSpec) -> Self {
        self.dispersion = Some(spec);
        self
    }

    pub fn with_rates(mut self, rates: Rates) -> Self {
        self.rates = Some(rates);
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuenchSchedule {
    pub stages: Vec<Stage>,
}

impl QuenchSchedule {
    pub fn none() -> Self {
        Self::default()
    }

    /// Evolve under the initial (bimodal) dispersion until the first minimum
    /// of `|Delta|`, then switch to the continuous band `delta_s = e_w`.
    pub fn bimodal_to_continuous(e_w: f64) -> Self {
        Self { stages: vec![Stage::new(Trigger::AtFirstMinimum).with_dispersion(DispersionSpec::bimodal(e_w, e_w))] }
    }

    pub fn validate(&self) -> Result<()> {
        let minima = self.stages.iter().filter(|s| s.trigger == Trigger::AtFirstMinimum).count();
        if minima > 1 {
            return Err(Error::Schedule("at most one first-minimum trigger is allowed".into()));
        }
        let mut last = f64::NEG_INFINITY;
        for s in &self.stages {
            if let Trigger::AtTime(t) = s.trigger {
                if !(t > last) {
                    return Err(Error::Schedule(format!("stage times must increase strictly (got {t:e} after {last:e})")));
                }
                last = t;
            }
        }
        Ok(())
    }

    pub fn has_minimum_trigger(&self) -> bool {
        self.stages.iter().any(|s| s.trigger == Trigger::AtFirstMinimum)
    }
}

/// Reassign `new_values` to spins so that the energy ordering of `current` is kept.
pub fn rank_preserving_assign(current: &[f64], new_values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..current.len()).collect();
    order.sort_by(|&i, &j| current[i].total_cmp(&current[j]).then(i.cmp(&j)));
    let mut sorted = new_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = vec![0.0; current.len()];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = sorted[rank];
    }
    out
}

/// Time series of the order parameter.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `Delta_BCS` (rad/s).
    pub delta: Vec<C64>,
    /// `|sum zeta S^-(t)| / |sum zeta S^-(0)|`; equals `|Delta|/Delta_init`
    /// and stays defined when `chi = 0`.
    pub norm_delta: Vec<f64>,
    /// `|Delta_BCS(0)|` (rad/s).
    pub delta_init: f64,
    pub snapshots: Vec<SpinEnsembleState>,
    /// `(stage index, time)` of each applied stage.
    pub switches: Vec<(usize, f64)>,
    pub final_state: SpinEnsembleState,
    /// Parameters in force at the end of the run.
    pub final_params: ModelParams,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }

    pub fn abs_delta(&self) -> Vec<f64> {
        self.delta.iter().map(|d| d.norm()).collect()
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Samples of `norm_delta` with `t1 <= t <= t2` (with a small tolerance).
    pub fn window(&self, t1: f64, t2: f64) -> (&[f64], &[f64]) {
        let tol = 1e-9 * self.dt().max(f64::MIN_POSITIVE);
        let lo = self.times.partition_point(|&t| t < t1 - tol);
        let hi = self.times.partition_point(|&t| t <= t2 + tol);
        (&self.times[lo..hi], &self.norm_delta[lo..hi])
    }
}

#[derive(Clone, Debug, Default)]
pub struct EvolveOptions {
    /// Times at which to store full spin snapshots.
    pub snapshot_times: Vec<f64>,
}

pub(crate) fn check_step(dt: f64, scale: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt = {dt} must be positive")));
    }
    if dt * scale > STABILITY_LIMIT {
        return Err(Error::StepSize { dt, scale, suggested: STABILITY_LIMIT / scale });
    }
    Ok(())
}

/// Parameters in force after each stage, computed before integrating so that
/// every stage is checked against the step-size guard up front.
pub(crate) fn stage_params(params: &ModelParams, schedule: &QuenchSchedule) -> Result<Vec<ModelParams>> {
    let mut out = Vec::with_capacity(schedule.stages.len());
    let mut current = params.clone();
    for stage in &schedule.stages {
        let mut next = current.clone();
        if let Some(c) = &stage.couplings {
            next.couplings = c.clone();
            next.chi = current.chi * current.couplings.n_eff / c.n_eff;
        }
        if let Some(spec) = &stage.dispersion {
            let values = build_dispersion(spec, current.n_spins())?;
            next.dispersion = rank_preserving_assign(&current.dispersion, &values);
        }
        if let Some(r) = stage.rates {
            next.gamma = r.gamma;
            next.big_gamma = r.big_gamma;
            next.gamma_el = r.gamma_el;
            next.gamma_mo = r.gamma_mo;
        }
        next.validate()?;
        out.push(next.clone());
        current = next;
    }
    Ok(out)
}

/// Tracks the debounced first-minimum condition on a stream of `|Delta|`.
#[derive(Clone, Debug, Default)]
pub(crate) struct MinimumDetector {
    prev: Option<f64>,
    decreasing: usize,
}

impl MinimumDetector {
    /// Feed the next sample; returns true when the previous sample was a
    /// local minimum preceded by at least `MINIMUM_DEBOUNCE` decreases.
    pub(crate) fn push(&mut self, value: f64) -> bool {
        let fired = match self.prev {
            Some(p) if value > p => self.decreasing >= MINIMUM_DEBOUNCE,
            _ => false,
        };
        match self.prev {
            Some(p) if value < p => self.decreasing += 1,
            Some(_) => self.decreasing = 0,
            None => {}
        }
        self.prev = Some(value);
        fired
    }
}

/// Fixed-step RK4 evolution from `initial` to `t_end`.
pub fn evolve(
    initial: &SpinEnsembleState,
    params: &ModelParams,
    schedule: &QuenchSchedule,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory> {
    evolve_with(initial, params, schedule, dt, t_end, &EvolveOptions::default())
}

pub fn evolve_with(
    initial: &SpinEnsembleState,
    params: &ModelParams,
    schedule: &QuenchSchedule,
    dt: f64,
    t_end: f64,
    options: &EvolveOptions,
) -> Result<Trajectory> {
    params.validate()?;
    if initial.n_spins() != params.n_spins() {
        return Err(Error::Size { expected: params.n_spins(), got: initial.n_spins() });
    }
    schedule.validate()?;
    if !(t_end >= 0.0) {
        return Err(Error::Domain("t_end must be nonnegative".into()));
    }
    let staged = stage_params(params, schedule)?;
    for p in std::iter::once(params).chain(staged.iter()) {
        check_step(dt, p.frequency_scale())?;
    }

    let n_steps = (t_end / dt).round() as usize;
    let t0 = initial.time;
    let mut current = params.clone();
    let mut y = flatten(initial);
    let mut rk = Rk4::new(y.len());

    let coherence = |y: &[f64], zeta: &[f64]| -> C64 {
        let (a, b) = y.chunks_exact(3).zip(zeta).fold((0.0, 0.0), |(a, b), (s, z)| (a + z * s[0], b + z * s[1]));
        C64::new(a, -b)
    };
    let c0 = collective_coherence(initial, &params.couplings.zeta).norm();
    let norm_of = |c: C64| if c0 > 0.0 { c.norm() / c0 } else { 0.0 };

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut delta = Vec::with_capacity(n_steps + 1);
    let mut norm_delta = Vec::with_capacity(n_steps + 1);
    let mut snapshots = Vec::new();
    let mut pending_snaps: Vec<f64> = options.snapshot_times.clone();
    pending_snaps.sort_by(f64::total_cmp);
    let mut snap_idx = 0;
    let mut switches = Vec::new();
    let mut next_stage = 0;
    let mut detector = MinimumDetector::default();

    let mut record = |step: usize, y: &[f64], p: &ModelParams, times: &mut Vec<f64>, delta: &mut Vec<C64>, norm_delta: &mut Vec<f64>| {
        let t = t0 + step as f64 * dt;
        let c = coherence(y, &p.couplings.zeta);
        times.push(t);
        delta.push(p.chi * c);
        norm_delta.push(norm_of(c));
        while snap_idx < pending_snaps.len() && pending_snaps[snap_idx] <= t + 0.5 * dt {
            snapshots.push(SpinEnsembleState { bloch: unflatten(y), levels: initial.levels.clone(), time: t });
            snap_idx += 1;
        }
        t
    };

    record(0, &y, &current, &mut times, &mut delta, &mut norm_delta);
    detector.push(norm_delta[0]);
    for step in 1..=n_steps {
        let t_prev = t0 + (step - 1) as f64 * dt;
        rk.step(&MeanField { params: &current }, t_prev, dt, &mut y);
        let t = record(step, &y, &current, &mut times, &mut delta, &mut norm_delta);
        let is_minimum = detector.push(*norm_delta.last().unwrap());

        if next_stage < schedule.stages.len() {
            let fire = match schedule.stages[next_stage].trigger {
                Trigger::AtTime(ts) => t >= ts - 0.5 * dt,
                Trigger::AtFirstMinimum => is_minimum,
            };
            if fire {
                current = staged[next_stage].clone();
                switches.push((next_stage, t));
                next_stage += 1;
            }
        }
    }

    let final_time = t0 + n_steps as f64 * dt;
    Ok(Trajectory {
        times,
        delta,
        norm_delta,
        delta_init: params.chi * c0,
        snapshots,
        switches,
        final_state: SpinEnsembleState { bloch: unflatten(&y), levels: initial.levels.clone(), time: final_time },
        final_params: current,
    })
}

/// Evolve with a schedule that must contain the first-minimum trigger;
/// errors if the minimum never fires before `t_end`.
pub fn staged_quench(
    initial: &SpinEnsembleState,
    params: &ModelParams,
    protocol: &QuenchSchedule,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory> {
    if !protocol.has_minimum_trigger() {
        return Err(Error::Schedule("staged quench needs a first-minimum trigger".into()));
    }
    let traj = evolve(initial, params, protocol, dt, t_end)?;
    let min_stage = protocol.stages.iter().position(|s| s.trigger == Trigger::AtFirstMinimum).unwrap();
    if !traj.switches.iter().any(|(i, _)| *i == min_stage) {
        return Err(Error::TriggerTimeout(t_end));
    }
    Ok(traj)
}

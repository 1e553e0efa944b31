//! Spin dynamics with axial motion.
//!
//! Each atom carries a density matrix over the states `|n, sigma>` for `n` in a
//! window `n0 - k ..= n0 + k` around its thermal level `n0` (clipped to
//! `[0, n_max]`). Atoms couple through
//!
//! ```text
//! D = sum_j sum_pq zeta_j^{pq} <|p down><q up|>_j,     Delta = chi D
//! h_j = sum_n n omega_T P_n + eps_j P_up
//!       + (chi + i Gamma/2) conj(D) J_j^- + (chi - i Gamma/2) D J_j^+
//! J_j^- = sum_pq zeta_j^{pq} |p down><q up|
//! ```
//!
//! with jump operators `sqrt(gamma) |n down><n up|` for each `n`,
//! `sqrt(gamma_el) P_sigma` and `sqrt(gamma_mo) P_n`. Couplings with
//! `|n - m| > k` are dropped.
//!
//! For `eta = 0` and every atom in `n = 0` this is the motionless model with
//! `zeta_j = cos(j phi)`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{check_step, OdeSystem, Rk4, Trajectory};
use crate::error::{Error, Result};
use crate::model::{incommensurate_phase, site_phases, CouplingKind, ModelParams, SpinEnsembleState, C64};
use crate::specfun::{laguerre, ln_factorial};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;

/// Default motional dephasing, `2 pi x 15 kHz`.
pub const GAMMA_MO_DEFAULT: f64 = TAU * 15e3;
/// Constant elastic dephasing for runs without an AC-Stark-shift model, `2 pi x 0.5 kHz`.
pub const GAMMA_EL_CONSTANT: f64 = TAU * 0.5e3;

/// Elastic dephasing from the AC Stark shift `f_ac` (Hz): `2 pi (0.0036 f_ac + 4 kHz)`.
pub fn gamma_el_from_ac_shift(f_ac_hz: f64) -> f64 {
    TAU * (0.0036 * f_ac_hz + 4e3)
}

/// Mean occupation of a harmonic mode at temperature `t_kelvin`.
pub fn nbar_from_temperature(t_kelvin: f64, omega_t: f64) -> f64 {
    if t_kelvin <= 0.0 {
        return 0.0;
    }
    1.0 / ((HBAR * omega_t / (K_B * t_kelvin)).exp() - 1.0)
}

/// Smallest `n` whose cumulative thermal weight reaches 0.999 (at least 1).
pub fn default_n_max(nbar: f64) -> u32 {
    if nbar <= 0.0 {
        return 1;
    }
    let q = nbar / (1.0 + nbar);
    // 1 - q^(n+1) >= 0.999
    let n = ((1e-3f64).ln() / q.ln() - 1.0).ceil().max(1.0);
    n as u32
}

#[derive(Clone, Debug, PartialEq)]
pub struct MotionParams {
    /// Axial trap frequency (rad/s).
    pub omega_t: f64,
    /// Lamb-Dicke parameter.
    pub eta: f64,
    pub nbar: f64,
    pub n_max: u32,
    /// Incommensurate phase step.
    pub phi: f64,
    /// Motional dephasing rate (rad/s).
    pub gamma_mo: f64,
    /// Largest `|n - m|` kept in the coupling (1 or 2).
    pub order: u32,
    /// Site factor: `Incommensurate` (`cos(j phi)`) or `RandomCos`.
    pub site: CouplingKind,
    pub seed: u64,
}

impl MotionParams {
    /// `eta = 0.17`, `omega_T = 2 pi x 165 kHz`, 15 uK, `gamma_mo = 2 pi x 15 kHz`.
    pub fn experiment() -> Self {
        let omega_t = TAU * 165e3;
        let nbar = nbar_from_temperature(15e-6, omega_t);
        Self {
            omega_t,
            eta: 0.17,
            nbar,
            n_max: default_n_max(nbar),
            phi: incommensurate_phase(),
            gamma_mo: GAMMA_MO_DEFAULT,
            order: 1,
            site: CouplingKind::Incommensurate,
            seed: 0,
        }
    }

    /// Motion switched off: `eta = 0`, ground state only, no dephasing.
    pub fn frozen(omega_t: f64) -> Self {
        Self {
            omega_t,
            eta: 0.0,
            nbar: 0.0,
            n_max: 1,
            phi: incommensurate_phase(),
            gamma_mo: 0.0,
            order: 1,
            site: CouplingKind::Incommensurate,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.eta) {
            return Err(Error::Domain(format!("eta = {} outside [0, 1)", self.eta)));
        }
        if self.n_max < 1 || !(self.nbar >= 0.0) || !self.nbar.is_finite() {
            return Err(Error::Domain("need n_max >= 1 and finite nbar >= 0".into()));
        }
        if !(1..=2).contains(&self.order) {
            return Err(Error::Domain(format!("coupling order {} not in {{1, 2}}", self.order)));
        }
        if !(self.omega_t >= 0.0 && self.gamma_mo >= 0.0) {
            return Err(Error::Domain("omega_t and gamma_mo must be nonnegative".into()));
        }
        if self.site == CouplingKind::Homogeneous {
            return Err(Error::Domain("motional site factor must be incommensurate or random_cos".into()));
        }
        Ok(())
    }

    /// Site phases `x_j` with `zeta_j^{nn} -> cos x_j` as `eta -> 0`.
    pub fn site_phases(&self, n_atoms: usize) -> Vec<f64> {
        match self.site {
            CouplingKind::Incommensurate => (0..n_atoms).map(|j| j as f64 * self.phi).collect(),
            kind => site_phases(kind, n_atoms, self.seed),
        }
    }
}

/// `(i eta)^s e^{-eta^2/2} sqrt(n_<!/n_>!) L^s_{n_<}(eta^2)`, the motional
/// matrix element of `e^{i eta (a + a^dag)}`.
pub fn lamb_dicke_factor(n: u32, m: u32, eta: f64) -> C64 {
    let (lo, hi) = (n.min(m), n.max(m));
    let s = hi - lo;
    if s > 0 && eta == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let x = eta * eta;
    let ln_mag = if s > 0 { s as f64 * eta.ln() } else { 0.0 } - 0.5 * x
        + 0.5 * (ln_factorial(lo) - ln_factorial(hi));
    let mag = ln_mag.exp() * laguerre(lo, s, x);
    match s % 4 {
        0 => C64::new(mag, 0.0),
        1 => C64::new(0.0, mag),
        2 => C64::new(-mag, 0.0),
        _ => C64::new(0.0, -mag),
    }
}

/// Real coupling `zeta^{nm}` for an atom with site phase `x`:
/// `cos(x) Re[f] - sin(x) Im[f]` with `f = lamb_dicke_factor(n, m, eta)`.
pub fn lamb_dicke_with_phase(x: f64, n: u32, m: u32, eta: f64) -> f64 {
    let f = lamb_dicke_factor(n, m, eta);
    x.cos() * f.re - x.sin() * f.im
}

/// `zeta_j^{nm}` at site `j` with the incommensurate site factor.
pub fn lamb_dicke_element(j: usize, n: u32, m: u32, p: &MotionParams) -> Result<f64> {
    if n > p.n_max || m > p.n_max {
        return Err(Error::Domain(format!("levels ({n}, {m}) exceed n_max = {}", p.n_max)));
    }
    Ok(lamb_dicke_with_phase(j as f64 * p.phi, n, m, p.eta))
}

/// Thermal level of each atom, `P(n) ~ q^n` with `q = nbar/(1 + nbar)`,
/// truncated to `n <= n_max` by redrawing.
pub fn thermal_sample(p: &MotionParams, n_atoms: usize, seed: u64) -> Vec<u32> {
    if p.nbar <= 0.0 {
        return vec![0; n_atoms];
    }
    let q = p.nbar / (1.0 + p.nbar);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_atoms)
        .map(|_| loop {
            let u: f64 = 1.0 - rng.random::<f64>();
            let n = (u.ln() / q.ln()).floor() as u64;
            if n <= p.n_max as u64 {
                break n as u32;
            }
        })
        .collect()
}

/// Level-resolved mean-field state of all atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct MotionalSpinState {
    /// Thermal level of each atom.
    pub levels: Vec<u32>,
    /// Site phase of each atom.
    pub site_phase: Vec<f64>,
    /// Half-width `k` of the level window.
    pub order: u32,
    /// Row-major density matrices, `dim x dim` per atom; basis index
    /// `sigma * (2k+1) + l` with `sigma = 0` up, `1` down, level `n0 - k + l`.
    pub rho: Vec<C64>,
    pub time: f64,
}

impl MotionalSpinState {
    pub fn n_atoms(&self) -> usize {
        self.levels.len()
    }

    pub fn window(&self) -> usize {
        2 * self.order as usize + 1
    }

    pub fn dim(&self) -> usize {
        2 * self.window()
    }

    pub fn atom(&self, j: usize) -> &[C64] {
        let d2 = self.dim() * self.dim();
        &self.rho[j * d2..(j + 1) * d2]
    }

    /// Bloch vector of atom `j` summed over motional levels.
    pub fn bloch(&self, j: usize) -> [f64; 3] {
        let (w, d) = (self.window(), self.dim());
        let r = self.atom(j);
        let (mut coh, mut pu, mut pd) = (C64::new(0.0, 0.0), 0.0, 0.0);
        for l in 0..w {
            coh += r[l * d + w + l];
            pu += r[l * d + l].re;
            pd += r[(w + l) * d + w + l].re;
        }
        [coh.re, -coh.im, 0.5 * (pu - pd)]
    }

    /// Largest violation of `0 <= rho_ii <= 1` and `|rho_ij|^2 <= rho_ii rho_jj`.
    pub fn positivity_violation(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..self.n_atoms() {
            let r = self.atom(j);
            for a in 0..d {
                let paa = r[a * d + a].re;
                worst = worst.max(-paa).max(paa - 1.0);
                for b in 0..d {
                    let pbb = r[b * d + b].re;
                    worst = worst.max(r[a * d + b].norm_sqr() - paa.max(0.0) * pbb.max(0.0));
                }
            }
        }
        worst
    }

    pub fn to_ensemble(&self) -> SpinEnsembleState {
        SpinEnsembleState {
            bloch: (0..self.n_atoms()).map(|j| self.bloch(j)).collect(),
            levels: Some(self.levels.clone()),
            time: self.time,
        }
    }
}

/// Per-atom static data: window levels and couplings.
struct AtomTables {
    window: usize,
    /// `valid[j * w + l]`: level `n0 - k + l` lies in `[0, n_max]`.
    valid: Vec<bool>,
    /// `zeta[j * w * w + p * w + q]` between window levels `p`, `q`.
    zeta: Vec<f64>,
    /// `energy[j * 2w + i]` diagonal of the bare Hamiltonian.
    energy: Vec<f64>,
}

fn build_tables(levels: &[u32], site_phase: &[f64], order: u32, eps: &[f64], p: &MotionParams) -> AtomTables {
    let k = order as i64;
    let w = 2 * order as usize + 1;
    let n = levels.len();
    let mut valid = vec![false; n * w];
    let mut zeta = vec![0.0; n * w * w];
    let mut energy = vec![0.0; n * 2 * w];
    for j in 0..n {
        let level = |l: usize| levels[j] as i64 - k + l as i64;
        for l in 0..w {
            let lv = level(l);
            valid[j * w + l] = lv >= 0 && lv <= p.n_max as i64;
        }
        for a in 0..w {
            for b in 0..w {
                if valid[j * w + a] && valid[j * w + b] && (a as i64 - b as i64).abs() <= k {
                    zeta[j * w * w + a * w + b] =
                        lamb_dicke_with_phase(site_phase[j], level(a) as u32, level(b) as u32, p.eta);
                }
            }
        }
        for l in 0..w {
            if valid[j * w + l] {
                let e = level(l) as f64 * p.omega_t;
                energy[j * 2 * w + l] = e + eps[j];
                energy[j * 2 * w + w + l] = e;
            }
        }
    }
    AtomTables { window: w, valid, zeta, energy }
}

struct MotionSystem<'a, const W: usize, const D: usize> {
    tables: &'a AtomTables,
    chi: f64,
    big_gamma: f64,
    gamma: f64,
    gamma_el: f64,
    gamma_mo: f64,
}

fn load<const D: usize>(y: &[f64]) -> [[C64; D]; D] {
    let mut m = [[C64::new(0.0, 0.0); D]; D];
    for (a, row) in m.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            let i = 2 * (a * D + b);
            *v = C64::new(y[i], y[i + 1]);
        }
    }
    m
}

impl<const W: usize, const D: usize> MotionSystem<'_, W, D> {
    fn collective(&self, y: &[f64]) -> C64 {
        let stride = 2 * D * D;
        let mut total = C64::new(0.0, 0.0);
        for (j, atom) in y.chunks_exact(stride).enumerate() {
            let z = &self.tables.zeta[j * W * W..(j + 1) * W * W];
            for p in 0..W {
                for q in 0..W {
                    let zpq = z[p * W + q];
                    if zpq != 0.0 {
                        // <|p down><q up|> = rho[q up][p down]
                        let i = 2 * (q * D + W + p);
                        total += zpq * C64::new(atom[i], atom[i + 1]);
                    }
                }
            }
        }
        total
    }
}

impl<const W: usize, const D: usize> OdeSystem for MotionSystem<'_, W, D> {
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let big_d = self.collective(y);
        let a = C64::new(self.chi, 0.5 * self.big_gamma) * big_d.conj();
        let ac = a.conj();
        let stride = 2 * D * D;
        for (j, (atom, out)) in y.chunks_exact(stride).zip(dy.chunks_exact_mut(stride)).enumerate() {
            let z = &self.tables.zeta[j * W * W..(j + 1) * W * W];
            let e = &self.tables.energy[j * D..(j + 1) * D];
            let rho = load::<D>(atom);
            // h = diag(e) + off-diagonal blocks h[down p][up q] = a z_pq, h[up q][down p] = conj(a) z_pq
            let mut h = [[C64::new(0.0, 0.0); D]; D];
            for i in 0..D {
                h[i][i] = C64::new(e[i], 0.0);
            }
            for p in 0..W {
                for q in 0..W {
                    let zpq = z[p * W + q];
                    if zpq != 0.0 {
                        h[W + p][q] = a * zpq;
                        h[q][W + p] = ac * zpq;
                    }
                }
            }
            for r in 0..D {
                let (sr, lr) = (r / W, r % W);
                for c in 0..D {
                    let (sc, lc) = (c / W, c % W);
                    let mut comm = C64::new(0.0, 0.0);
                    for k in 0..D {
                        comm += h[r][k] * rho[k][c] - rho[r][k] * h[k][c];
                    }
                    // -i [h, rho]
                    let mut v = C64::new(comm.im, -comm.re);
                    let mut damp = 0.0;
                    if sr != sc {
                        damp += self.gamma_el;
                    }
                    if lr != lc {
                        damp += self.gamma_mo;
                    }
                    damp += 0.5 * self.gamma * ((sr == 0) as u8 + (sc == 0) as u8) as f64;
                    v -= damp * rho[r][c];
                    if sr == 1 && sc == 1 && lr == lc {
                        v += self.gamma * rho[lr][lr];
                    }
                    let i = 2 * (r * D + c);
                    out[i] = v.re;
                    out[i + 1] = v.im;
                }
            }
        }
    }
}

/// Post-pulse motional state: each atom starts in `|n0, down>`, is rotated
/// by `exp(-i theta G)` with `G = i (J^+ - J^-)/2` and `theta = drive_area`,
/// then by `phi_j = phi0 (eps_j - eps_min)/(eps_max - eps_min)` about `z`.
pub fn prepare_motional_state(
    params: &ModelParams,
    motion: &MotionParams,
    levels: &[u32],
    drive_area: f64,
    phase_spread: f64,
) -> Result<MotionalSpinState> {
    motion.validate()?;
    let n = params.n_spins();
    if levels.len() != n {
        return Err(Error::Size { expected: n, got: levels.len() });
    }
    if let Some(l) = levels.iter().find(|&&l| l > motion.n_max) {
        return Err(Error::Domain(format!("level {l} exceeds n_max = {}", motion.n_max)));
    }
    let eps = &params.dispersion;
    let (lo, hi) = eps.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| (a.min(e), b.max(e)));
    if phase_spread > 0.0 && !(hi > lo) {
        return Err(Error::DegenerateSpread(phase_spread));
    }
    let site_phase = motion.site_phases(n);
    let tables = build_tables(levels, &site_phase, motion.order, eps, motion);
    let w = tables.window;
    let d = 2 * w;
    let k = motion.order as usize;
    let mut rho = Vec::with_capacity(n * d * d);
    for j in 0..n {
        let mut g = DMatrix::<C64>::zeros(d, d);
        for p in 0..w {
            for q in 0..w {
                let zpq = tables.zeta[j * w * w + p * w + q];
                // J^- [down p][up q] = z; G = i(J^+ - J^-)/2
                g[(w + p, q)] -= C64::new(0.0, 0.5 * zpq);
                g[(q, w + p)] += C64::new(0.0, 0.5 * zpq);
            }
        }
        let u = (g * C64::new(0.0, -drive_area)).exp();
        let phi = if phase_spread > 0.0 { phase_spread * (eps[j] - lo) / (hi - lo) } else { 0.0 };
        let start = w + k;
        debug_assert!(tables.valid[j * w + k]);
        for r in 0..d {
            let pr = if r < w { C64::from_polar(1.0, -phi) } else { C64::new(1.0, 0.0) };
            for c in 0..d {
                let pc = if c < w { C64::from_polar(1.0, phi) } else { C64::new(1.0, 0.0) };
                rho.push(pr * u[(r, start)] * u[(c, start)].conj() * pc);
            }
        }
    }
    Ok(MotionalSpinState { levels: levels.to_vec(), site_phase, order: motion.order, rho, time: 0.0 })
}

/// Largest frequency in the motional flow, for the step-size guard.
fn motion_scale(params: &ModelParams, motion: &MotionParams, tables: &AtomTables) -> f64 {
    let weight: f64 = {
        let w = tables.window;
        let k = motion.order as usize;
        (0..tables.valid.len() / w).map(|j| tables.zeta[j * w * w + k * w + k].powi(2)).sum()
    };
    let eps = params.dispersion.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    eps.max(params.chi * weight).max(params.big_gamma * weight).max(2.0 * motion.order as f64 * motion.omega_t)
}

/// Fixed-step RK4 evolution of the motional model.
pub fn evolve_motion(
    initial: &MotionalSpinState,
    params: &ModelParams,
    motion: &MotionParams,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory> {
    params.validate()?;
    motion.validate()?;
    if initial.order != motion.order {
        return Err(Error::Domain("state and motion parameters use different coupling orders".into()));
    }
    let n = initial.n_atoms();
    if n != params.n_spins() {
        return Err(Error::Size { expected: params.n_spins(), got: n });
    }
    let tables = build_tables(&initial.levels, &initial.site_phase, motion.order, &params.dispersion, motion);
    check_step(dt, motion_scale(params, motion, &tables))?;
    match motion.order {
        1 => run::<3, 6>(initial, params, motion, &tables, dt, t_end),
        _ => run::<5, 10>(initial, params, motion, &tables, dt, t_end),
    }
}

fn run<const W: usize, const D: usize>(
    initial: &MotionalSpinState,
    params: &ModelParams,
    motion: &MotionParams,
    tables: &AtomTables,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory> {
    let sys = MotionSystem::<W, D> {
        tables,
        chi: params.chi,
        big_gamma: params.big_gamma,
        gamma: params.gamma,
        gamma_el: params.gamma_el,
        gamma_mo: motion.gamma_mo,
    };
    let mut y: Vec<f64> = initial.rho.iter().flat_map(|c| [c.re, c.im]).collect();
    let mut rk = Rk4::new(y.len());
    let steps = (t_end / dt).round() as usize;
    let d0 = sys.collective(&y);
    let c0 = d0.norm();
    let mut times = Vec::with_capacity(steps + 1);
    let mut delta = Vec::with_capacity(steps + 1);
    let mut norm_delta = Vec::with_capacity(steps + 1);
    let mut state = initial.clone();
    let mut push = |t: f64, dd: C64| {
        times.push(t);
        delta.push(params.chi * dd);
        norm_delta.push(if c0 > 0.0 { dd.norm() / c0 } else { 0.0 });
    };
    push(initial.time, d0);
    for s in 1..=steps {
        let t = initial.time + s as f64 * dt;
        rk.step(&sys, t - dt, dt, &mut y);
        push(t, sys.collective(&y));
        if s % 100 == 0 || s == steps {
            for (c, v) in state.rho.iter_mut().zip(y.chunks_exact(2)) {
                *c = C64::new(v[0], v[1]);
            }
            let bad = state.positivity_violation();
            if bad > 1e-9 {
                return Err(Error::Domain(format!("density matrix lost positivity by {bad:e} at t = {t:e}")));
            }
        }
    }
    state.time = initial.time + steps as f64 * dt;
    Ok(Trajectory {
        times,
        delta,
        norm_delta,
        delta_init: params.chi * c0,
        snapshots: Vec::new(),
        switches: Vec::new(),
        final_state: state.to_ensemble(),
        final_params: params.clone(),
    })
}

//! Exact solution of two collective spins at energies `+-delta_s/2`.
//!
//! Both spins start along `x` with length `N/4`. Lengths here are measured in
//! units of `N`, so each spin has length `1/4` and `Delta = |S^-|` is the gap
//! in units of `chi N`.

use crate::dynamics::{OdeSystem, Rk4};
use crate::error::{Error, Result};
use crate::model::{CouplingProfile, ModelParams, SpinEnsembleState};
use crate::specfun::{elliptic_k, jacobi_dn_cn};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoSpinParams {
    pub chi_n: f64,
    pub delta_s: f64,
}

impl TwoSpinParams {
    pub fn new(chi_n: f64, delta_s: f64) -> Result<Self> {
        if !(chi_n > 0.0 && chi_n.is_finite()) || !(delta_s >= 0.0 && delta_s.is_finite()) {
            return Err(Error::Domain(format!("need chi_n > 0 and delta_s >= 0 (got {chi_n}, {delta_s})")));
        }
        Ok(Self { chi_n, delta_s })
    }

    pub fn ratio(&self) -> f64 {
        self.delta_s / self.chi_n
    }

    /// The fixed initial state: both spins along `x`.
    pub fn initial_state(&self) -> [[f64; 3]; 2] {
        [[0.25, 0.0, 0.0], [0.25, 0.0, 0.0]]
    }
}

/// Normalized gap `|Delta_BCS|/(chi N)` at time `t`.
pub fn two_spin_delta(t: f64, p: &TwoSpinParams) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::Domain("t must be nonnegative".into()));
    }
    let (c, d) = (p.chi_n, p.delta_s);
    if d == c {
        return Ok(0.5 / (0.5 * c * t).cosh());
    }
    if d < c {
        let (dn, _) = jacobi_dn_cn(0.5 * c * t, (d / c).powi(2))?;
        Ok(0.5 * dn)
    } else {
        let (_, cn) = jacobi_dn_cn(0.5 * d * t, (c / d).powi(2))?;
        Ok(0.5 * cn.abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoSpinFrequency {
    /// Angular frequency of `|Delta|` (rad/s); exactly zero at the dip.
    pub omega: f64,
    /// Set when `delta_s = chi N`, where the period diverges.
    pub dip: bool,
}

pub fn two_spin_frequency(p: &TwoSpinParams) -> Result<TwoSpinFrequency> {
    let (c, d) = (p.chi_n, p.delta_s);
    if d == c {
        return Ok(TwoSpinFrequency { omega: 0.0, dip: true });
    }
    let omega = if d < c {
        c * std::f64::consts::PI / (2.0 * elliptic_k((d / c).powi(2))?)
    } else {
        d * std::f64::consts::PI / (2.0 * elliptic_k((c / d).powi(2))?)
    };
    Ok(TwoSpinFrequency { omega, dip: false })
}

/// Effective potential with `(1/2)(dDelta/dt)^2 + V(Delta) = 0`.
pub fn two_spin_potential(delta: f64, p: &TwoSpinParams) -> Result<f64> {
    if !(0.0..=0.5).contains(&delta) {
        return Err(Error::Domain(format!("Delta = {delta} outside [0, 1/2]")));
    }
    let r = p.ratio();
    Ok(0.5 * p.chi_n * p.chi_n * (delta * delta - 0.25) * (delta * delta - 0.25 * (1.0 - r * r)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoSpinInvariants {
    pub sz_total: f64,
    /// `chi N S^+S^- + (delta_s/2)(Sz_1 - Sz_2)` with spins in units of `N`.
    pub energy: f64,
    pub len1: f64,
    pub len2: f64,
}

pub fn two_spin_conserved(state: &[[f64; 3]; 2], p: &TwoSpinParams) -> TwoSpinInvariants {
    let [s1, s2] = state;
    let a = s1[0] + s2[0];
    let b = s1[1] + s2[1];
    TwoSpinInvariants {
        sz_total: s1[2] + s2[2],
        energy: p.chi_n * (a * a + b * b) + 0.5 * p.delta_s * (s1[2] - s2[2]),
        len1: crate::model::norm3(s1),
        len2: crate::model::norm3(s2),
    }
}

/// Mean-field equations of the two collective spins.
pub struct TwoSpinSystem {
    pub params: TwoSpinParams,
}

impl OdeSystem for TwoSpinSystem {
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let c = self.params.chi_n;
        let (a, b) = (y[0] + y[3], y[1] + y[4]);
        let (bx, by) = (2.0 * c * a, 2.0 * c * b);
        for (k, eps) in [0.5 * self.params.delta_s, -0.5 * self.params.delta_s].into_iter().enumerate() {
            let s = &y[3 * k..3 * k + 3];
            let d = &mut dy[3 * k..3 * k + 3];
            d[0] = by * s[2] - eps * s[1];
            d[1] = eps * s[0] - bx * s[2];
            d[2] = bx * s[1] - by * s[0];
        }
    }
}

/// RK4 integration of the two-spin equations; returns `(times, Delta, final state)`.
pub fn integrate_two_spin(p: &TwoSpinParams, dt: f64, t_end: f64) -> (Vec<f64>, Vec<f64>, [[f64; 3]; 2]) {
    let sys = TwoSpinSystem { params: *p };
    let init = p.initial_state();
    let mut y = vec![init[0][0], init[0][1], init[0][2], init[1][0], init[1][1], init[1][2]];
    let mut rk = Rk4::new(6);
    let steps = (t_end / dt).round() as usize;
    let gap = |y: &[f64]| ((y[0] + y[3]).powi(2) + (y[1] + y[4]).powi(2)).sqrt();
    let mut times = vec![0.0];
    let mut delta = vec![gap(&y)];
    for i in 0..steps {
        rk.step(&sys, i as f64 * dt, dt, &mut y);
        times.push((i + 1) as f64 * dt);
        delta.push(gap(&y));
    }
    (times, delta, [[y[0], y[1], y[2]], [y[3], y[4], y[5]]])
}

/// The same problem posed as an ensemble of `n` spin-1/2: two homogeneous
/// halves at `+-delta_s/2`, all along `x`.
pub fn many_spin_equivalent(p: &TwoSpinParams, n: usize) -> Result<(ModelParams, SpinEnsembleState)> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::Domain(format!("n = {n} must be even and at least 2")));
    }
    let dispersion = (0..n).map(|k| if k < n / 2 { 0.5 * p.delta_s } else { -0.5 * p.delta_s }).collect();
    let params = ModelParams::ideal(p.chi_n, CouplingProfile::homogeneous(n), dispersion);
    let state = SpinEnsembleState { bloch: vec![[0.5, 0.0, 0.0]; n], levels: None, time: 0.0 };
    Ok((params, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_split_is_constant() {
        let p = TwoSpinParams::new(2.0, 0.0).unwrap();
        for t in [0.0, 0.7, 13.0] {
            assert!((two_spin_delta(t, &p).unwrap() - 0.5).abs() < 1e-15);
        }
        assert!((two_spin_frequency(&p).unwrap().omega - 2.0).abs() < 1e-14);
    }

    #[test]
    fn minimum_of_dn_branch() {
        let p = TwoSpinParams::new(1.0, 0.5).unwrap();
        let f = two_spin_frequency(&p).unwrap();
        let half_period = PI / f.omega;
        let min = two_spin_delta(half_period, &p).unwrap();
        assert!((min - 3f64.sqrt() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn cn_branch_touches_zero() {
        let p = TwoSpinParams::new(1.0, 1.6).unwrap();
        let f = two_spin_frequency(&p).unwrap();
        let at_zero = two_spin_delta(PI / f.omega, &p).unwrap();
        assert!(at_zero < 1e-12);
        assert!((two_spin_delta(2.0 * PI / f.omega, &p).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dip_and_limits() {
        let p = TwoSpinParams::new(1.0, 1.0).unwrap();
        assert_eq!(two_spin_frequency(&p).unwrap(), TwoSpinFrequency { omega: 0.0, dip: true });
        assert!((two_spin_delta(2.0, &p).unwrap() - 0.5 / 1f64.cosh()).abs() < 1e-15);
        let big = TwoSpinParams::new(1.0, 1e4).unwrap();
        assert!((two_spin_frequency(&big).unwrap().omega / 1e4 - 1.0).abs() < 1e-7);
    }

    #[test]
    fn frequency_dips_at_transition() {
        let w = |d: f64| two_spin_frequency(&TwoSpinParams::new(1.0, d).unwrap()).unwrap().omega;
        let below: Vec<f64> = (1..20).map(|k| w(k as f64 * 0.05)).collect();
        assert!(below.windows(2).all(|p| p[1] < p[0]));
        let above: Vec<f64> = (21..60).map(|k| w(k as f64 * 0.05)).collect();
        assert!(above.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn potential_turning_points() {
        let p = TwoSpinParams::new(1.3, 0.6).unwrap();
        assert_eq!(two_spin_potential(0.5, &p).unwrap(), 0.0);
        let dmin = (1.0 - p.ratio().powi(2)).sqrt() / 2.0;
        assert!(two_spin_potential(dmin, &p).unwrap().abs() < 1e-15);
        assert!(two_spin_potential(0.6, &p).is_err());
    }

    #[test]
    fn energy_equation_along_solution() {
        for d in [0.4, 1.7] {
            let p = TwoSpinParams::new(1.0, d).unwrap();
            for k in 1..40 {
                let t = 0.23 * k as f64;
                let h = 1e-5;
                let v = |t| two_spin_delta(t, &p).unwrap();
                let deriv = (v(t + h) - v(t - h)) / (2.0 * h);
                let e = 0.5 * deriv * deriv + two_spin_potential(v(t), &p).unwrap();
                assert!(e.abs() < 1e-8, "d={d} t={t} e={e}");
            }
        }
    }

    #[test]
    fn integration_conserves_and_matches() {
        let p = TwoSpinParams::new(1.0, 0.9).unwrap();
        let init = two_spin_conserved(&p.initial_state(), &p);
        assert_eq!(init.sz_total, 0.0);
        assert!((init.energy - 0.25).abs() < 1e-15);
        let (t, d, fin) = integrate_two_spin(&p, 1e-3, 20.0);
        let end = two_spin_conserved(&fin, &p);
        assert!((end.energy - init.energy).abs() < 1e-8);
        assert!(end.sz_total.abs() < 1e-12);
        assert!((end.len1 - 0.25).abs() < 1e-12 && (end.len2 - 0.25).abs() < 1e-12);
        let rms = (t.iter().zip(&d).map(|(t, x)| (x - two_spin_delta(*t, &p).unwrap()).powi(2)).sum::<f64>() / t.len() as f64).sqrt();
        assert!(rms < 1e-8);
    }

    #[test]
    fn many_spin_ensemble_reproduces_two_spin() {
        let p = TwoSpinParams::new(1.0, 1.6).unwrap();
        let (params, state) = many_spin_equivalent(&p, 20).unwrap();
        let traj = crate::dynamics::evolve(&state, &params, &crate::dynamics::QuenchSchedule::none(), 1e-3, 10.0).unwrap();
        for (t, n) in traj.times.iter().zip(&traj.norm_delta) {
            assert!((0.5 * n - two_spin_delta(*t, &p).unwrap()).abs() < 1e-8);
        }
    }
}

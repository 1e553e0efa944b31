//! Lax-vector analysis of the uniform/bimodal BCS model.
//!
//! For a bimodal flat density of states (two bands of width `E_W` centered at
//! `+-delta_s/2`) the condition `L(u).L(u) = 0` reduces, in the upper half
//! plane, to
//!
//! ```text
//! (chi N / 2 E_W) [ ln(u+a+b) - ln(u+a-b) + ln(u-a+b) - ln(u-a-b) ] + i = 0
//! a = delta_s/4,  b = E_W/4
//! ```
//!
//! and to its conjugate in the lower half plane. The number of complex root
//! pairs and whether their real parts vanish determines the phase.

use std::f64::consts::PI;
use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaxParams {
    pub chi_n: f64,
    pub e_w: f64,
    pub delta_s: f64,
}

impl LaxParams {
    pub fn new(chi_n: f64, e_w: f64, delta_s: f64) -> Result<Self> {
        let p = Self { chi_n, e_w, delta_s };
        p.validate()?;
        Ok(p)
    }

    /// Parameters in units of `E_W`.
    pub fn from_ratios(chi_ratio: f64, delta_ratio: f64) -> Result<Self> {
        Self::new(chi_ratio, 1.0, delta_ratio)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chi_n > 0.0 && self.e_w > 0.0 && self.delta_s >= 0.0)
            || !(self.chi_n.is_finite() && self.e_w.is_finite() && self.delta_s.is_finite())
        {
            return Err(Error::Domain(format!(
                "need chi_n > 0, e_w > 0, delta_s >= 0 (got {}, {}, {})",
                self.chi_n, self.e_w, self.delta_s
            )));
        }
        Ok(())
    }

    pub fn chi_ratio(&self) -> f64 {
        self.chi_n / self.e_w
    }

    pub fn delta_ratio(&self) -> f64 {
        self.delta_s / self.e_w
    }

    fn branch_points(&self) -> [f64; 4] {
        let (a, b) = (0.25 * self.delta_s, 0.25 * self.e_w);
        [-a - b, -a + b, a - b, a + b]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    I,
    II,
    IIIa,
    IIIb,
    III,
    #[serde(rename = "II'")]
    IIPrime,
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PhaseLabel::I => "I",
            PhaseLabel::II => "II",
            PhaseLabel::IIIa => "IIIa",
            PhaseLabel::IIIb => "IIIb",
            PhaseLabel::III => "III",
            PhaseLabel::IIPrime => "II'",
        };
        f.write_str(s)
    }
}

impl PhaseLabel {
    /// Merge the homogeneous sub-phases the way inhomogeneous couplings do:
    /// IIIa behaves as II, IIIb as III.
    pub fn inhomogeneous(self) -> Self {
        match self {
            PhaseLabel::IIIa => PhaseLabel::II,
            PhaseLabel::IIIb => PhaseLabel::III,
            other => other,
        }
    }

    /// Whether a dynamical label is consistent with an analytic one. The
    /// dynamics only separate I, II and III, so III covers both sub-cases.
    pub fn matches(self, analytic: PhaseLabel) -> bool {
        self == analytic || (self == PhaseLabel::III && matches!(analytic, PhaseLabel::IIIa | PhaseLabel::IIIb))
    }
}

/// How to report the two phase-III sub-cases.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    #[default]
    Homogeneous,
    Inhomogeneous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaxRootSet {
    /// Roots in conjugate pairs: `[u1, conj(u1), u2, conj(u2), ...]` with `Im u_k > 0`.
    pub roots: Vec<C64>,
    pub count_pairs: usize,
    pub real_parts_nonzero: bool,
}

impl LaxRootSet {
    fn from_upper(mut upper: Vec<C64>, scale: f64) -> Self {
        for u in upper.iter_mut() {
            if u.re.abs() < 1e-12 * scale {
                u.re = 0.0;
            }
        }
        upper.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        let real_parts_nonzero = upper.iter().any(|u| u.re.abs() > 1e-7 * scale);
        let roots = upper.iter().flat_map(|u| [*u, u.conj()]).collect();
        Self { roots, count_pairs: upper.len(), real_parts_nonzero }
    }

    pub fn empty() -> Self {
        Self { roots: Vec::new(), count_pairs: 0, real_parts_nonzero: false }
    }

    /// Representatives with positive imaginary part.
    pub fn upper(&self) -> impl Iterator<Item = &C64> {
        self.roots.iter().step_by(2)
    }

    pub fn label(&self) -> PhaseLabel {
        match (self.count_pairs, self.real_parts_nonzero) {
            (0, _) => PhaseLabel::I,
            (1, _) => PhaseLabel::II,
            (_, false) => PhaseLabel::IIIa,
            (_, true) => PhaseLabel::IIIb,
        }
    }
}

fn log_sum(u: C64, p: &LaxParams) -> C64 {
    let (a, b) = (0.25 * p.delta_s, 0.25 * p.e_w);
    (u + a + b).ln() - (u + a - b).ln() + (u - a + b).ln() - (u - a - b).ln()
}

fn log_sum_derivative(u: C64, p: &LaxParams) -> C64 {
    let (a, b) = (0.25 * p.delta_s, 0.25 * p.e_w);
    (u + a + b).inv() - (u + a - b).inv() + (u - a + b).inv() - (u - a - b).inv()
}

/// Residual of the root equation: `+i` branch for `Im u >= 0`, `-i` below.
///
/// Each logarithm is taken on its own principal branch.
pub fn lax_residual(u: C64, p: &LaxParams) -> Result<C64> {
    let scale = p.e_w + p.delta_s;
    for bp in p.branch_points() {
        if (u - bp).norm() <= 1e-14 * scale {
            return Err(Error::Singular(format!("u = {u} is a branch point")));
        }
    }
    let sign = if u.im >= 0.0 { 1.0 } else { -1.0 };
    Ok(p.chi_n / (2.0 * p.e_w) * log_sum(u, p) + C64::new(0.0, sign))
}

/// Closed-form roots for the regime containing `p` (empty in phase I).
pub fn closed_form_roots(p: &LaxParams) -> LaxRootSet {
    let (chi, delta) = (p.chi_ratio(), p.delta_ratio());
    let x = 1.0 / chi;
    let (cot, csc) = (x.cos() / x.sin(), 1.0 / x.sin());
    let scale = p.e_w;
    let q = 0.25 * p.e_w;
    let mut upper = Vec::new();
    match classify_phase_analytic(p, PhaseMode::Homogeneous) {
        PhaseLabel::II => {
            upper.push(C64::new(0.0, q * (cot + (csc * csc - delta * delta).sqrt())));
        }
        PhaseLabel::IIIa => {
            let r = (csc * csc - delta * delta).max(0.0).sqrt();
            upper.push(C64::new(0.0, q * (cot + r)));
            upper.push(C64::new(0.0, q * (cot - r)));
        }
        PhaseLabel::IIIb => {
            let re = q * (delta * delta - csc * csc).max(0.0).sqrt();
            upper.push(C64::new(re, q * cot));
            upper.push(C64::new(-re, q * cot));
        }
        _ => {}
    }
    LaxRootSet::from_upper(upper, scale)
}

fn wrapped(d: f64) -> f64 {
    (d + PI).rem_euclid(2.0 * PI) - PI
}

fn upper_g(u: C64, p: &LaxParams) -> C64 {
    p.chi_n / (2.0 * p.e_w) * log_sum(u, p) + C64::i()
}

/// Phase change of `g` along a segment, refined until each piece turns by
/// less than 0.3 rad.
fn phase_change(z0: C64, z1: C64, g0: C64, g1: C64, p: &LaxParams, depth: u32) -> f64 {
    let d = wrapped(g1.arg() - g0.arg());
    if d.abs() < 0.3 || depth >= 40 {
        return d;
    }
    let zm = 0.5 * (z0 + z1);
    let gm = upper_g(zm, p);
    phase_change(z0, zm, g0, gm, p, depth + 1) + phase_change(zm, z1, gm, g1, p, depth + 1)
}

/// Search rectangle in the upper half plane. Every closed-form root has
/// `|Re u| <= delta_s/4` and `Im u <= (E_W/4) cot(E_W/2 chi N) <= chi N / 2`,
/// so the box `|Re u| <= delta_s/2 + E_W`, `eta <= Im u <= 2(chi N + E_W)`
/// contains them all.
fn search_box(p: &LaxParams) -> (f64, f64, f64) {
    (0.5 * p.delta_s + p.e_w, 1e-9 * p.e_w, 2.0 * (p.chi_n + p.e_w))
}

/// Number of zeros of the upper-half-plane equation inside the search box,
/// by the argument principle.
pub fn root_count_winding(p: &LaxParams) -> usize {
    let (x, y0, y1) = search_box(p);
    let corners = [C64::new(-x, y0), C64::new(x, y0), C64::new(x, y1), C64::new(-x, y1)];
    let mut total = 0.0;
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let pieces = 64;
        let mut za = a;
        let mut ga = upper_g(za, p);
        for k in 1..=pieces {
            let zb = a + (b - a) * (k as f64 / pieces as f64);
            let gb = upper_g(zb, p);
            total += phase_change(za, zb, ga, gb, p, 0);
            za = zb;
            ga = gb;
        }
    }
    (total / (2.0 * PI)).round().max(0.0) as usize
}

fn newton(mut u: C64, p: &LaxParams, y_min: f64) -> Option<C64> {
    let c = p.chi_n / (2.0 * p.e_w);
    let mut g = upper_g(u, p);
    for _ in 0..200 {
        let dg = c * log_sum_derivative(u, p);
        if dg.norm() == 0.0 {
            return None;
        }
        let step = g / dg;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = u - lambda * step;
            if trial.im > y_min {
                let gt = upper_g(trial, p);
                if gt.norm() < g.norm() {
                    accepted = Some((trial, gt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let (next, gn) = accepted?;
        let moved = (next - u).norm();
        u = next;
        g = gn;
        if g.norm() < 1e-13 && moved <= 1e-12 * (1.0 + u.norm()) {
            return Some(u);
        }
        if g.norm() < 1e-15 {
            return Some(u);
        }
    }
    (g.norm() < 1e-11).then_some(u)
}

/// Numerical roots of the Lax equation.
///
/// The argument principle fixes how many roots the upper half plane holds;
/// damped Newton iterations from a grid of starts then locate them.
pub fn find_roots_numeric(p: &LaxParams) -> Result<LaxRootSet> {
    p.validate()?;
    let expected = root_count_winding(p);
    if expected == 0 {
        return Ok(LaxRootSet::empty());
    }
    let (x, y0, y1) = search_box(p);
    let scale = p.e_w + p.delta_s + p.chi_n;
    let mut found: Vec<C64> = Vec::new();
    let n = 24;
    'grid: for i in 0..n {
        for j in 0..n {
            let re = -x + 2.0 * x * (i as f64 + 0.5) / n as f64;
            let im = y1 * ((j as f64 + 0.5) / n as f64).powi(2);
            if let Some(u) = newton(C64::new(re, im), p, y0) {
                if u.re.abs() <= x && u.im <= y1 && found.iter().all(|f| (f - u).norm() > 1e-8 * scale) {
                    found.push(u);
                    if found.len() == expected {
                        break 'grid;
                    }
                }
            }
        }
    }
    if found.len() != expected {
        return Err(Error::Analysis(format!(
            "winding number gives {expected} roots but Newton found {} (chi_n={}, e_w={}, delta_s={})",
            found.len(),
            p.chi_n,
            p.e_w,
            p.delta_s
        )));
    }
    Ok(LaxRootSet::from_upper(found, p.e_w))
}

fn classify_ratios(chi: f64, delta: f64) -> PhaseLabel {
    if delta <= 1.0 {
        if chi < 1.0 / PI {
            PhaseLabel::I
        } else {
            PhaseLabel::II
        }
    } else if chi < 2.0 / PI {
        PhaseLabel::I
    } else if delta < 1.0 / (1.0 / chi).sin() {
        PhaseLabel::IIIa
    } else {
        PhaseLabel::IIIb
    }
}

/// Phase from the closed-form boundaries. Points on a boundary take the
/// label of the larger-`chi N` side.
pub fn classify_phase_analytic(p: &LaxParams, mode: PhaseMode) -> PhaseLabel {
    let label = classify_ratios(p.chi_ratio() * (1.0 + 1e-9), p.delta_ratio());
    match mode {
        PhaseMode::Homogeneous => label,
        PhaseMode::Inhomogeneous => label.inhomogeneous(),
    }
}

/// Labels of the multiplicative neighbours `(chi(1 +- rel), delta(1 +- rel))`
/// all agree with the label at the point itself.
pub fn is_away_from_boundary(chi_ratio: f64, delta_ratio: f64, rel: f64) -> bool {
    let centre = classify_ratios(chi_ratio, delta_ratio);
    [(1.0 + rel, 1.0), (1.0 - rel, 1.0), (1.0, 1.0 + rel), (1.0, 1.0 - rel)]
        .iter()
        .all(|(a, b)| classify_ratios(chi_ratio * a, delta_ratio * b) == centre)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// `chi N/E_W = 1/pi` for `delta_s/E_W <= 1`, then `delta_s = E_W` up to `2/pi`.
    OneTwo,
    /// `chi N/E_W = 2/pi` for `delta_s/E_W > 1`.
    OneThree,
    /// `delta_s/E_W = csc(E_W/chi N)` for `chi N/E_W > 2/pi`.
    TwoThree,
}

/// A boundary polyline in `(chi N/E_W, delta_s/E_W)` coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub boundary: Boundary,
    pub points: Vec<(f64, f64)>,
}

fn clip(points: Vec<(f64, f64)>, chi: (f64, f64), delta: (f64, f64)) -> Vec<(f64, f64)> {
    points
        .into_iter()
        .filter(|(c, d)| *c >= chi.0 && *c <= chi.1 && *d >= delta.0 && *d <= delta.1)
        .collect()
}

/// Analytic boundaries restricted to the plotting window, each sampled
/// with `samples` points per segment.
pub fn boundary_curves(chi_range: (f64, f64), delta_range: (f64, f64), samples: usize) -> Result<Vec<Polyline>> {
    if !(chi_range.0 >= 0.0 && chi_range.1 > chi_range.0 && delta_range.0 >= 0.0 && delta_range.1 > delta_range.0) {
        return Err(Error::Domain("boundary ranges must be positive and increasing".into()));
    }
    let samples = samples.max(2);
    let lin = |a: f64, b: f64| (0..samples).map(move |k| a + (b - a) * k as f64 / (samples - 1) as f64);
    let (c1, c2) = (1.0 / PI, 2.0 / PI);

    let mut one_two: Vec<(f64, f64)> = lin(delta_range.0.min(1.0), delta_range.1.min(1.0)).map(|d| (c1, d)).collect();
    one_two.extend(lin(c1, c2).skip(1).map(|c| (c, 1.0)));
    let one_three = lin(delta_range.0.max(1.0), delta_range.1.max(1.0)).map(|d| (c2, d)).collect();
    let two_three = lin(chi_range.0.max(c2), chi_range.1.max(c2)).map(|c| (c, 1.0 / (1.0 / c).sin())).collect();

    Ok(vec![
        Polyline { boundary: Boundary::OneTwo, points: clip(one_two, chi_range, delta_range) },
        Polyline { boundary: Boundary::OneThree, points: clip(one_three, chi_range, delta_range) },
        Polyline { boundary: Boundary::TwoThree, points: clip(two_three, chi_range, delta_range) },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn csc_series(x: f64) -> f64 {
        // sin by Taylor series, independent of libm
        let mut term = x;
        let mut s = 0.0;
        for k in 0..30 {
            s += term;
            term *= -x * x / ((2 * k + 2) as f64 * (2 * k + 3) as f64);
        }
        1.0 / s
    }

    #[test]
    fn phase_two_root_at_zero_split() {
        // with delta_s = 0 the equation reduces to atan(4y/E_W) = pi/2 - E_W/(2 chi N)
        let p = LaxParams::from_ratios(1.0, 0.0).unwrap();
        let roots = closed_form_roots(&p);
        assert_eq!(roots.count_pairs, 1);
        let y = 0.25 * (PI / 2.0 - 0.5).tan();
        assert!((roots.roots[0].im - y).abs() < 1e-14);
        assert!(lax_residual(roots.roots[0], &p).unwrap().norm() < 1e-13);
        assert!(lax_residual(roots.roots[1], &p).unwrap().norm() < 1e-13);
    }

    #[test]
    fn reference_points_classify() {
        let ii = closed_form_roots(&LaxParams::from_ratios(1.0, 0.5).unwrap());
        assert_eq!((ii.count_pairs, ii.real_parts_nonzero), (1, false));
        let iiia = closed_form_roots(&LaxParams::from_ratios(1.0, 1.1).unwrap());
        assert_eq!((iiia.count_pairs, iiia.real_parts_nonzero), (2, false));
        let iiib = closed_form_roots(&LaxParams::from_ratios(1.0, 1.6).unwrap());
        assert_eq!((iiib.count_pairs, iiib.real_parts_nonzero), (2, true));
    }

    #[test]
    fn csc_one_comparison() {
        let c = csc_series(1.0);
        assert!((c - 1.1883951057781212).abs() < 1e-14);
        let p = LaxParams::from_ratios(1.0, 1.2).unwrap();
        assert_eq!(classify_phase_analytic(&p, PhaseMode::Homogeneous), PhaseLabel::IIIb);
        let p = LaxParams::from_ratios(1.0, 1.18).unwrap();
        assert_eq!(classify_phase_analytic(&p, PhaseMode::Homogeneous), PhaseLabel::IIIa);
    }

    #[test]
    fn analytic_examples() {
        let m = PhaseMode::Homogeneous;
        assert_eq!(classify_phase_analytic(&LaxParams::from_ratios(0.25, 0.0).unwrap(), m), PhaseLabel::I);
        let far = LaxParams::from_ratios(1e4, 2.0).unwrap();
        assert_eq!(classify_phase_analytic(&far, m), PhaseLabel::IIIa);
        assert_eq!(classify_phase_analytic(&far, PhaseMode::Inhomogeneous), PhaseLabel::II);
        let b = LaxParams::from_ratios(1.0, 1.6).unwrap();
        assert_eq!(classify_phase_analytic(&b, PhaseMode::Inhomogeneous), PhaseLabel::III);
        assert_eq!(classify_phase_analytic(&LaxParams::from_ratios(0.5, 1.5).unwrap(), m), PhaseLabel::I);
    }

    #[test]
    fn ties_go_to_larger_chi() {
        let m = PhaseMode::Homogeneous;
        assert_eq!(classify_phase_analytic(&LaxParams::from_ratios(1.0 / PI, 0.3).unwrap(), m), PhaseLabel::II);
        assert_eq!(classify_phase_analytic(&LaxParams::from_ratios(2.0 / PI, 2.0).unwrap(), m), PhaseLabel::IIIb);
        assert_eq!(classify_phase_analytic(&LaxParams::from_ratios(0.5, 1.0).unwrap(), m), PhaseLabel::II);
    }

    #[test]
    fn numeric_matches_closed_form_examples() {
        for (c, d) in [(1.0, 0.5), (1.0, 1.1), (1.0, 1.6), (1.0, 0.0), (0.5, 0.7), (2.0, 2.5)] {
            let p = LaxParams::from_ratios(c, d).unwrap();
            let a = closed_form_roots(&p);
            let n = find_roots_numeric(&p).unwrap();
            assert_eq!(a.count_pairs, n.count_pairs, "({c},{d})");
            for (x, y) in a.roots.iter().zip(&n.roots) {
                assert!((x - y).norm() < 1e-8, "({c},{d}): {x} vs {y}");
            }
        }
    }

    #[test]
    fn phase_one_has_no_roots() {
        let p = LaxParams::from_ratios(0.2, 0.0).unwrap();
        assert_eq!(find_roots_numeric(&p).unwrap().count_pairs, 0);
        let p = LaxParams::from_ratios(0.5, 1.5).unwrap();
        assert_eq!(find_roots_numeric(&p).unwrap().count_pairs, 0);
    }

    #[test]
    fn strong_coupling_keeps_one_pair() {
        for c in [3.0, 10.0, 50.0] {
            let p = LaxParams::from_ratios(c, 0.0).unwrap();
            let r = find_roots_numeric(&p).unwrap();
            assert_eq!(r.count_pairs, 1);
            assert!(r.roots[0].im > 0.9 * c / 2.0 - 0.25);
        }
    }

    #[test]
    fn residual_symmetry_and_limit() {
        let p = LaxParams::from_ratios(0.8, 0.0).unwrap();
        let r = lax_residual(C64::new(0.0, 0.37), &p).unwrap();
        assert!(r.re.abs() < 1e-15);
        let far = lax_residual(C64::new(3e7, 4e7), &p).unwrap();
        assert!((far - C64::i()).norm() < 1e-7);
        let below = lax_residual(C64::new(3e7, -4e7), &p).unwrap();
        assert!((below + C64::i()).norm() < 1e-7);
    }

    #[test]
    fn branch_point_is_singular() {
        let p = LaxParams::new(1.0, 2.0, 1.0).unwrap();
        assert!(matches!(lax_residual(C64::new(0.25 + 0.5, 0.0), &p), Err(Error::Singular(_))));
    }

    #[test]
    fn invalid_params() {
        assert!(LaxParams::new(0.0, 1.0, 0.0).is_err());
        assert!(LaxParams::new(1.0, -1.0, 0.0).is_err());
        assert!(LaxParams::new(1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn boundary_polylines() {
        let curves = boundary_curves((0.05, 3.0), (0.0, 3.0), 50).unwrap();
        let one_two = &curves[0];
        assert!(one_two.points.iter().filter(|(_, d)| *d < 1.0).all(|(c, _)| (c - 1.0 / PI).abs() < 1e-15));
        assert!(curves[1].points.iter().all(|(c, d)| (c - 2.0 / PI).abs() < 1e-15 && *d >= 1.0));
        assert!(curves[2].points.iter().all(|(c, d)| (d - 1.0 / (1.0 / c).sin()).abs() < 1e-12));
        let none = boundary_curves((1.0, 3.0), (0.0, 0.5), 10).unwrap();
        assert!(none[0].points.is_empty() && none[1].points.is_empty() && none[2].points.is_empty());
    }

    #[test]
    fn scaling_invariance() {
        let p = LaxParams::new(1.3, 1.0, 1.4).unwrap();
        let q = LaxParams::new(1.3 * 7.5, 7.5, 1.4 * 7.5).unwrap();
        let (rp, rq) = (find_roots_numeric(&p).unwrap(), find_roots_numeric(&q).unwrap());
        assert_eq!(rp.label(), rq.label());
        for (a, b) in rp.roots.iter().zip(&rq.roots) {
            assert!((a * 7.5 - b).norm() < 1e-7);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn closed_forms_solve_the_equation(c in 0.33f64..4.0, d in 0.0f64..3.5) {
            let p = LaxParams::from_ratios(c, d).unwrap();
            for u in closed_form_roots(&p).roots {
                prop_assert!(lax_residual(u, &p).unwrap().norm() < 1e-10);
            }
        }

        #[test]
        fn roots_come_in_conjugate_pairs(c in 0.1f64..3.0, d in 0.0f64..3.0) {
            let p = LaxParams::from_ratios(c, d).unwrap();
            let r = closed_form_roots(&p);
            for pair in r.roots.chunks(2) {
                prop_assert_eq!(pair[0], pair[1].conj());
                prop_assert!(pair[0].im > 0.0);
            }
        }
    }
}

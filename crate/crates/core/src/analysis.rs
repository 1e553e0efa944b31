//! Post-processing of order-parameter trajectories.

use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::lax::PhaseLabel;
use crate::model::C64;

/// Fewest samples accepted in an analysis window.
pub const MIN_WINDOW_SAMPLES: usize = 32;
/// Zero-padding factor applied before the FFT.
pub const PAD_FACTOR: usize = 4;

/// Signal whose spectrum is taken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumTarget {
    /// `|Delta|/Delta_init`.
    Abs,
    /// `(|Delta|/Delta_init)^2`.
    #[default]
    AbsSquared,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    /// Uniformly spaced, starting at 0 (cycles per time unit).
    pub frequencies: Vec<f64>,
    /// `(2|X_k|/sum w)^2`, so a sinusoid of amplitude `b` centered on a bin has power `b^2`.
    pub power: Vec<f64>,
    pub window: (f64, f64),
    pub detrend_order: usize,
    /// Frequency spacing of the unpadded transform.
    pub resolution: f64,
}

impl Spectrum {
    /// Variance estimate from the integrated power (Hann taper: `sum P / 3`).
    pub fn integrated_variance(&self) -> f64 {
        self.power.iter().sum::<f64>() / (3.0 * PAD_FACTOR as f64)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseMetrics {
    pub avg: f64,
    pub std: f64,
    pub osc_amp: f64,
    /// `None` when no peak rises above the noise floor.
    pub osc_freq: Option<f64>,
    pub decay_time: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub avg: f64,
    pub osc: f64,
    /// Experimental: label II points with `avg` below this as II'.
    pub prime: Option<f64>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { avg: 0.05, osc: 0.03, prime: None }
    }
}

fn window_indices(times: &[f64], t1: f64, t2: f64) -> Result<(usize, usize)> {
    let end = *times.last().unwrap_or(&0.0);
    let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    let tol = 1e-9 * dt.max(f64::MIN_POSITIVE);
    if !(t1 < t2) || t2 > end + tol.max(1e-12 * end.abs()) {
        return Err(Error::Domain(format!("window [{t1:e}, {t2:e}] not inside [.., {end:e}]")));
    }
    let lo = times.partition_point(|&t| t < t1 - tol);
    let hi = times.partition_point(|&t| t <= t2 + tol);
    if hi - lo < MIN_WINDOW_SAMPLES {
        return Err(Error::WindowTooShort { got: hi - lo, need: MIN_WINDOW_SAMPLES });
    }
    Ok((lo, hi))
}

/// Windowed mean and RMS deviation of `|Delta|/Delta_init`.
pub fn window_metrics(traj: &Trajectory, t1: f64, t2: f64) -> Result<PhaseMetrics> {
    let (lo, hi) = window_indices(&traj.times, t1, t2)?;
    let (avg, std) = mean_std(&traj.norm_delta[lo..hi]);
    Ok(PhaseMetrics { avg, std, ..Default::default() })
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let avg = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - avg).powi(2)).sum::<f64>() / n;
    (avg, var.sqrt())
}

/// Subtract the least-squares polynomial of the given order.
pub fn detrend(values: &[f64], order: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if n <= order {
        return Err(Error::WindowTooShort { got: n, need: order + 1 });
    }
    let x = |i: usize| if n > 1 { 2.0 * i as f64 / (n - 1) as f64 - 1.0 } else { 0.0 };
    let a = DMatrix::from_fn(n, order + 1, |i, k| x(i).powi(k as i32));
    let b = DVector::from_column_slice(values);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::Rank(e.to_string()))?;
    let fit = a * coef;
    Ok(values.iter().zip(fit.iter()).map(|(v, f)| v - f).collect())
}

/// One-sided spectrum of uniformly sampled `values` (spacing `dt`) after
/// polynomial detrending and a Hann taper.
pub fn spectrum_of(values: &[f64], dt: f64, detrend_order: usize) -> Result<Spectrum> {
    let n = values.len();
    if n < MIN_WINDOW_SAMPLES {
        return Err(Error::WindowTooShort { got: n, need: MIN_WINDOW_SAMPLES });
    }
    let resid = detrend(values, detrend_order)?;
    let w: Vec<f64> =
        (0..n).map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / (n - 1) as f64).cos()).collect();
    let wsum: f64 = w.iter().sum();
    let m = n * PAD_FACTOR;
    let mut buf: Vec<C64> = resid.iter().zip(&w).map(|(r, w)| C64::new(r * w, 0.0)).collect();
    buf.resize(m, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let half = m / 2 + 1;
    let df = 1.0 / (m as f64 * dt);
    let power = (0..half)
        .map(|k| {
            let scale = if k == 0 || (m % 2 == 0 && k == m / 2) { 1.0 } else { 2.0 };
            (scale * buf[k].norm() / wsum).powi(2)
        })
        .collect();
    Ok(Spectrum {
        frequencies: (0..half).map(|k| k as f64 * df).collect(),
        power,
        window: (0.0, (n - 1) as f64 * dt),
        detrend_order,
        resolution: 1.0 / (n as f64 * dt),
    })
}

/// Spectrum of the normalized order parameter over `[t1, t2]`.
pub fn spectrum(traj: &Trajectory, t1: f64, t2: f64, detrend_order: usize) -> Result<Spectrum> {
    spectrum_target(traj, t1, t2, detrend_order, SpectrumTarget::AbsSquared)
}

pub fn spectrum_target(
    traj: &Trajectory,
    t1: f64,
    t2: f64,
    detrend_order: usize,
    target: SpectrumTarget,
) -> Result<Spectrum> {
    let (lo, hi) = window_indices(&traj.times, t1, t2)?;
    let x = &traj.norm_delta[lo..hi];
    let values: Vec<f64> = match target {
        SpectrumTarget::Abs => x.to_vec(),
        SpectrumTarget::AbsSquared => x.iter().map(|v| v * v).collect(),
    };
    let mut s = spectrum_of(&values, traj.dt(), detrend_order)?;
    s.window = (traj.times[lo], traj.times[hi - 1]);
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationPeak {
    /// `None` signals no oscillation above the noise floor.
    pub freq: Option<f64>,
    pub amplitude: f64,
}

/// Hann main-lobe response at an offset of `d` unpadded bins.
fn hann_response(d: f64) -> f64 {
    if d.abs() < 1e-12 {
        return 1.0;
    }
    if (d.abs() - 1.0).abs() < 1e-9 {
        return 0.5;
    }
    let x = std::f64::consts::PI * d;
    (x.sin() / x / (1.0 - d * d)).abs()
}

/// Strongest spectral peak above `f_min`, refined by parabolic
/// interpolation of the log magnitude.
pub fn oscillation_peak(spec: &Spectrum, f_min: f64) -> OscillationPeak {
    let none = OscillationPeak { freq: None, amplitude: 0.0 };
    let df = if spec.frequencies.len() > 1 { spec.frequencies[1] } else { return none };
    let start = spec.frequencies.partition_point(|&f| f <= f_min).max(1);
    if start + 1 >= spec.power.len() {
        return none;
    }
    let (k, &peak) = spec.power[start..]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, p)| (i + start, p))
        .unwrap();
    let mut sorted = spec.power[1..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    if !(peak > 3.0 * median) || peak.sqrt() < 1e-12 || k + 1 >= spec.power.len() {
        return none;
    }
    let (a, b, c) = (spec.power[k - 1].sqrt(), peak.sqrt(), spec.power[k + 1].sqrt());
    let mut offset = 0.0;
    let mut mag = b;
    if a > 0.0 && c > 0.0 {
        let (la, lb, lc) = (a.ln(), b.ln(), c.ln());
        let denom = la - 2.0 * lb + lc;
        if denom < 0.0 {
            offset = (0.5 * (la - lc) / denom).clamp(-0.5, 0.5);
            mag = (lb - 0.25 * (la - lc) * offset).exp();
        }
    }
    let freq = (k as f64 + offset) * df;
    // residual offset between the refined peak and the bin it sits in, in unpadded bins
    let d = offset / PAD_FACTOR as f64;
    OscillationPeak { freq: Some(freq), amplitude: mag / hann_response(d) }
}

/// Default low-frequency cutoff: two unpadded bins.
pub fn default_f_min(spec: &Spectrum) -> f64 {
    2.0 * spec.resolution
}

/// Average, spread and dominant oscillation of `|Delta|/Delta_init` on `[t1, t2]`.
pub fn phase_metrics(traj: &Trajectory, t1: f64, t2: f64, detrend_order: usize) -> Result<PhaseMetrics> {
    let mut m = window_metrics(traj, t1, t2)?;
    let spec = spectrum_target(traj, t1, t2, detrend_order, SpectrumTarget::Abs)?;
    let peak = oscillation_peak(&spec, default_f_min(&spec));
    m.osc_amp = peak.amplitude;
    m.osc_freq = peak.freq;
    Ok(m)
}

pub fn classify_phase_dynamical(metrics: &PhaseMetrics, thresholds: &Thresholds) -> PhaseLabel {
    if metrics.avg < thresholds.avg {
        PhaseLabel::I
    } else if metrics.osc_amp >= thresholds.osc {
        PhaseLabel::III
    } else if thresholds.prime.is_some_and(|p| metrics.avg < p) {
        PhaseLabel::IIPrime
    } else {
        PhaseLabel::II
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted `A` in `A exp(-t/tau)`, with `t` measured from the trajectory start.
    pub amplitude: f64,
    pub tau: f64,
    /// Time at which the fitted curve reaches `1/e`.
    pub one_over_e: f64,
    /// False when the fit does not decay to `1/e` inside the window.
    pub bounded: bool,
}

/// Least-squares fit of `A exp(-t/tau)` to `|Delta|/Delta_init` on `[t1, t2]`.
pub fn decay_time(traj: &Trajectory, t1: f64, t2: f64) -> Result<DecayFit> {
    let (lo, hi) = window_indices(&traj.times, t1, t2)?;
    if !(traj.norm_delta[lo] > 0.0) {
        return Err(Error::Domain("|Delta(t1)| must be positive".into()));
    }
    let t0 = traj.times[0];
    let t: Vec<f64> = traj.times[lo..hi].iter().map(|x| x - t0).collect();
    fit_exponential(&t, &traj.norm_delta[lo..hi], t2 - t0)
}

/// Levenberg-Marquardt fit of `y = A exp(-t/tau)`.
pub fn fit_exponential(t: &[f64], y: &[f64], horizon: f64) -> Result<DecayFit> {
    // start from a log-linear fit on the positive samples
    let pos: Vec<(f64, f64)> = t.iter().zip(y).filter(|(_, y)| **y > 0.0).map(|(t, y)| (*t, y.ln())).collect();
    if pos.len() < 2 {
        return Err(Error::Analysis("too few positive samples for an exponential fit".into()));
    }
    let n = pos.len() as f64;
    let (mt, ml) = (pos.iter().map(|p| p.0).sum::<f64>() / n, pos.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pos.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pos.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let mut a = (ml - slope * mt).exp();
    let span = t.last().unwrap() - t[0];
    let mut k = if slope < 0.0 { -slope } else { 1e-3 / span.max(f64::MIN_POSITIVE) };

    let cost = |a: f64, k: f64| t.iter().zip(y).map(|(t, y)| (a * (-k * t).exp() - y).powi(2)).sum::<f64>();
    let mut c = cost(a, k);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let (mut jtj, mut jtr) = ([[0.0; 2]; 2], [0.0; 2]);
        for (t, y) in t.iter().zip(y) {
            let e = (-k * t).exp();
            let r = a * e - y;
            let g = [e, -a * t * e];
            for i in 0..2 {
                jtr[i] += g[i] * r;
                for j in 0..2 {
                    jtj[i][j] += g[i] * g[j];
                }
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let m = [[jtj[0][0] * (1.0 + lambda), jtj[0][1]], [jtj[1][0], jtj[1][1] * (1.0 + lambda)]];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det == 0.0 {
                break;
            }
            let da = -(m[1][1] * jtr[0] - m[0][1] * jtr[1]) / det;
            let dk = -(m[0][0] * jtr[1] - m[1][0] * jtr[0]) / det;
            let (na, nk) = (a + da, k + dk);
            let nc = cost(na, nk);
            if nc < c {
                let rel = (c - nc) / c.max(f64::MIN_POSITIVE);
                a = na;
                k = nk;
                c = nc;
                lambda = (lambda * 0.3).max(1e-12);
                improved = rel > 1e-14;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    if k <= 0.0 || !a.is_finite() {
        return Ok(DecayFit { amplitude: a, tau: f64::INFINITY, one_over_e: f64::INFINITY, bounded: false });
    }
    let tau = 1.0 / k;
    let one_over_e = tau * (1.0 + a.ln());
    Ok(DecayFit { amplitude: a, tau, one_over_e, bounded: one_over_e <= horizon })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub slope_err: f64,
    pub intercept_err: f64,
}

/// Ordinary least squares of `omega_osc` against `2 Delta_inf`.
pub fn higgs_regression(runs: &[(f64, f64)]) -> Result<Regression> {
    if runs.len() < 3 {
        return Err(Error::Domain(format!("need at least 3 runs, got {}", runs.len())));
    }
    let n = runs.len() as f64;
    let xs: Vec<f64> = runs.iter().map(|r| 2.0 * r.1).collect();
    let ys: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-24 * mx.abs().max(1.0).powi(2) {
        return Err(Error::Rank("all 2*Delta_inf values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let s2 = rss / (n - 2.0);
    Ok(Regression {
        slope,
        intercept,
        slope_err: (s2 / sxx).sqrt(),
        intercept_err: (s2 * (1.0 / n + mx * mx / sxx)).sqrt(),
    })
}

/// `(omega_osc, Delta_inf)` of one run: angular frequency of the `|Delta|`
/// peak and the mean of `|Delta|` (rad/s) on `[t1, t2]`.
pub fn higgs_point(traj: &Trajectory, t1: f64, t2: f64, detrend_order: usize) -> Result<(f64, f64)> {
    let m = phase_metrics(traj, t1, t2, detrend_order)?;
    let f = m
        .osc_freq
        .ok_or_else(|| Error::Analysis("no oscillation peak for the Higgs fit".into()))?;
    Ok((std::f64::consts::TAU * f, m.avg * traj.delta_init))
}

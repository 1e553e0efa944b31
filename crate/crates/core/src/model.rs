//! Domain types shared by the dynamics and analysis code: single-particle
//! dispersions, coupling profiles, initial-state preparation and the
//! generalized order parameter `Delta = chi * sum_k zeta_k <S_k^->`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Lattice and cavity wavelengths (nm) fixing the incommensurate coupling phase.
pub const LATTICE_WAVELENGTH_NM: f64 = 813.0;
pub const CAVITY_WAVELENGTH_NM: f64 = 689.0;

/// Phase step `pi * lambda_L / lambda_c` of the incommensurate couplings.
pub fn incommensurate_phase() -> f64 {
    PI * LATTICE_WAVELENGTH_NM / CAVITY_WAVELENGTH_NM
}

/// Ordinary frequency in MHz to angular frequency in rad/s.
pub fn mhz_to_rad(f_mhz: f64) -> f64 {
    TAU * f_mhz * 1e6
}

/// Angular frequency in rad/s to ordinary frequency in MHz.
pub fn rad_to_mhz(w: f64) -> f64 {
    w / TAU * 1e-6
}

/// Mean-field spin ensemble: one Bloch vector `(Sx, Sy, Sz)` per spin,
/// each of length at most 1/2.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinEnsembleState {
    pub bloch: Vec<[f64; 3]>,
    /// Motional level of each atom, only used by the motion extension.
    pub levels: Option<Vec<u32>>,
    pub time: f64,
}

impl SpinEnsembleState {
    /// All spins in the ground state `(0, 0, -1/2)`.
    pub fn ground(n: usize) -> Self {
        Self { bloch: vec![[0.0, 0.0, -0.5]; n], levels: None, time: 0.0 }
    }

    pub fn n_spins(&self) -> usize {
        self.bloch.len()
    }

    pub fn total_sz(&self) -> f64 {
        self.bloch.iter().map(|s| s[2]).sum()
    }

    /// Largest per-spin Bloch norm; bounded by 1/2.
    pub fn max_norm(&self) -> f64 {
        self.bloch.iter().map(|s| norm3(s)).fold(0.0, f64::max)
    }

    /// Apply a permutation `perm[new] = old` to the spins.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            bloch: perm.iter().map(|&i| self.bloch[i]).collect(),
            levels: self.levels.as_ref().map(|l| perm.iter().map(|&i| l[i]).collect()),
            time: self.time,
        }
    }
}

pub(crate) fn norm3(s: &[f64; 3]) -> f64 {
    (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    Homogeneous,
    Incommensurate,
    RandomCos,
}

/// Per-spin coupling `zeta_k` to the cavity mode and the effective atom number
/// that makes `chi * n_eff` the averaged interaction strength.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingProfile {
    pub kind: CouplingKind,
    pub zeta: Vec<f64>,
    pub n_eff: f64,
}

impl CouplingProfile {
    pub fn homogeneous(n: usize) -> Self {
        Self { kind: CouplingKind::Homogeneous, zeta: vec![1.0; n], n_eff: n as f64 }
    }

    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    /// `sum_k zeta_k^2`, the collective weight entering `chi * sum zeta^2`.
    pub fn weight(&self) -> f64 {
        self.zeta.iter().map(|z| z * z).sum()
    }

    /// Per-pair exchange rate that realizes a target `chi * n_eff`.
    pub fn chi_for(&self, chi_n: f64) -> f64 {
        chi_n / self.n_eff
    }
}

/// Site phase `x_j` behind each coupling `zeta_j = cos x_j`: zero for
/// `homogeneous`, `j phi` with `phi = pi 813/689` for `incommensurate`, and
/// `x ~ U[0, 2pi)` for `random_cos`.
pub fn site_phases(kind: CouplingKind, n: usize, seed: u64) -> Vec<f64> {
    match kind {
        CouplingKind::Homogeneous => vec![0.0; n],
        CouplingKind::Incommensurate => {
            let phi = incommensurate_phase();
            (0..n).map(|j| j as f64 * phi).collect()
        }
        CouplingKind::RandomCos => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| rng.random::<f64>() * TAU).collect()
        }
    }
}

/// Draw a coupling profile.
pub fn sample_couplings(kind: CouplingKind, n: usize, seed: u64) -> CouplingProfile {
    match kind {
        CouplingKind::Homogeneous => CouplingProfile::homogeneous(n),
        _ => CouplingProfile {
            kind,
            zeta: site_phases(kind, n, seed).into_iter().map(f64::cos).collect(),
            n_eff: n as f64 / 2.0,
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum DispersionKind {
    Uniform,
    BimodalUniform,
    BimodalImbalanced,
    Empirical,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Midpoints of equal-weight cells within each band.
    #[default]
    Stratified,
    Iid,
}

/// Description of the single-particle energies `epsilon_k / hbar` (rad/s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionSpec {
    pub kind: DispersionKind,
    /// Splitting between the two band centres.
    #[serde(default)]
    pub delta_s: f64,
    /// Width of each band (of the first band when imbalanced).
    #[serde(default)]
    pub e_w: f64,
    #[serde(default)]
    pub e_w_second: Option<f64>,
    #[serde(default)]
    pub empirical_samples: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampling: Sampling,
}

impl DispersionSpec {
    pub fn uniform(e_w: f64) -> Self {
        Self::bimodal(0.0, e_w).with_kind(DispersionKind::Uniform)
    }

    pub fn bimodal(delta_s: f64, e_w: f64) -> Self {
        Self {
            kind: DispersionKind::BimodalUniform,
            delta_s,
            e_w,
            e_w_second: None,
            empirical_samples: None,
            seed: 0,
            sampling: Sampling::Stratified,
        }
    }

    pub fn empirical(samples: Vec<f64>) -> Self {
        Self {
            kind: DispersionKind::Empirical,
            empirical_samples: Some(samples),
            ..Self::bimodal(0.0, 0.0)
        }
    }

    pub fn with_kind(mut self, kind: DispersionKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn fill_band(out: &mut Vec<f64>, centre: f64, width: f64, count: usize, sampling: Sampling, rng: &mut ChaCha8Rng) {
    let lo = centre - 0.5 * width;
    match sampling {
        Sampling::Stratified => {
            out.extend((0..count).map(|i| lo + (i as f64 + 0.5) * width / count as f64));
        }
        Sampling::Iid => {
            out.extend((0..count).map(|_| lo + width * rng.random::<f64>()));
        }
    }
}

/// Realize `epsilon_k / hbar` for `n` spins.
///
/// Bimodal kinds put the first `ceil(n/2)` spins in the lower band centred at
/// `-delta_s/2` and the rest in the upper band at `+delta_s/2`.
pub fn build_dispersion(spec: &DispersionSpec, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("dispersion needs at least one spin".into()));
    }
    let second = spec.e_w_second.unwrap_or(spec.e_w);
    if spec.e_w < 0.0 || second < 0.0 || spec.delta_s < 0.0 {
        return Err(Error::Domain("dispersion widths and splitting must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(n);
    match spec.kind {
        DispersionKind::Uniform => fill_band(&mut out, 0.0, spec.e_w, n, spec.sampling, &mut rng),
        DispersionKind::BimodalUniform | DispersionKind::BimodalImbalanced => {
            let lower = n.div_ceil(2);
            let w2 = if spec.kind == DispersionKind::BimodalUniform { spec.e_w } else { second };
            fill_band(&mut out, -0.5 * spec.delta_s, spec.e_w, lower, spec.sampling, &mut rng);
            fill_band(&mut out, 0.5 * spec.delta_s, w2, n - lower, spec.sampling, &mut rng);
        }
        DispersionKind::Empirical => {
            let samples = spec
                .empirical_samples
                .as_ref()
                .ok_or_else(|| Error::Domain("empirical dispersion without samples".into()))?;
            if samples.len() != n {
                return Err(Error::Size { expected: n, got: samples.len() });
            }
            out.extend_from_slice(samples);
        }
    }
    Ok(out)
}

/// Everything the mean-field equations need. Rates are angular (rad/s).
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// Exchange rate per spin pair; `chi * n_eff` is the collective scale.
    pub chi: f64,
    /// Spontaneous emission.
    pub gamma: f64,
    /// Collective (superradiant) decay through the cavity.
    pub big_gamma: f64,
    /// Elastic dephasing.
    pub gamma_el: f64,
    /// Motional dephasing, used by the motion extension only.
    pub gamma_mo: f64,
    pub couplings: CouplingProfile,
    pub dispersion: Vec<f64>,
}

impl ModelParams {
    /// Dissipation-free parameters with `chi` fixed by the collective scale `chi_n`.
    pub fn ideal(chi_n: f64, couplings: CouplingProfile, dispersion: Vec<f64>) -> Self {
        Self {
            chi: couplings.chi_for(chi_n),
            gamma: 0.0,
            big_gamma: 0.0,
            gamma_el: 0.0,
            gamma_mo: 0.0,
            couplings,
            dispersion,
        }
    }

    pub fn n_spins(&self) -> usize {
        self.couplings.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dispersion.len() != self.couplings.len() {
            return Err(Error::Size { expected: self.couplings.len(), got: self.dispersion.len() });
        }
        let rates = [self.chi, self.gamma, self.big_gamma, self.gamma_el, self.gamma_mo];
        if rates.iter().any(|r| *r < 0.0 || !r.is_finite()) {
            return Err(Error::Domain("rates must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// Largest frequency scale of the flow, used by the step-size guard.
    pub fn frequency_scale(&self) -> f64 {
        let eps = self.dispersion.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        let w = self.couplings.weight();
        eps.max(self.chi * w).max(self.big_gamma * w)
    }

    /// Mean-field energy `chi |sum zeta S^-|^2 + sum eps_k Sz_k` (units of hbar).
    pub fn energy(&self, state: &SpinEnsembleState) -> f64 {
        let c = collective_coherence(state, &self.couplings.zeta);
        self.chi * c.norm_sqr()
            + state.bloch.iter().zip(&self.dispersion).map(|(s, e)| e * s[2]).sum::<f64>()
    }
}

/// Superradiant decay rate magnitude `|chi kappa / delta_c|`.
pub fn superradiance_rate(chi: f64, kappa: f64, delta_c: f64) -> f64 {
    (chi * kappa / delta_c).abs()
}

/// Cavity-mediated exchange `chi = -g^2 delta_c / (delta_c^2 + kappa^2/4)`.
pub fn cavity_exchange_rate(g: f64, kappa: f64, delta_c: f64) -> f64 {
    -g * g * delta_c / (delta_c * delta_c + 0.25 * kappa * kappa)
}

/// Prepare the post-pulse state.
///
/// Each spin is rotated from `(0,0,-1/2)` about `y` by `zeta_k * drive_area`
/// (pulse `hbar Omega sum zeta_k S_k^y`, taken as instantaneous), then about
/// `z` by `phi_k = phi0 (eps_k - eps_min)/(eps_max - eps_min)`.
pub fn prepare_initial_state(
    couplings: &CouplingProfile,
    drive_area: f64,
    phase_spread: f64,
    dispersion: &[f64],
) -> Result<SpinEnsembleState> {
    if dispersion.len() != couplings.len() {
        return Err(Error::Size { expected: couplings.len(), got: dispersion.len() });
    }
    if !(0.0..=TAU).contains(&drive_area) {
        return Err(Error::Domain(format!("drive area {drive_area} outside [0, 2pi]")));
    }
    if phase_spread < 0.0 {
        return Err(Error::Domain("phase spread must be nonnegative".into()));
    }
    let (lo, hi) = dispersion
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    let range = hi - lo;
    if phase_spread > 0.0 && !(range > 0.0) {
        return Err(Error::DegenerateSpread(phase_spread));
    }

    let bloch = couplings
        .zeta
        .iter()
        .zip(dispersion)
        .map(|(&z, &eps)| {
            let theta = z * drive_area;
            let sx = 0.5 * theta.sin();
            let sz = -0.5 * theta.cos();
            if phase_spread > 0.0 {
                let phi = phase_spread * (eps - lo) / range;
                [sx * phi.cos(), sx * phi.sin(), sz]
            } else {
                [sx, 0.0, sz]
            }
        })
        .collect();
    Ok(SpinEnsembleState { bloch, levels: None, time: 0.0 })
}

/// `sum_k zeta_k (Sx_k - i Sy_k)`, the weighted collective coherence.
pub fn collective_coherence(state: &SpinEnsembleState, zeta: &[f64]) -> C64 {
    let (a, b) = state
        .bloch
        .iter()
        .zip(zeta)
        .fold((0.0, 0.0), |(a, b), (s, z)| (a + z * s[0], b + z * s[1]));
    C64::new(a, -b)
}

/// Order parameter with the reference value used for normalization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexOrderParameter {
    pub value: C64,
    pub init: f64,
}

impl ComplexOrderParameter {
    pub fn normalized(&self) -> f64 {
        self.value.norm() / self.init
    }
}

/// `Delta_BCS = chi * sum_k zeta_k <S_k^->` (rad/s).
pub fn order_parameter(state: &SpinEnsembleState, params: &ModelParams) -> C64 {
    params.chi * collective_coherence(state, &params.couplings.zeta)
}

/// Output field `alpha_out = -(g/delta_c) sqrt(kappa_m) (Delta/chi)` in sqrt(photons/s).
pub fn output_field(delta: C64, g: f64, delta_c: f64, kappa_m: f64, chi: f64) -> Result<C64> {
    if delta_c == 0.0 {
        return Err(Error::DivisionByZero("cavity detuning delta_c"));
    }
    if chi == 0.0 {
        return Err(Error::DivisionByZero("exchange rate chi"));
    }
    Ok(-(g / delta_c) * kappa_m.sqrt() * (delta / chi))
}

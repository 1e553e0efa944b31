//! JSON run configuration.
//!
//! Frequencies are ordinary frequencies in MHz (`f = omega / 2pi`) and times
//! are in microseconds; everything is converted to rad/s and seconds before it
//! reaches the simulation code. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::dynamics::{QuenchSchedule, Rates, Stage, Trigger};
use crate::error::{Error, Result};
use crate::lax::PhaseMode;
use crate::model::{
    cavity_exchange_rate, mhz_to_rad, superradiance_rate, CouplingKind, DispersionKind, DispersionSpec, Sampling,
};
use crate::motion::{self, MotionParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Quench,
    Staged,
    Scan2d,
    Lax,
    Twospin,
    Analyze,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Quench => "quench",
            Mode::Staged => "staged",
            Mode::Scan2d => "scan2d",
            Mode::Lax => "lax",
            Mode::Twospin => "twospin",
            Mode::Analyze => "analyze",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must match the subcommand when given.
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub schedule: Vec<StageConfig>,
    #[serde(default)]
    pub numerics: Option<NumericsConfig>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub lax: Option<LaxConfig>,
    #[serde(default)]
    pub twospin: Option<TwoSpinConfig>,
    #[serde(default)]
    pub analyze: Option<AnalyzeConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    #[serde(default = "default_dispersion_kind")]
    pub kind: DispersionKind,
    #[serde(default)]
    pub delta_s_mhz: f64,
    pub e_w_mhz: f64,
    #[serde(default)]
    pub e_w_second_mhz: Option<f64>,
    /// Explicit energies (MHz) for the `empirical` kind.
    #[serde(default)]
    pub empirical_mhz: Option<Vec<f64>>,
    #[serde(default)]
    pub sampling: Sampling,
    /// Defaults to the run seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_dispersion_kind() -> DispersionKind {
    DispersionKind::BimodalUniform
}

impl DispersionConfig {
    pub fn to_spec(&self, run_seed: u64) -> DispersionSpec {
        DispersionSpec {
            kind: self.kind,
            delta_s: mhz_to_rad(self.delta_s_mhz),
            e_w: mhz_to_rad(self.e_w_mhz),
            e_w_second: self.e_w_second_mhz.map(mhz_to_rad),
            empirical_samples: self.empirical_mhz.as_ref().map(|v| v.iter().map(|f| mhz_to_rad(*f)).collect()),
            seed: self.seed.unwrap_or(run_seed),
            sampling: self.sampling,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    /// Cavity linewidth `kappa/2pi`.
    pub kappa_mhz: f64,
    /// Cavity detuning `delta_c/2pi`.
    pub delta_c_mhz: f64,
    /// Single-atom coupling `g/2pi`; when given, fixes `chi` instead of `chi_n_mhz`.
    #[serde(default)]
    pub g_mhz: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct MotionConfig {
    #[serde(default = "default_trap_mhz")]
    pub trap_mhz: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_temperature")]
    pub temperature_uk: f64,
    /// Defaults to the smallest level holding 99.9% of the thermal weight.
    #[serde(default)]
    pub n_max: Option<u32>,
    #[serde(default = "default_gamma_mo")]
    pub gamma_mo_mhz: f64,
    /// Largest `|n - m|` kept in the coupling (1 or 2).
    #[serde(default = "default_order")]
    pub order: u32,
    #[serde(default = "default_site")]
    pub site: CouplingKind,
}

fn default_trap_mhz() -> f64 {
    0.165
}
fn default_eta() -> f64 {
    0.17
}
fn default_temperature() -> f64 {
    15.0
}
fn default_gamma_mo() -> f64 {
    0.015
}
fn default_order() -> u32 {
    1
}
fn default_site() -> CouplingKind {
    CouplingKind::Incommensurate
}

impl MotionConfig {
    pub fn to_params(&self, seed: u64) -> MotionParams {
        let omega_t = mhz_to_rad(self.trap_mhz);
        let nbar = motion::nbar_from_temperature(self.temperature_uk * 1e-6, omega_t);
        MotionParams {
            omega_t,
            eta: self.eta,
            nbar,
            n_max: self.n_max.unwrap_or_else(|| motion::default_n_max(nbar)),
            phi: crate::model::incommensurate_phase(),
            gamma_mo: mhz_to_rad(self.gamma_mo_mhz),
            order: self.order,
            site: self.site,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Collective interaction `chi N/2pi`.
    #[serde(default)]
    pub chi_n_mhz: Option<f64>,
    #[serde(default = "default_couplings")]
    pub couplings: CouplingKind,
    pub dispersion: DispersionConfig,
    /// Pulse area in units of pi.
    #[serde(default = "default_drive_area")]
    pub drive_area_pi: f64,
    /// Phase spread `phi0` (rad).
    #[serde(default)]
    pub phase_spread: f64,
    #[serde(default)]
    pub gamma_mhz: f64,
    /// Collective superradiance rate `Gamma N/2pi`; overrides the cavity value.
    #[serde(default)]
    pub big_gamma_n_mhz: Option<f64>,
    #[serde(default)]
    pub cavity: Option<CavityConfig>,
    /// Elastic dephasing; defaults to 0.5 kHz unless `ac_shift_mhz` is given.
    #[serde(default)]
    pub gamma_el_mhz: Option<f64>,
    /// AC Stark shift `f_AC` feeding `gamma_el/2pi = 0.0036 f_AC + 4 kHz`.
    #[serde(default)]
    pub ac_shift_mhz: Option<f64>,
    #[serde(default)]
    pub motion: Option<MotionConfig>,
}

fn default_couplings() -> CouplingKind {
    CouplingKind::Homogeneous
}
fn default_drive_area() -> f64 {
    0.5
}

/// Rates in rad/s resolved from a model section.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolvedRates {
    pub chi_n: f64,
    pub gamma: f64,
    pub big_gamma_n: f64,
    pub gamma_el: f64,
}

impl ModelConfig {
    /// `chi N`, `gamma`, `Gamma N` and `gamma_el` in rad/s for `n_eff` atoms.
    pub fn rates(&self, n_eff: f64) -> Result<ResolvedRates> {
        let chi_n = match (&self.cavity, self.chi_n_mhz) {
            (_, Some(c)) => mhz_to_rad(c),
            (Some(CavityConfig { g_mhz: Some(g), kappa_mhz, delta_c_mhz }), None) => {
                n_eff * cavity_exchange_rate(mhz_to_rad(*g), mhz_to_rad(*kappa_mhz), mhz_to_rad(*delta_c_mhz))
            }
            _ => return Err(Error::Config("model needs chi_n_mhz or cavity.g_mhz".into())),
        };
        let big_gamma_n = match (self.big_gamma_n_mhz, &self.cavity) {
            (Some(g), _) => mhz_to_rad(g),
            (None, Some(c)) => superradiance_rate(chi_n, mhz_to_rad(c.kappa_mhz), mhz_to_rad(c.delta_c_mhz)),
            (None, None) => 0.0,
        };
        let gamma_el = match (self.gamma_el_mhz, self.ac_shift_mhz) {
            (Some(g), _) => mhz_to_rad(g),
            (None, Some(f)) => motion::gamma_el_from_ac_shift(f * 1e6),
            (None, None) => motion::GAMMA_EL_CONSTANT,
        };
        Ok(ResolvedRates { chi_n, gamma: mhz_to_rad(self.gamma_mhz), big_gamma_n, gamma_el })
    }

    pub fn zero_dissipation(&mut self) {
        self.gamma_mhz = 0.0;
        self.big_gamma_n_mhz = Some(0.0);
        self.gamma_el_mhz = Some(0.0);
        self.ac_shift_mhz = None;
        self.motion = None;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum TriggerConfig {
    AtTimeUs(f64),
    FirstMinimum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    #[serde(default)]
    pub gamma_mhz: f64,
    #[serde(default)]
    pub big_gamma_n_mhz: f64,
    #[serde(default)]
    pub gamma_el_mhz: f64,
    #[serde(default)]
    pub gamma_mo_mhz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    pub trigger: TriggerConfig,
    #[serde(default)]
    pub dispersion: Option<DispersionConfig>,
    /// Rates after the switch.
    #[serde(default)]
    pub rates: Option<RatesConfig>,
}

pub fn build_schedule(stages: &[StageConfig], seed: u64, n_eff: f64, ideal: bool) -> QuenchSchedule {
    QuenchSchedule {
        stages: stages
            .iter()
            .map(|s| Stage {
                trigger: match s.trigger {
                    TriggerConfig::AtTimeUs(t) => Trigger::AtTime(t * 1e-6),
                    TriggerConfig::FirstMinimum => Trigger::AtFirstMinimum,
                },
                dispersion: s.dispersion.as_ref().map(|d| d.to_spec(seed)),
                couplings: None,
                rates: s.rates.as_ref().map(|r| {
                    let k = if ideal { 0.0 } else { 1.0 };
                    Rates {
                        gamma: k * mhz_to_rad(r.gamma_mhz),
                        big_gamma: k * mhz_to_rad(r.big_gamma_n_mhz) / n_eff,
                        gamma_el: k * mhz_to_rad(r.gamma_el_mhz),
                        gamma_mo: k * mhz_to_rad(r.gamma_mo_mhz),
                    }
                }),
            })
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    pub n_spins: usize,
    pub dt_us: f64,
    pub t_end_us: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_late_window")]
    pub late_window_us: [f64; 2],
    #[serde(default)]
    pub decay_window_us: Option<[f64; 2]>,
    #[serde(default = "default_detrend")]
    pub detrend_order: usize,
    #[serde(default = "default_theta_avg")]
    pub theta_avg: f64,
    #[serde(default = "default_theta_osc")]
    pub theta_osc: f64,
    /// Experimental II' threshold on `avg`.
    #[serde(default)]
    pub theta_prime: Option<f64>,
}

fn default_late_window() -> [f64; 2] {
    [3.0, 8.0]
}
fn default_detrend() -> usize {
    2
}
fn default_theta_avg() -> f64 {
    0.05
}
fn default_theta_osc() -> f64 {
    0.03
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            late_window_us: default_late_window(),
            decay_window_us: None,
            detrend_order: default_detrend(),
            theta_avg: default_theta_avg(),
            theta_osc: default_theta_osc(),
            theta_prime: None,
        }
    }
}

impl AnalysisConfig {
    pub fn thresholds(&self) -> crate::analysis::Thresholds {
        crate::analysis::Thresholds { avg: self.theta_avg, osc: self.theta_osc, prime: self.theta_prime }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n).map(|k| self.min + (self.max - self.min) * k as f64 / (n - 1) as f64).collect(),
        }
    }
}

/// Idealized grid over `(chi N/E_W, delta_s/E_W)`; times in units of `1/E_W`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub chi_ratio: GridAxis,
    pub delta_ratio: GridAxis,
    #[serde(default = "default_scan_e_w")]
    pub e_w_mhz: f64,
    pub n_spins: usize,
    #[serde(default = "default_scan_couplings")]
    pub couplings: CouplingKind,
    #[serde(default = "default_scan_drive")]
    pub drive_area_pi: f64,
    /// Late window in units of `1/(chi N)`; the default is 3-8 us at `chi N/2pi = 1.2 MHz`.
    #[serde(default = "default_scan_window")]
    pub window_chi_n: [f64; 2],
    /// Points closer than this relative distance to a boundary are excluded from the agreement score.
    #[serde(default = "default_boundary_margin")]
    pub boundary_margin: f64,
    /// Step in units of `1/E_W`; chosen from the stability guard when absent.
    #[serde(default)]
    pub dt_ew: Option<f64>,
    #[serde(default)]
    pub phase_mode: PhaseMode,
}

fn default_scan_e_w() -> f64 {
    1.0
}
fn default_scan_couplings() -> CouplingKind {
    CouplingKind::RandomCos
}
fn default_scan_drive() -> f64 {
    0.586
}
fn default_scan_window() -> [f64; 2] {
    let chi_n = mhz_to_rad(1.2);
    [3e-6 * chi_n, 8e-6 * chi_n]
}
fn default_boundary_margin() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct LaxConfig {
    /// `(chi N/E_W, delta_s/E_W)` pairs.
    pub points: Vec<[f64; 2]>,
    #[serde(default)]
    pub phase_mode: PhaseMode,
    #[serde(default)]
    pub boundary_chi: Option<[f64; 2]>,
    #[serde(default)]
    pub boundary_delta: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TwoSpinConfig {
    pub chi_n_mhz: f64,
    pub delta_s_mhz: f64,
    pub t_end_us: f64,
    pub dt_us: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    /// Trajectory CSV with columns `t_s, re_delta, im_delta, abs_norm`.
    pub input: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    /// File-name prefix; defaults to the mode name.
    #[serde(default)]
    pub prefix: Option<String>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_out_dir(), prefix: None }
    }
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Check that the sections the mode needs are present and sane.
    pub fn validate(&self, mode: Mode) -> Result<()> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(Error::Config(format!("config is for mode {} but {} was requested", m.name(), mode.name())));
            }
        }
        let need = |present: bool, what: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!("mode {} needs a `{what}` section", mode.name())))
            }
        };
        let a = &self.analysis;
        if !(a.late_window_us[0] < a.late_window_us[1]) || a.theta_avg < 0.0 || a.theta_osc < 0.0 {
            return Err(Error::Config("analysis window must increase and thresholds be nonnegative".into()));
        }
        match mode {
            Mode::Quench | Mode::Staged => {
                need(self.model.is_some(), "model")?;
                need(self.numerics.is_some(), "numerics")?;
                let n = self.numerics.as_ref().unwrap();
                if n.n_spins == 0 || !(n.dt_us > 0.0) || !(n.t_end_us > 0.0) {
                    return Err(Error::Config("numerics needs n_spins > 0, dt_us > 0, t_end_us > 0".into()));
                }
                let m = self.model.as_ref().unwrap();
                if m.chi_n_mhz.is_none() && m.cavity.as_ref().and_then(|c| c.g_mhz).is_none() {
                    return Err(Error::Config("model needs chi_n_mhz or cavity.g_mhz".into()));
                }
                if mode == Mode::Staged && !self.schedule.iter().any(|s| s.trigger == TriggerConfig::FirstMinimum) {
                    return Err(Error::Config("staged mode needs a first_minimum stage".into()));
                }
            }
            Mode::Scan2d => {
                need(self.scan.is_some(), "scan")?;
                let s = self.scan.as_ref().unwrap();
                if s.n_spins == 0 || !(s.e_w_mhz > 0.0) || !(0.0 <= s.window_chi_n[0] && s.window_chi_n[0] < s.window_chi_n[1]) {
                    return Err(Error::Config("scan needs n_spins > 0, e_w_mhz > 0 and an increasing window".into()));
                }
                if s.chi_ratio.steps > 0 && !(s.chi_ratio.min > 0.0) {
                    return Err(Error::Config("scan chi_ratio must be positive".into()));
                }
            }
            Mode::Lax => need(self.lax.is_some(), "lax")?,
            Mode::Twospin => {
                need(self.twospin.is_some(), "twospin")?;
                let t = self.twospin.as_ref().unwrap();
                if !(t.chi_n_mhz > 0.0 && t.delta_s_mhz >= 0.0 && t.dt_us > 0.0 && t.t_end_us > 0.0) {
                    return Err(Error::Config("twospin needs chi_n_mhz > 0, delta_s_mhz >= 0, dt_us, t_end_us > 0".into()));
                }
            }
            Mode::Analyze => need(self.analyze.is_some(), "analyze")?,
        }
        Ok(())
    }
}

/// JSON Schema of [`RunConfig`].
pub fn schema_json() -> String {
    let schema = schemars::schema_for!(RunConfig);
    serde_json::to_string_pretty(&schema).expect("schema serializes") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUENCH: &str = r#"{
        "mode": "quench",
        "model": {
            "chi_n_mhz": 1.2,
            "dispersion": { "kind": "uniform", "e_w_mhz": 0.83 }
        },
        "numerics": { "n_spins": 100, "dt_us": 0.001, "t_end_us": 8.0 }
    }"#;

    #[test]
    fn parses_minimal_quench() {
        let c = RunConfig::from_json_str(QUENCH).unwrap();
        c.validate(Mode::Quench).unwrap();
        assert!(c.validate(Mode::Scan2d).is_err());
        let r = c.model.as_ref().unwrap().rates(100.0).unwrap();
        assert!((r.chi_n - std::f64::consts::TAU * 1.2e6).abs() < 1e-6);
        assert_eq!(r.gamma_el, motion::GAMMA_EL_CONSTANT);
        assert_eq!(c.analysis.late_window_us, [3.0, 8.0]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = QUENCH.replace("\"n_spins\"", "\"n_spin\": 3, \"n_spins\"");
        assert!(matches!(RunConfig::from_json_str(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn ideal_zeroes_rates() {
        let mut m = RunConfig::from_json_str(QUENCH).unwrap().model.unwrap();
        m.gamma_mhz = 0.1;
        m.zero_dissipation();
        let r = m.rates(10.0).unwrap();
        assert_eq!((r.gamma, r.big_gamma_n, r.gamma_el), (0.0, 0.0, 0.0));
    }

    #[test]
    fn trigger_forms() {
        let s: StageConfig = serde_json::from_str(r#"{"trigger": "first_minimum"}"#).unwrap();
        assert_eq!(s.trigger, TriggerConfig::FirstMinimum);
        let s: StageConfig = serde_json::from_str(r#"{"trigger": {"at_time_us": 1.5}}"#).unwrap();
        assert_eq!(s.trigger, TriggerConfig::AtTimeUs(1.5));
    }

    #[test]
    fn grid_axis_values() {
        assert_eq!(GridAxis { min: 0.0, max: 1.0, steps: 3 }.values(), vec![0.0, 0.5, 1.0]);
        assert!(GridAxis { min: 0.0, max: 1.0, steps: 0 }.values().is_empty());
    }
}

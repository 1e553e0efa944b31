//! Run orchestration behind the command-line tool.
//!
//! Every mode computes all of its outputs in memory first and only then
//! writes them, so a rejected config or a failed guard leaves no files behind.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{self, PhaseMetrics};
use crate::config::{build_schedule, Mode, RunConfig, ScanConfig};
use crate::dynamics::{self, Trajectory, STABILITY_LIMIT};
use crate::error::{Error, Result};
use crate::lax::{self, LaxParams, PhaseLabel, PhaseMode};
use crate::model::{
    build_dispersion, mhz_to_rad, prepare_initial_state, sample_couplings, CouplingProfile, DispersionSpec,
    ModelParams, SpinEnsembleState, C64,
};
use crate::motion;
use crate::twospin::{self, TwoSpinParams};

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Zero every dissipation rate and drop motion.
    pub ideal: bool,
}

/// Files written by a run.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
}

impl Error {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 3,
            Error::Io(_) => 4,
            Error::Analysis(_) | Error::WindowTooShort { .. } | Error::Rank(_) => 6,
            _ => 5,
        }
    }
}

/// Named file contents produced by a mode.
struct Artifacts(Vec<(String, Vec<u8>)>);

impl Artifacts {
    fn new() -> Self {
        Self(Vec::new())
    }

    fn add(&mut self, name: String, bytes: Vec<u8>) {
        self.0.push((name, bytes));
    }

    fn json<T: Serialize>(&mut self, name: String, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }
}

fn csv_bytes<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

#[derive(Serialize)]
struct Manifest<'a> {
    mode: &'a str,
    version: &'a str,
    seed: u64,
    config_sha256: String,
    files: Vec<String>,
    created_unix: u64,
}

/// Resolve overrides, validate, compute and write the outputs of `mode`.
pub fn run(mode: Mode, config: &RunConfig, opts: &RunOptions) -> Result<RunOutput> {
    let mut cfg = config.clone();
    if let Some(seed) = opts.seed {
        if let Some(n) = cfg.numerics.as_mut() {
            n.seed = seed;
        }
    }
    if let Some(dir) = &opts.out_dir {
        cfg.output.dir = dir.clone();
    }
    if opts.ideal {
        if let Some(m) = cfg.model.as_mut() {
            m.zero_dissipation();
        }
        for s in cfg.schedule.iter_mut() {
            s.rates = None;
        }
    }
    cfg.validate(mode)?;
    let seed = opts.seed.or(cfg.numerics.as_ref().map(|n| n.seed)).unwrap_or(0);
    let prefix = cfg.output.prefix.clone().unwrap_or_else(|| mode.name().to_string());

    let compute = || -> Result<Artifacts> {
        match mode {
            Mode::Quench | Mode::Staged => quench_artifacts(&cfg, mode, seed, &prefix),
            Mode::Scan2d => scan_artifacts(&cfg, seed, &prefix),
            Mode::Lax => lax_artifacts(&cfg, &prefix),
            Mode::Twospin => twospin_artifacts(&cfg, &prefix),
            Mode::Analyze => analyze_artifacts(&cfg, &prefix),
        }
    };
    let artifacts = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(compute)?,
        None => compute()?,
    };

    let config_json = cfg.to_json();
    let manifest = Manifest {
        mode: mode.name(),
        version: env!("CARGO_PKG_VERSION"),
        seed,
        config_sha256: hex::encode(Sha256::digest(config_json.as_bytes())),
        files: artifacts.0.iter().map(|(n, _)| n.clone()).collect(),
        created_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let mut all = artifacts;
    all.json(format!("{prefix}_manifest.json"), &manifest)?;
    write_all(&cfg.output.dir, &all)
}

fn write_all(dir: &Path, artifacts: &Artifacts) -> Result<RunOutput> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for (name, bytes) in &artifacts.0 {
        let path = dir.join(name);
        std::fs::write(&path, bytes)?;
        files.push(path);
    }
    Ok(RunOutput { files })
}

/// Parameters and initial state of a single (motionless) quench.
pub fn build_quench(cfg: &RunConfig, seed: u64) -> Result<(ModelParams, SpinEnsembleState)> {
    let model = cfg.model.as_ref().ok_or_else(|| Error::Config("missing model".into()))?;
    let n = cfg.numerics.as_ref().ok_or_else(|| Error::Config("missing numerics".into()))?.n_spins;
    let couplings = sample_couplings(model.couplings, n, seed);
    let rates = model.rates(couplings.n_eff)?;
    let dispersion = build_dispersion(&model.dispersion.to_spec(seed), n)?;
    let state = prepare_initial_state(&couplings, model.drive_area_pi * PI, model.phase_spread, &dispersion)?;
    let mut params = ModelParams::ideal(rates.chi_n, couplings, dispersion);
    params.gamma = rates.gamma;
    params.big_gamma = rates.big_gamma_n / params.couplings.n_eff;
    params.gamma_el = rates.gamma_el;
    params.validate()?;
    Ok((params, state))
}

#[derive(Serialize)]
struct QuenchMetrics {
    delta_init_rad_s: f64,
    late_window_s: [f64; 2],
    late: Option<PhaseMetrics>,
    label: Option<PhaseLabel>,
    decay: Option<analysis::DecayFit>,
    switch_times_s: Vec<f64>,
    final_total_sz: f64,
    note: Option<String>,
}

fn quench_artifacts(cfg: &RunConfig, mode: Mode, seed: u64, prefix: &str) -> Result<Artifacts> {
    let numerics = cfg.numerics.as_ref().unwrap();
    let model = cfg.model.as_ref().unwrap();
    let (dt, t_end) = (numerics.dt_us * 1e-6, numerics.t_end_us * 1e-6);
    let (mut params, state) = build_quench(cfg, seed)?;
    let schedule = build_schedule(&cfg.schedule, seed, params.couplings.n_eff, false);

    let traj = match &model.motion {
        Some(mc) => {
            if !schedule.stages.is_empty() {
                return Err(Error::Config("schedules are not supported together with motion".into()));
            }
            let mp = mc.to_params(seed);
            params.gamma_mo = mp.gamma_mo;
            let n = params.n_spins();
            params.couplings = CouplingProfile {
                kind: mp.site,
                zeta: mp.site_phases(n).into_iter().map(f64::cos).collect(),
                n_eff: n as f64 / 2.0,
            };
            params.chi = model.rates(params.couplings.n_eff)?.chi_n / params.couplings.n_eff;
            let levels = motion::thermal_sample(&mp, n, seed);
            let ms = motion::prepare_motional_state(&params, &mp, &levels, model.drive_area_pi * PI, model.phase_spread)?;
            motion::evolve_motion(&ms, &params, &mp, dt, t_end)?
        }
        None if mode == Mode::Staged => dynamics::staged_quench(&state, &params, &schedule, dt, t_end)?,
        None => dynamics::evolve(&state, &params, &schedule, dt, t_end)?,
    };

    let mut art = Artifacts::new();
    let rows = traj
        .times
        .iter()
        .zip(&traj.delta)
        .zip(&traj.norm_delta)
        .map(|((t, d), n)| (*t, d.re, d.im, *n));
    art.add(format!("{prefix}_trajectory.csv"), csv_bytes(&["t_s", "re_delta", "im_delta", "abs_norm"], rows)?);

    let a = &cfg.analysis;
    let (t1, t2) = (a.late_window_us[0] * 1e-6, a.late_window_us[1] * 1e-6);
    let mut note = None;
    let late = match analysis::phase_metrics(&traj, t1, t2, a.detrend_order) {
        Ok(m) => Some(m),
        Err(e) => {
            note = Some(format!("late-window metrics skipped: {e}"));
            None
        }
    };
    if late.is_some() {
        let spec = analysis::spectrum(&traj, t1, t2, a.detrend_order)?;
        art.add(format!("{prefix}_spectrum.csv"), spectrum_csv(&spec)?);
    }
    let decay = match a.decay_window_us {
        Some([d1, d2]) => Some(analysis::decay_time(&traj, d1 * 1e-6, d2 * 1e-6)?),
        None => None,
    };
    let metrics = QuenchMetrics {
        delta_init_rad_s: traj.delta_init,
        late_window_s: [t1, t2],
        label: late.as_ref().map(|m| analysis::classify_phase_dynamical(m, &a.thresholds())),
        late,
        decay,
        switch_times_s: traj.switches.iter().map(|s| s.1).collect(),
        final_total_sz: traj.final_state.total_sz(),
        note,
    };
    art.json(format!("{prefix}_metrics.json"), &metrics)?;
    Ok(art)
}

fn spectrum_csv(spec: &analysis::Spectrum) -> Result<Vec<u8>> {
    csv_bytes(&["freq_hz", "power"], spec.frequencies.iter().zip(&spec.power).map(|(f, p)| (*f, *p)))
}

/// Outcome of one idealized scan point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub i: usize,
    pub j: usize,
    pub chi_ratio: f64,
    pub delta_ratio: f64,
    pub metrics: PhaseMetrics,
    pub label: PhaseLabel,
    pub analytic: PhaseLabel,
    pub off_boundary: bool,
}

/// Idealized quench at `(chi N/E_W, delta_s/E_W)` analysed on the late window.
pub fn scan_point(
    scan: &ScanConfig,
    analysis_cfg: &crate::config::AnalysisConfig,
    seed: u64,
    (i, j): (usize, usize),
    chi_ratio: f64,
    delta_ratio: f64,
) -> Result<ScanPoint> {
    let traj = scan_trajectory(scan, seed, chi_ratio, delta_ratio)?;
    let chi_n = chi_ratio * mhz_to_rad(scan.e_w_mhz);
    let (t1, t2) = (scan.window_chi_n[0] / chi_n, scan.window_chi_n[1] / chi_n);
    let metrics = analysis::phase_metrics(&traj, t1, t2, analysis_cfg.detrend_order)?;
    let label = analysis::classify_phase_dynamical(&metrics, &analysis_cfg.thresholds());
    let analytic = lax::classify_phase_analytic(&LaxParams::from_ratios(chi_ratio, delta_ratio.max(0.0))?, scan.phase_mode);
    Ok(ScanPoint {
        i,
        j,
        chi_ratio,
        delta_ratio,
        metrics,
        label,
        analytic,
        off_boundary: lax::is_away_from_boundary(chi_ratio, delta_ratio, scan.boundary_margin),
    })
}

/// Trajectory of one scan point, run to the end of the late window.
pub fn scan_trajectory(scan: &ScanConfig, seed: u64, chi_ratio: f64, delta_ratio: f64) -> Result<Trajectory> {
    let e_w = mhz_to_rad(scan.e_w_mhz);
    let n = scan.n_spins;
    let couplings = sample_couplings(scan.couplings, n, seed);
    let dispersion = build_dispersion(&DispersionSpec::bimodal(delta_ratio * e_w, e_w), n)?;
    let state = prepare_initial_state(&couplings, scan.drive_area_pi * PI, 0.0, &dispersion)?;
    let params = ModelParams::ideal(chi_ratio * e_w, couplings, dispersion);
    let dt = match scan.dt_ew {
        Some(d) => d / e_w,
        None => 0.8 * STABILITY_LIMIT / params.frequency_scale(),
    };
    dynamics::evolve(&state, &params, &dynamics::QuenchSchedule::none(), dt, scan.window_chi_n[1] / (chi_ratio * e_w) + dt)
}

/// All grid points in row-major `(chi, delta)` order, computed in parallel.
pub fn scan_grid(cfg: &RunConfig, seed: u64) -> Result<Vec<ScanPoint>> {
    let scan = cfg.scan.as_ref().ok_or_else(|| Error::Config("missing scan".into()))?;
    let chis = scan.chi_ratio.values();
    let deltas = scan.delta_ratio.values();
    let points: Vec<(usize, usize)> =
        (0..chis.len()).flat_map(|i| (0..deltas.len()).map(move |j| (i, j))).collect();
    points
        .par_iter()
        .map(|&(i, j)| scan_point(scan, &cfg.analysis, seed, (i, j), chis[i], deltas[j]))
        .collect()
}

/// Fraction of off-boundary points whose dynamical label matches the analytic one.
pub fn agreement(points: &[ScanPoint]) -> (usize, usize) {
    let off: Vec<&ScanPoint> = points.iter().filter(|p| p.off_boundary).collect();
    (off.iter().filter(|p| p.label.matches(p.analytic)).count(), off.len())
}

#[derive(Serialize)]
struct ScanSummary {
    points: usize,
    off_boundary: usize,
    agreeing: usize,
    agreement: Option<f64>,
    phase_mode: PhaseMode,
}

fn boundaries_csv(chi: (f64, f64), delta: (f64, f64)) -> Result<Vec<u8>> {
    let curves = lax::boundary_curves(chi, delta, 200)?;
    let rows: Vec<(String, f64, f64)> = curves
        .iter()
        .flat_map(|c| {
            let name = serde_json::to_value(c.boundary).unwrap().as_str().unwrap().to_string();
            c.points.iter().map(move |(x, y)| (name.clone(), *x, *y))
        })
        .collect();
    csv_bytes(&["boundary", "chi_ratio", "delta_ratio"], rows)
}

/// Write the phase-diagram files for a finished scan.
fn emit_phase_diagram(art: &mut Artifacts, prefix: &str, points: &[ScanPoint], scan: &ScanConfig) -> Result<()> {
    let freq_hz = |p: &ScanPoint| p.metrics.osc_freq.unwrap_or(f64::NAN);
    let rows = points.iter().map(|p| {
        (
            p.i,
            p.j,
            p.chi_ratio,
            p.delta_ratio,
            p.metrics.avg,
            p.metrics.std,
            p.metrics.osc_amp,
            freq_hz(p),
            p.label.to_string(),
            p.analytic.to_string(),
            p.off_boundary,
        )
    });
    art.add(
        format!("{prefix}_phase_diagram.csv"),
        csv_bytes(
            &[
                "i",
                "j",
                "chi_ratio",
                "delta_ratio",
                "avg",
                "std",
                "osc_amp",
                "osc_freq_hz",
                "label",
                "analytic_label",
                "off_boundary",
            ],
            rows,
        )?,
    );
    let header = ["chi_ratio", "delta_ratio", "value"];
    let observables: [(&str, fn(&ScanPoint) -> f64); 4] = [
        ("avg", |p| p.metrics.avg),
        ("std", |p| p.metrics.std),
        ("osc_amp", |p| p.metrics.osc_amp),
        ("osc_freq_hz", |p| p.metrics.osc_freq.unwrap_or(f64::NAN)),
    ];
    for (name, get) in observables {
        let rows = points.iter().map(|p| (p.chi_ratio, p.delta_ratio, get(p)));
        art.add(format!("{prefix}_{name}.csv"), csv_bytes(&header, rows)?);
    }
    let rows = points.iter().map(|p| (p.chi_ratio, p.delta_ratio, p.label.to_string()));
    art.add(format!("{prefix}_label.csv"), csv_bytes(&header, rows)?);

    let range = |a: &crate::config::GridAxis| (a.min.min(a.max), a.max.max(a.min));
    let (chi, delta) = (range(&scan.chi_ratio), range(&scan.delta_ratio));
    let boundaries = if !points.is_empty() && chi.1 > chi.0 && delta.1 > delta.0 {
        boundaries_csv((chi.0.max(0.0), chi.1), (delta.0.max(0.0), delta.1))?
    } else {
        csv_bytes::<(String, f64, f64)>(&["boundary", "chi_ratio", "delta_ratio"], [])?
    };
    art.add(format!("{prefix}_boundaries.csv"), boundaries);

    let (agreeing, off) = agreement(points);
    art.json(
        format!("{prefix}_summary.json"),
        &ScanSummary {
            points: points.len(),
            off_boundary: off,
            agreeing,
            agreement: (off > 0).then(|| agreeing as f64 / off as f64),
            phase_mode: scan.phase_mode,
        },
    )
}

fn scan_artifacts(cfg: &RunConfig, seed: u64, prefix: &str) -> Result<Artifacts> {
    let points = scan_grid(cfg, seed)?;
    let mut art = Artifacts::new();
    emit_phase_diagram(&mut art, prefix, &points, cfg.scan.as_ref().unwrap())?;
    Ok(art)
}

#[derive(Serialize)]
struct LaxPointOut {
    chi_ratio: f64,
    delta_ratio: f64,
    label_analytic: PhaseLabel,
    label_numeric: PhaseLabel,
    count_pairs: usize,
    real_parts_nonzero: bool,
    /// `[re, im]` in units of `E_W`.
    roots: Vec<[f64; 2]>,
}

fn lax_artifacts(cfg: &RunConfig, prefix: &str) -> Result<Artifacts> {
    let lc = cfg.lax.as_ref().unwrap();
    let out: Vec<LaxPointOut> = lc
        .points
        .iter()
        .map(|&[c, d]| {
            let p = LaxParams::from_ratios(c, d)?;
            let roots = lax::find_roots_numeric(&p)?;
            let numeric = match lc.phase_mode {
                PhaseMode::Homogeneous => roots.label(),
                PhaseMode::Inhomogeneous => roots.label().inhomogeneous(),
            };
            Ok(LaxPointOut {
                chi_ratio: c,
                delta_ratio: d,
                label_analytic: lax::classify_phase_analytic(&p, lc.phase_mode),
                label_numeric: numeric,
                count_pairs: roots.count_pairs,
                real_parts_nonzero: roots.real_parts_nonzero,
                roots: roots.roots.iter().map(|u| [u.re, u.im]).collect(),
            })
        })
        .collect::<Result<_>>()?;
    let mut art = Artifacts::new();
    art.json(format!("{prefix}_roots.json"), &out)?;
    let chi = lc.boundary_chi.unwrap_or([0.05, 3.0]);
    let delta = lc.boundary_delta.unwrap_or([0.0, 3.0]);
    art.add(format!("{prefix}_boundaries.csv"), boundaries_csv((chi[0], chi[1]), (delta[0], delta[1]))?);
    Ok(art)
}

#[derive(Serialize)]
struct TwoSpinSummary {
    omega_rad_s: f64,
    freq_hz: f64,
    dip: bool,
    rms_numeric_vs_analytic: f64,
}

fn twospin_artifacts(cfg: &RunConfig, prefix: &str) -> Result<Artifacts> {
    let tc = cfg.twospin.as_ref().unwrap();
    let p = TwoSpinParams::new(mhz_to_rad(tc.chi_n_mhz), mhz_to_rad(tc.delta_s_mhz))?;
    let dt = tc.dt_us * 1e-6;
    dynamics::check_step(dt, p.chi_n.max(p.delta_s))?;
    let (times, numeric, _) = twospin::integrate_two_spin(&p, dt, tc.t_end_us * 1e-6);
    let analytic: Vec<f64> = times.iter().map(|t| twospin::two_spin_delta(*t, &p)).collect::<Result<_>>()?;
    let rms = (analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / times.len() as f64).sqrt();
    let f = twospin::two_spin_frequency(&p)?;
    let mut art = Artifacts::new();
    let rows = times.iter().zip(&analytic).zip(&numeric).map(|((t, a), n)| (*t, *a, *n));
    art.add(format!("{prefix}_trace.csv"), csv_bytes(&["t_s", "delta_analytic", "delta_numeric"], rows)?);
    art.json(
        format!("{prefix}_frequency.json"),
        &TwoSpinSummary { omega_rad_s: f.omega, freq_hz: f.omega / (2.0 * PI), dip: f.dip, rms_numeric_vs_analytic: rms },
    )?;
    Ok(art)
}

#[derive(Deserialize)]
struct TrajectoryRow {
    t_s: f64,
    re_delta: f64,
    im_delta: f64,
    abs_norm: f64,
}

/// Read a trajectory CSV written by the `quench` mode.
pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Analysis(format!("{other:?}")),
    })?;
    let rows: Vec<TrajectoryRow> = rdr
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Analysis(format!("bad trajectory row: {e}")))?;
    if rows.len() < 2 {
        return Err(Error::WindowTooShort { got: rows.len(), need: 2 });
    }
    let dt = rows[1].t_s - rows[0].t_s;
    if !(dt > 0.0) || rows.windows(2).any(|w| ((w[1].t_s - w[0].t_s) - dt).abs() > 1e-6 * dt) {
        return Err(Error::Analysis("trajectory times must be uniformly spaced".into()));
    }
    let first = C64::new(rows[0].re_delta, rows[0].im_delta).norm();
    let delta_init = if rows[0].abs_norm > 0.0 { first / rows[0].abs_norm } else { first };
    Ok(Trajectory {
        times: rows.iter().map(|r| r.t_s).collect(),
        delta: rows.iter().map(|r| C64::new(r.re_delta, r.im_delta)).collect(),
        norm_delta: rows.iter().map(|r| r.abs_norm).collect(),
        delta_init,
        snapshots: Vec::new(),
        switches: Vec::new(),
        final_state: SpinEnsembleState::ground(0),
        final_params: ModelParams::ideal(0.0, CouplingProfile::homogeneous(0), Vec::new()),
    })
}

#[derive(Serialize)]
struct AnalyzeOut {
    window_s: [f64; 2],
    metrics: PhaseMetrics,
    label: PhaseLabel,
    decay: Option<analysis::DecayFit>,
}

fn analyze_artifacts(cfg: &RunConfig, prefix: &str) -> Result<Artifacts> {
    let ac = cfg.analyze.as_ref().unwrap();
    let traj = read_trajectory_csv(&ac.input)?;
    let a = &cfg.analysis;
    let (t1, t2) = (a.late_window_us[0] * 1e-6, a.late_window_us[1] * 1e-6);
    let mut metrics = analysis::phase_metrics(&traj, t1, t2, a.detrend_order)?;
    let decay = match a.decay_window_us {
        Some([d1, d2]) => {
            let fit = analysis::decay_time(&traj, d1 * 1e-6, d2 * 1e-6)?;
            metrics.decay_time = Some(fit.one_over_e);
            Some(fit)
        }
        None => None,
    };
    let label = analysis::classify_phase_dynamical(&metrics, &a.thresholds());
    let spec = analysis::spectrum(&traj, t1, t2, a.detrend_order)?;
    let mut art = Artifacts::new();
    art.json(format!("{prefix}_metrics.json"), &AnalyzeOut { window_s: [t1, t2], metrics, label, decay })?;
    art.add(format!("{prefix}_spectrum.csv"), spectrum_csv(&spec)?);
    Ok(art)
}

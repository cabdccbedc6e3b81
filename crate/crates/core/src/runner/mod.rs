//! Experiment runner: executes the verification suites of one
//! configuration and writes JSON and CSV reports plus a manifest.

pub mod cache;
pub mod config;
pub mod presets;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{flow_invariants, orbit_catalog, period_action, reduced_period_set, FlowInvariants, PeriodEntry};
use crate::error::{Error, Result};
use crate::groups::{GroupKind, GroupModel};
use crate::hamiltonian::HamiltonianModel;
use crate::oracle::{grid_projector_oracle, OracleConfig, OracleReport, OracleStatus};
use crate::quantum::{smoothed_trace_of, Bump, SpectrumSource, TraceWindows};
use crate::reduction::{reduced_volume, reduced_volume_monte_carlo, ReducedVolumeResult};
use crate::verify::{
    action_regression_with, gutzwiller_peaks, weak_verify, weyl_verify, ActionEstimate, PeakReport, PeakSearch, Sector,
    VerificationReport,
};

pub use cache::{cache_info, clean, CacheInfo, CacheStats, SpectrumCache};
pub use config::{ExperimentConfig, Suite, Sweep};
pub use presets::{preset, presets, Preset};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Process exit code for an error that aborted a run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Command-line overrides applied on top of a configuration.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub suites: Option<Vec<Suite>>,
    pub jobs: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, mut config: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(s) = &self.suites {
            config.suites = s.clone();
        }
        if let Some(j) = self.jobs {
            config.jobs = Some(j);
        }
        if let Some(o) = &self.output_dir {
            config.output_dir = o.clone();
        }
        if let Some(c) = &self.cache_dir {
            config.cache_dir = c.clone();
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteStatus {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub status: SuiteStatus,
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub error: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Partial,
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub started_unix: f64,
    pub finished_unix: Option<f64>,
    pub status: RunStatus,
    pub suites: Vec<SuiteOutcome>,
    pub cache: CacheStats,
}

impl Manifest {
    pub fn exit_code(&self) -> i32 {
        if self.suites.iter().any(|s| s.status == SuiteStatus::Error) {
            EXIT_RUNTIME
        } else if self.suites.iter().any(|s| s.status == SuiteStatus::Fail) {
            EXIT_FAIL
        } else {
            EXIT_PASS
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorVerification {
    pub n: i64,
    pub report: VerificationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingSuiteReport {
    pub window: [f64; 2],
    /// Test function for the weak trace; `None` for the counting function.
    pub bump: Option<Bump>,
    pub h: Vec<f64>,
    pub sectors: Vec<SectorVerification>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorTrace {
    pub n: i64,
    pub peaks: PeakReport,
    pub action: Option<ActionEstimate>,
    pub action_error: Option<String>,
    /// |G_χ(h)|/d_χ at the primitive period and the peak-search h. Recorded
    /// for comparison across sectors; not part of the pass rule.
    pub amplitude_per_degree: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GutzwillerSuiteReport {
    pub energy: f64,
    /// The primitive period at `energy`, where the f̂ window is centred for
    /// the action regression.
    pub period: Option<PeriodEntry>,
    pub sectors: Vec<SectorTrace>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub energy: f64,
    pub period: f64,
    pub action: f64,
    /// Central difference of S(E).
    pub action_derivative: f64,
    pub derivative_error: f64,
    pub monodromy_trace: f64,
    pub nondegenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSuiteReport {
    pub window: [f64; 2],
    pub invariants: FlowInvariants,
    pub invariants_pass: bool,
    pub volume: Option<ReducedVolumeResult>,
    pub volume_monte_carlo: Option<ReducedVolumeResult>,
    pub volume_agrees: Option<bool>,
    pub orbits: Vec<OrbitRow>,
    pub period_set: Vec<PeriodEntry>,
    pub notes: Vec<String>,
    pub pass: bool,
}

/// Relative tolerance on dS/dE = T.
pub const ACTION_DERIVATIVE_TOL: f64 = 1e-6;
/// Allowed energy and momentum drift, in units of the integrator tolerance.
pub const DRIFT_FACTOR: f64 = 10.0;
/// Allowed distance between the projected full flow and the reduced flow.
pub const PROJECTION_TOL: f64 = 1e-7;

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Runs every requested suite. Configuration problems surface as `Err`;
/// failures inside a suite are recorded in the manifest.
pub fn run(config: &ExperimentConfig) -> Result<Manifest> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| run_in_pool(config))
}

fn run_in_pool(config: &ExperimentConfig) -> Result<Manifest> {
    fs::create_dir_all(&config.output_dir)?;
    let cache = SpectrumCache::open(&config.cache_dir, config.grid)?;
    let manifest_path = config.output_dir.join("manifest.json");
    let mut manifest = Manifest {
        name: config.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        started_unix: now(),
        finished_unix: None,
        status: RunStatus::Partial,
        suites: Vec::new(),
        cache: cache.stats(),
    };
    write_json(&manifest_path, &manifest)?;
    for suite in config.resolved_suites() {
        let start = Instant::now();
        let outcome = match run_suite(config, suite, &cache) {
            Ok((pass, json, csv)) => {
                let stem = config.output_dir.join(suite.name());
                let json_path = stem.with_extension("json");
                let csv_path = stem.with_extension("csv");
                write_atomic(&json_path, &json)?;
                write_atomic(&csv_path, csv.as_bytes())?;
                SuiteOutcome {
                    suite,
                    status: if pass { SuiteStatus::Pass } else { SuiteStatus::Fail },
                    json: Some(json_path),
                    csv: Some(csv_path),
                    error: None,
                    seconds: 0.0,
                }
            }
            Err(e) => SuiteOutcome {
                suite,
                status: SuiteStatus::Error,
                json: None,
                csv: None,
                error: Some(e.to_string()),
                seconds: 0.0,
            },
        };
        manifest.suites.push(SuiteOutcome {
            seconds: start.elapsed().as_secs_f64(),
            ..outcome
        });
        manifest.cache = cache.stats();
        write_json(&manifest_path, &manifest)?;
    }
    manifest.finished_unix = Some(now());
    manifest.status = if manifest.suites.iter().any(|s| s.status == SuiteStatus::Error) {
        RunStatus::Failed
    } else {
        RunStatus::Complete
    };
    write_json(&manifest_path, &manifest)?;
    Ok(manifest)
}

type SuiteOutput = (bool, Vec<u8>, String);

fn encode<T: Serialize>(pass: bool, report: &T, csv: String) -> Result<SuiteOutput> {
    let mut json = serde_json::to_vec_pretty(report)?;
    json.push(b'\n');
    Ok((pass, json, csv))
}

fn run_suite(config: &ExperimentConfig, suite: Suite, cache: &SpectrumCache) -> Result<SuiteOutput> {
    match suite {
        Suite::Weyl | Suite::Weak => {
            let r = counting_suite(config, suite == Suite::Weak, cache)?;
            encode(r.pass, &r, counting_csv(&r))
        }
        Suite::Gutzwiller => {
            let r = gutzwiller_suite(config, cache)?;
            encode(r.pass, &r, gutzwiller_csv(&r))
        }
        Suite::Oracle => {
            let r = oracle_suite(config)?;
            encode(r.status == OracleStatus::Pass, &r, oracle_csv(&r))
        }
        Suite::Classical => {
            let r = classical_suite(config)?;
            encode(r.pass, &r, classical_csv(&r))
        }
        Suite::All => unreachable!("resolved suites are concrete"),
    }
}

fn sector(config: &ExperimentConfig, n: i64) -> Sector {
    Sector::new(config.group, n, config.potential)
}

/// Counting function (or weak trace with a bump filling the window) in
/// every sector.
pub fn counting_suite(config: &ExperimentConfig, weak: bool, cache: &SpectrumCache) -> Result<CountingSuiteReport> {
    let [lo, hi] = config.window;
    let h = config.sweep.values();
    let bump = weak.then(|| Bump::new(0.5 * (lo + hi), 0.5 * (hi - lo)));
    let sectors = config
        .sorted_sectors()
        .into_iter()
        .map(|n| -> Result<_> {
            let s = sector(config, n);
            let report = match &bump {
                Some(f) => weak_verify(&s, f, &h, config.tolerances, cache)?,
                None => weyl_verify(&s, lo, hi, &h, config.tolerances, cache)?,
            };
            Ok(SectorVerification { n, report })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CountingSuiteReport {
        window: config.window,
        bump,
        h,
        pass: sectors.iter().all(|s| s.report.pass),
        sectors,
    })
}

/// Peaks of the time signal, and the action regression at the primitive
/// period.
pub fn gutzwiller_suite(config: &ExperimentConfig, cache: &SpectrumCache) -> Result<GutzwillerSuiteReport> {
    let energy = config.energy();
    let settings = config.gutzwiller;
    let model = HamiltonianModel::for_group(config.group, config.potential);
    let period = reduced_period_set(&model, energy, settings.t_max)?
        .into_iter()
        .find(|p| p.repetition == 1);
    let h_action = settings.action_sweep.values();
    let sectors = config
        .sorted_sectors()
        .into_iter()
        .map(|n| -> Result<_> {
            let s = sector(config, n);
            let peaks = gutzwiller_peaks(&s, &PeakSearch::new(energy, settings.h, settings.t_max), cache)?;
            let (action, action_error) = match period {
                Some(p) => {
                    let windows = TraceWindows::new(energy, p.t0);
                    match action_regression_with(&s, energy, &windows, &h_action, settings.noise_floor, cache) {
                        Ok(a) => (Some(a), None),
                        Err(e @ Error::PhaseUnwrap { .. }) => (None, Some(e.to_string())),
                        Err(e) => return Err(e),
                    }
                }
                None => (None, Some(format!("no periodic orbit with period below {}", settings.t_max))),
            };
            let amplitude_per_degree = match period {
                Some(p) => {
                    let windows = TraceWindows::new(energy, p.t0);
                    let (lo, hi) = windows.psi.support();
                    let spectrum = cache.spectrum(&s.query(settings.h), lo, hi)?;
                    let g = smoothed_trace_of(&spectrum, settings.h, energy, &windows).value.norm();
                    Some(g / spectrum.degree as f64)
                }
                None => None,
            };
            let pass = peaks.pass && action.as_ref().is_some_and(|a| a.pass);
            Ok(SectorTrace {
                n,
                peaks,
                action,
                action_error,
                amplitude_per_degree,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GutzwillerSuiteReport {
        energy,
        period,
        pass: sectors.iter().all(|s| s.pass),
        sectors,
    })
}

pub fn oracle_suite(config: &ExperimentConfig) -> Result<OracleReport> {
    let o = config.oracle;
    let oracle = OracleConfig {
        h: o.h,
        potential: config.potential,
        sectors: config.sorted_sectors(),
        n_r: o.n_r,
        n_theta: o.n_theta,
        levels: o.levels,
        seed: config.seed,
    };
    grid_projector_oracle(&oracle, &config.grid)
}

/// Flow invariants, reduced volume by two methods, and the period and
/// action table over the window.
pub fn classical_suite(config: &ExperimentConfig) -> Result<ClassicalSuiteReport> {
    let c = config.classical;
    let [lo, hi] = config.window;
    let group = GroupModel::new(config.group);
    let model = HamiltonianModel::for_group(config.group, config.potential);
    let mut notes = Vec::new();

    let invariants = flow_invariants(&group, config.potential, (lo, hi), c.trajectories, c.t_end, c.tol, config.seed)?;
    let invariants_pass = invariants.max_energy_drift < DRIFT_FACTOR * c.tol
        && invariants.max_momentum_drift < DRIFT_FACTOR * c.tol
        && invariants.max_projection_error.is_none_or(|e| e < PROJECTION_TOL);

    let volume = reduced_volume(&group, &model, lo, hi)?;
    let mc = reduced_volume_monte_carlo(&group, &model, lo, hi, c.monte_carlo_samples, config.seed.wrapping_add(1))?;
    let agrees = volume.agrees_with(&mc, 4.0);

    let energies: Vec<f64> = if c.energies == 1 {
        vec![0.5 * (lo + hi)]
    } else {
        (0..c.energies)
            .map(|k| lo + (hi - lo) * k as f64 / (c.energies - 1) as f64)
            .collect()
    };
    let mut orbits = Vec::new();
    let mut period_set = Vec::new();
    if !matches!(config.group, GroupKind::So2Planar | GroupKind::So3) {
        notes.push(format!("no radial periodic-orbit table for group {}", config.group));
    } else {
        let catalog = orbit_catalog(&model, &energies);
        let rows: Vec<Result<OrbitRow>> = catalog
            .into_par_iter()
            .zip(energies.par_iter())
            .map(|(data, &e)| {
                let data = data?;
                let step = 1e-4 * (hi - lo);
                let (_, s_plus) = period_action(&model, e + step)?;
                let (_, s_minus) = period_action(&model, e - step)?;
                let derivative = (s_plus - s_minus) / (2.0 * step);
                Ok(OrbitRow {
                    energy: e,
                    period: data.period,
                    action: data.action,
                    action_derivative: derivative,
                    derivative_error: (derivative - data.period).abs() / data.period,
                    monodromy_trace: data.trace(),
                    nondegenerate: data.nondegenerate,
                })
            })
            .collect();
        for r in rows {
            orbits.push(r?);
        }
        period_set = reduced_period_set(&model, config.energy(), config.gutzwiller.t_max)?;
    }
    let orbits_pass = orbits.iter().all(|o| o.derivative_error < ACTION_DERIVATIVE_TOL && o.nondegenerate);
    if !agrees {
        notes.push(format!(
            "reduced volume {} ± {} disagrees with Monte Carlo {} ± {}",
            volume.value, volume.error, mc.value, mc.error
        ));
    }
    Ok(ClassicalSuiteReport {
        window: config.window,
        invariants,
        invariants_pass,
        volume: Some(volume),
        volume_monte_carlo: Some(mc),
        volume_agrees: Some(agrees),
        pass: invariants_pass && agrees && orbits_pass,
        orbits,
        period_set,
        notes,
    })
}

fn counting_csv(r: &CountingSuiteReport) -> String {
    let mut rows = Vec::new();
    for s in &r.sectors {
        let rep = &s.report;
        for i in 0..rep.h.len() {
            rows.push((s.n, rep.h[i], rep.measured[i], rep.measured_errors[i], rep.predicted[i], rep.relative_errors[i]));
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out = String::from("n,h,measured,measured_error,predicted,relative_error\n");
    for (n, h, m, e, p, rel) in rows {
        let _ = writeln!(out, "{n},{h},{m},{e},{p},{rel}");
    }
    out
}

fn gutzwiller_csv(r: &GutzwillerSuiteReport) -> String {
    let mut out = String::from("n,h,kind,t,value,period\n");
    for s in &r.sectors {
        for p in &s.peaks.peaks {
            let period = s
                .peaks
                .matches
                .iter()
                .find(|m| m.peak == Some(*p))
                .map(|m| m.period.t0.to_string())
                .unwrap_or_default();
            let _ = writeln!(out, "{},{},peak,{},{},{}", s.n, s.peaks.h, p.t, p.height, period);
        }
        if let Some(a) = &s.action {
            let mut rows: Vec<(f64, f64, f64)> = a.h.iter().zip(&a.amplitudes).zip(&a.phases).map(|((h, m), p)| (*h, *m, *p)).collect();
            rows.sort_by(|x, y| x.0.total_cmp(&y.0));
            for (h, amp, phase) in rows {
                let _ = writeln!(out, "{},{h},amplitude,{},{amp},", s.n, a.t0);
                let _ = writeln!(out, "{},{h},phase,{},{phase},", s.n, a.t0);
            }
        }
    }
    out
}

fn oracle_csv(r: &OracleReport) -> String {
    let mut out = String::from("n,level,oracle,oracle_error,radial,radial_error,ratio\n");
    let mut comps: Vec<_> = r.comparisons.iter().collect();
    comps.sort_by_key(|c| c.sector);
    for c in comps {
        for k in 0..c.oracle.len().min(c.radial.len()) {
            let ratio = (c.oracle[k] - c.radial[k]).abs() / (c.oracle_errors[k] + c.radial_errors[k]).max(f64::MIN_POSITIVE);
            let _ = writeln!(
                out,
                "{},{k},{},{},{},{},{ratio}",
                c.sector, c.oracle[k], c.oracle_errors[k], c.radial[k], c.radial_errors[k]
            );
        }
    }
    out
}

fn classical_csv(r: &ClassicalSuiteReport) -> String {
    let mut out = String::from("energy,period,action,action_derivative,derivative_error,monodromy_trace,nondegenerate\n");
    for o in &r.orbits {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            o.energy, o.period, o.action, o.action_derivative, o.derivative_error, o.monodromy_trace, o.nondegenerate
        );
    }
    out
}

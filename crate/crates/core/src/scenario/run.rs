use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Scenario, ScenarioConfig};
use crate::error::{Error, Result};
use crate::observer::{estimate_decay_rate, simulate, synthesize_gain, synthesize_partial_gain, DecayEstimate, GainSummary, InputProfile, ObserverSystem, SimulationOptions, SimulationResult};
use crate::sensors::{build_output_matrix, Sensor};
use crate::spectral::QuadratureGrid;
use crate::strategic::{analyze_output, cluster_eigenvalues, StrategicOptions, StrategicReport, DEFAULT_CLUSTER_TOL};

/// Fraction of the horizon used for decay fits.
pub const TAIL_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub outdir: PathBuf,
    pub require_strategic: bool,
    pub force: bool,
    pub quadrature_order: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum DecayOutcome {
    Fitted(DecayEstimate),
    /// The error vanished (or underflowed) inside the fit window.
    Converged { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategic: Option<StrategicReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain: Option<GainSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayOutcome>,
    pub artifacts: Vec<PathBuf>,
    pub duration_seconds: f64,
}

/// Process exit code for an error: 1 configuration, 2 not strategic, 3 numerical or I/O failure.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::NotStrategic { .. } => 2,
        Error::IntegratorUnstable { .. } | Error::GainSynthesis(_) | Error::DegenerateFit(_) | Error::Simulation(_) | Error::Io(_) => 3,
        _ => 1,
    }
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut f = fs::File::create(&path)?;
    f.write_all(contents.as_bytes())?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn strategic_options(config: &ScenarioConfig) -> StrategicOptions {
    StrategicOptions::with_margin(config.unstable_margin)
}

fn analysis(config: &ScenarioConfig, scenario: &Scenario) -> Result<StrategicReport> {
    let output = build_output_matrix(&scenario.sensors, &scenario.model)?;
    Ok(analyze_output(&output, &scenario.model, &strategic_options(config)))
}

fn not_strategic(report: &StrategicReport) -> Error {
    Error::NotStrategic {
        offending: report
            .offending
            .iter()
            .map(|c| c.iter().map(|m| m.label()).collect::<Vec<_>>().join(","))
            .chain((report.q < report.r).then(|| format!("q={} < r={}", report.q, report.r)))
            .collect(),
    }
}

/// Writes `report.json` with the strategic verdict.
pub fn analyze(config: &ScenarioConfig, options: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let scenario = config.build()?;
    let report = analysis(config, &scenario)?;
    let path = write_artifact(&options.outdir, "report.json", &to_json(&report))?;
    if options.require_strategic && !report.verdict {
        return Err(not_strategic(&report));
    }
    Ok(RunReport { strategic: Some(report), gain: None, decay: None, artifacts: vec![path], duration_seconds: start.elapsed().as_secs_f64() })
}

/// Builds the observer system for a scenario; `force` corrects only the full-rank clusters.
pub fn observer_system(config: &ScenarioConfig, scenario: &Scenario, force: bool, quadrature_order: usize) -> Result<ObserverSystem> {
    let model = &scenario.model;
    let output = build_output_matrix(&scenario.sensors, model)?;
    let clusters = cluster_eigenvalues(model.eigenpairs(), DEFAULT_CLUSTER_TOL);
    let mu = config.observer.target_mu;
    let gain = if force {
        synthesize_partial_gain(model, &output, &clusters, config.unstable_margin, mu)?
    } else {
        synthesize_gain(model, &output, &clusters, config.unstable_margin, mu)?
    };
    let grid = QuadratureGrid::over(&scenario.omega, quadrature_order)?;
    ObserverSystem::new(model.clone(), output, gain, InputProfile::none(model.n_modes()), scenario.x0.clone(), scenario.zhat0.clone(), grid)
}

pub fn simulation_options(config: &ScenarioConfig) -> SimulationOptions {
    let o = &config.observer;
    SimulationOptions::new(o.horizon, o.dt).every(o.output_every).integrator(o.integrator)
}

fn fit(result: &SimulationResult) -> Result<DecayOutcome> {
    match estimate_decay_rate(result, TAIL_FRACTION) {
        Ok(d) => Ok(DecayOutcome::Fitted(d)),
        Err(Error::DegenerateFit(reason)) => Ok(DecayOutcome::Converged { reason }),
        Err(e) => Err(e),
    }
}

/// `t,err_h1_omega,err_l2_omega,err_mode_<label>...` with 17 significant digits.
pub fn trajectory_csv(result: &SimulationResult) -> String {
    let mut out = String::from("t,err_h1_omega,err_l2_omega");
    for m in &result.modes {
        out.push_str(",err_mode_");
        out.push_str(&m.label());
    }
    out.push('\n');
    for k in 0..result.len() {
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}", result.times[k], result.err_h1_omega[k], result.err_l2_omega[k]));
        for v in &result.err_modal[k] {
            out.push_str(&format!(",{v:.16e}"));
        }
        out.push('\n');
    }
    out
}

/// Analysis, observer synthesis and simulation; writes `report.json`, `trajectory.csv` and `decay.json`.
pub fn simulate_cmd(config: &ScenarioConfig, options: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let scenario = config.build()?;
    let report = analysis(config, &scenario)?;
    let mut artifacts = vec![write_artifact(&options.outdir, "report.json", &to_json(&report))?];
    if !report.verdict && !options.force {
        return Err(not_strategic(&report));
    }
    let order = options.quadrature_order.unwrap_or(config.quadrature.order);
    let system = observer_system(config, &scenario, options.force, order)?;
    let result = simulate(&system, &simulation_options(config))?;
    let decay = fit(&result)?;
    artifacts.push(write_artifact(&options.outdir, "trajectory.csv", &trajectory_csv(&result))?);
    artifacts.push(write_artifact(&options.outdir, "decay.json", &to_json(&decay))?);
    Ok(RunReport {
        strategic: Some(report),
        gain: Some(system.gain.summary()),
        decay: Some(decay),
        artifacts,
        duration_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub sensor: usize,
    pub axis: usize,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    /// Extra positions drawn uniformly in `[from, to]` from the config seed.
    pub random: usize,
    pub simulate: bool,
}

impl SweepSpec {
    pub fn positions(&self, seed: u64) -> Vec<f64> {
        let mut out: Vec<f64> = match self.steps {
            0 => Vec::new(),
            1 => vec![self.from],
            n => (0..n).map(|k| self.from + (self.to - self.from) * k as f64 / (n - 1) as f64).collect(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = if self.from <= self.to { (self.from, self.to) } else { (self.to, self.from) };
        out.extend((0..self.random).map(|_| rng.random_range(lo..=hi)));
        out.sort_by(f64::total_cmp);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub position: f64,
    pub verdict: bool,
    pub margin: Option<f64>,
    pub fitted_rate: Option<f64>,
}

fn sweep_point(config: &ScenarioConfig, scenario: &Scenario, spec: &SweepSpec, position: f64, order: usize) -> Result<SweepRow> {
    let mut sensors: Vec<Sensor> = scenario.sensors.clone();
    sensors[spec.sensor] = sensors[spec.sensor].with_position(spec.axis, position)?;
    for s in &sensors {
        s.validate(scenario.model.geometry()).map_err(|e| Error::Config(format!("sweep position {position}: {e}")))?;
    }
    let point = Scenario { sensors, ..scenario.clone() };
    let report = analysis(config, &point)?;
    let fitted_rate = if spec.simulate {
        let system = observer_system(config, &point, true, order)?;
        match fit(&simulate(&system, &simulation_options(config))?)? {
            DecayOutcome::Fitted(d) => Some(d.rate),
            DecayOutcome::Converged { .. } => None,
        }
    } else {
        None
    };
    Ok(SweepRow { position, verdict: report.verdict, margin: report.margin, fitted_rate })
}

/// Evaluates the verdict at each position independently (in parallel) and returns rows ordered by
/// position.
pub fn sweep_rows(config: &ScenarioConfig, spec: &SweepSpec, quadrature_order: Option<usize>) -> Result<Vec<SweepRow>> {
    let scenario = config.build()?;
    if spec.sensor >= scenario.sensors.len() {
        return Err(Error::Config(format!("sweep sensor index {} but the config has {} sensors", spec.sensor, scenario.sensors.len())));
    }
    if spec.axis >= scenario.model.dim() {
        return Err(Error::Config(format!("sweep axis {} in a {}D domain", spec.axis, scenario.model.dim())));
    }
    if spec.steps == 0 && spec.random == 0 {
        return Err(Error::Config("sweep needs at least one position".into()));
    }
    if !(spec.from.is_finite() && spec.to.is_finite()) {
        return Err(Error::Config("sweep bounds must be finite".into()));
    }
    let order = quadrature_order.unwrap_or(config.quadrature.order);
    spec.positions(config.seed).into_par_iter().map(|p| sweep_point(config, &scenario, spec, p, order)).collect()
}

fn optional(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("position,verdict,margin,fitted_rate\n");
    for r in rows {
        out.push_str(&format!("{:.16e},{},{},{}\n", r.position, u8::from(r.verdict), optional(r.margin), optional(r.fitted_rate)));
    }
    out
}

/// Writes `sweep.csv`.
pub fn sweep(config: &ScenarioConfig, spec: &SweepSpec, options: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let rows = sweep_rows(config, spec, options.quadrature_order)?;
    let path = write_artifact(&options.outdir, "sweep.csv", &sweep_csv(&rows))?;
    if options.require_strategic && rows.iter().any(|r| !r.verdict) {
        let bad: Vec<String> = rows.iter().filter(|r| !r.verdict).map(|r| format!("position {}", r.position)).collect();
        return Err(Error::NotStrategic { offending: bad });
    }
    Ok(RunReport { strategic: None, gain: None, decay: None, artifacts: vec![path], duration_seconds: start.elapsed().as_secs_f64() })
}

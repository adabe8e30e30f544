use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::gain::{assemble_error_matrix, ObserverGain};
use crate::error::{Error, Result};
use crate::sensors::{build_output_matrix, OutputOperator, Sensor};
use crate::spectral::{exp_integral, h1_norm_omega, l2_norm_omega, DiffusionModel, GradientSampler, ModalState, ModeIndex, QuadratureGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Classical fourth-order Runge–Kutta for the estimation error, exact modal steps for the plant.
    #[default]
    Rk4,
    /// Matrix exponential of the error dynamics.
    Exact,
}

/// Piecewise-constant actuation `u(t)`, mapped to modal forcing through `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputProfile {
    /// `n_modes × p`.
    b: DMatrix<f64>,
    /// `(start time, u)` sorted by start; `u = 0` before the first entry.
    schedule: Vec<(f64, DVector<f64>)>,
}

impl InputProfile {
    pub fn none(n_modes: usize) -> Self {
        Self { b: DMatrix::zeros(n_modes, 0), schedule: Vec::new() }
    }

    /// Actuators reuse the sensor distributions: `B = Cᵀ` of the actuator set.
    pub fn new(actuators: &[Sensor], model: &DiffusionModel, mut schedule: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        let b = build_output_matrix(actuators, model)?.matrix().transpose();
        schedule.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = Vec::with_capacity(schedule.len());
        for (t, u) in schedule {
            if !t.is_finite() || u.len() != actuators.len() {
                return Err(Error::Shape(format!("input entry at t={t} has {} values for {} actuators", u.len(), actuators.len())));
            }
            out.push((t, DVector::from_vec(u)));
        }
        Ok(Self { b, schedule: out })
    }

    pub fn input_matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn value(&self, t: f64) -> DVector<f64> {
        self.schedule
            .iter()
            .rev()
            .find(|(start, _)| *start <= t)
            .map_or_else(|| DVector::zeros(self.b.ncols()), |(_, u)| u.clone())
    }

    /// Modal forcing `B u(t)`.
    pub fn forcing(&self, t: f64) -> DVector<f64> {
        if self.b.ncols() == 0 {
            DVector::zeros(self.b.nrows())
        } else {
            &self.b * self.value(t)
        }
    }
}

/// Plant and full-order observer `dx̂/dt = Λx̂ + Bu + H(y − Cx̂)`, with ω sampled by `grid`.
#[derive(Debug, Clone)]
pub struct ObserverSystem {
    pub model: DiffusionModel,
    pub output: OutputOperator,
    pub gain: ObserverGain,
    pub input: InputProfile,
    pub x0: ModalState,
    pub zhat0: ModalState,
    pub grid: QuadratureGrid,
}

impl ObserverSystem {
    pub fn new(model: DiffusionModel, output: OutputOperator, gain: ObserverGain, input: InputProfile, x0: ModalState, zhat0: ModalState, grid: QuadratureGrid) -> Result<Self> {
        let n = model.n_modes();
        let q = output.n_sensors();
        x0.check_against(&model)?;
        zhat0.check_against(&model)?;
        if output.n_modes() != n || gain.matrix.shape() != (n, q) || input.b.nrows() != n {
            return Err(Error::Shape(format!(
                "inconsistent observer system: {n} modes, C is {}x{}, H is {}x{}, B has {} rows",
                q,
                output.n_modes(),
                gain.matrix.nrows(),
                gain.matrix.ncols(),
                input.b.nrows()
            )));
        }
        Ok(Self { model, output, gain, input, x0, zhat0, grid })
    }

    pub fn error_matrix(&self) -> DMatrix<f64> {
        assemble_error_matrix(&self.model, &self.output, &self.gain)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub horizon: f64,
    pub dt: f64,
    /// Record every `output_every` steps (the initial and final instants are always recorded).
    pub output_every: usize,
    pub integrator: Integrator,
}

impl SimulationOptions {
    pub fn new(horizon: f64, dt: f64) -> Self {
        Self { horizon, dt, output_every: 1, integrator: Integrator::Rk4 }
    }

    pub fn every(mut self, output_every: usize) -> Self {
        self.output_every = output_every;
        self
    }

    pub fn integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub modes: Vec<ModeIndex>,
    pub times: Vec<f64>,
    pub true_states: Vec<DVector<f64>>,
    pub observer_states: Vec<DVector<f64>>,
    pub err_h1_omega: Vec<f64>,
    pub err_l2_omega: Vec<f64>,
    /// `err_modal[k][m] = |x_m − x̂_m|` at instant `k`.
    pub err_modal: Vec<Vec<f64>>,
    /// `max |z_err − Phi·e|` at each instant, `z_err` being the difference of the sampled gradients.
    pub pipeline_residual: Vec<f64>,
}

impl SimulationResult {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn error_state(&self, k: usize) -> DVector<f64> {
        &self.true_states[k] - &self.observer_states[k]
    }

    pub fn mode_error(&self, m: usize) -> Vec<f64> {
        self.err_modal.iter().map(|row| row[m]).collect()
    }

    /// Gradient error norm trajectory on another grid (e.g. a sub-subregion).
    pub fn h1_error_on(&self, model: &DiffusionModel, grid: &QuadratureGrid) -> Result<Vec<f64>> {
        let sampler = GradientSampler::new(model, grid)?;
        (0..self.len()).map(|k| h1_norm_omega(&sampler.sample_vector(&self.error_state(k))?, grid)).collect()
    }
}

/// Stability polynomial of classical RK4.
fn rk4_amplification(re: f64, im: f64) -> f64 {
    let z = nalgebra::Complex::new(re, im);
    let one = nalgebra::Complex::new(1.0, 0.0);
    (one + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0).norm()
}

/// Largest step keeping `|R(dt·λ)| ≤ 1` for every decaying closed-loop eigenvalue.
pub fn rk4_step_limit(error_matrix: &DMatrix<f64>) -> f64 {
    let mut limit = f64::INFINITY;
    for z in error_matrix.complex_eigenvalues().iter().filter(|z| z.re < 0.0) {
        let (mut lo, mut hi) = (0.0, 4.0 / z.norm());
        if rk4_amplification(hi * z.re, hi * z.im) <= 1.0 {
            continue;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if rk4_amplification(mid * z.re, mid * z.im) <= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        limit = limit.min(lo);
    }
    limit
}

struct Recorder {
    sampler: GradientSampler,
    grid: QuadratureGrid,
    result: SimulationResult,
}

impl Recorder {
    fn record(&mut self, t: f64, x: &DVector<f64>, e: &DVector<f64>) -> Result<()> {
        let xhat = x - e;
        let field = self.sampler.sample_vector(&e)?;
        let phi = self.sampler.values_matrix();
        let z_err = phi * x - phi * &xhat;
        let residual = (z_err - phi * e).amax();
        let r = &mut self.result;
        r.times.push(t);
        r.err_h1_omega.push(h1_norm_omega(&field, &self.grid)?);
        r.err_l2_omega.push(l2_norm_omega(&field, &self.grid)?);
        r.err_modal.push(e.iter().map(|v| v.abs()).collect());
        r.pipeline_residual.push(residual);
        r.true_states.push(x.clone());
        r.observer_states.push(xhat);
        Ok(())
    }
}

/// Integrates plant and observer over `[0, horizon]`.
pub fn simulate(system: &ObserverSystem, options: &SimulationOptions) -> Result<SimulationResult> {
    let SimulationOptions { horizon, dt, output_every, integrator } = *options;
    if !(horizon.is_finite() && horizon > 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(Error::Simulation(format!("horizon and dt must be positive (horizon={horizon}, dt={dt})")));
    }
    if output_every == 0 {
        return Err(Error::Simulation("output_every must be at least 1".into()));
    }
    let steps = (horizon / dt).round() as usize;
    if steps == 0 || ((steps as f64) * dt - horizon).abs() > 1e-9 * horizon {
        return Err(Error::Simulation(format!("horizon {horizon} is not a whole number of steps of {dt}")));
    }
    let e_matrix = system.error_matrix();
    if integrator == Integrator::Rk4 {
        let limit = rk4_step_limit(&e_matrix);
        if dt > limit {
            return Err(Error::IntegratorUnstable { dt, limit });
        }
    }
    let model = &system.model;
    let modes: Vec<ModeIndex> = model.eigenpairs().iter().map(|p| p.index).collect();
    let mut rec = Recorder {
        sampler: GradientSampler::new(model, &system.grid)?,
        grid: system.grid.clone(),
        result: SimulationResult {
            modes,
            times: Vec::new(),
            true_states: Vec::new(),
            observer_states: Vec::new(),
            err_h1_omega: Vec::new(),
            err_l2_omega: Vec::new(),
            err_modal: Vec::new(),
            pipeline_residual: Vec::new(),
        },
    };
    let mut x = system.x0.coefficients().clone();
    let mut e = &x - system.zhat0.coefficients();
    rec.record(0.0, &x, &e)?;
    let mut stepper = Stepper::new(system, dt, integrator);
    for k in 0..steps {
        let t = k as f64 * dt;
        stepper.step(system, t, &mut x, &mut e);
        if !(x.iter().chain(e.iter()).all(|v| v.is_finite())) {
            return Err(Error::Simulation(format!("non-finite state at t={}", t + dt)));
        }
        if (k + 1) % output_every == 0 || k + 1 == steps {
            rec.record((k + 1) as f64 * dt, &x, &e)?;
        }
    }
    Ok(rec.result)
}

enum Stepper {
    Rk4 { dt: f64, full: Vec<(f64, f64)>, e_matrix: DMatrix<f64> },
    Exact { plant: Vec<(f64, f64)>, error: DMatrix<f64> },
}

impl Stepper {
    fn new(system: &ObserverSystem, dt: f64, integrator: Integrator) -> Self {
        let full = system.model.eigenvalues().iter().map(|&l| ((l * dt).exp(), exp_integral(l, dt))).collect();
        let e_matrix = system.error_matrix();
        match integrator {
            Integrator::Rk4 => Self::Rk4 { dt, full, e_matrix },
            Integrator::Exact => Self::Exact { plant: full, error: (e_matrix * dt).exp() },
        }
    }

    /// Advances the plant `x` and the estimation error `e = x − x̂` by one step.
    fn step(&mut self, system: &ObserverSystem, t: f64, x: &mut DVector<f64>, e: &mut DVector<f64>) {
        let forcing = system.input.forcing(t);
        let plant = match self {
            Self::Rk4 { full, .. } | Self::Exact { plant: full, .. } => full,
        };
        for (m, (g, i)) in plant.iter().enumerate() {
            x[m] = g * x[m] + i * forcing[m];
        }
        match self {
            Self::Rk4 { dt, e_matrix, .. } => {
                let dt = *dt;
                let k1 = &*e_matrix * &*e;
                let k2 = &*e_matrix * (&*e + &k1 * (0.5 * dt));
                let k3 = &*e_matrix * (&*e + &k2 * (0.5 * dt));
                let k4 = &*e_matrix * (&*e + &k3 * dt);
                *e += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            }
            Self::Exact { error, .. } => *e = &*error * &*e,
        }
    }
}

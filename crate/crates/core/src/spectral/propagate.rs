use super::gradient::ModalState;
use super::model::DiffusionModel;
use crate::error::{Error, Result};
use nalgebra::DVector;

/// `∫₀^dt e^{λ s} ds`, stable as λ·dt → 0.
pub(crate) fn exp_integral(lambda: f64, dt: f64) -> f64 {
    let z = lambda * dt;
    if z.abs() < 1e-8 {
        dt * (1.0 + 0.5 * z)
    } else {
        z.exp_m1() / lambda
    }
}

/// Exact modal propagation over one step with an input held constant on the step:
/// `aₘ ← e^{λₘ dt} aₘ + bₘ ∫₀^dt e^{λₘ s} ds`.
pub fn mild_solution_step(model: &DiffusionModel, state: &ModalState, input: Option<&DVector<f64>>, dt: f64) -> Result<ModalState> {
    state.check_against(model)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Simulation(format!("time step must be positive, got {dt}")));
    }
    if let Some(b) = input {
        if b.len() != model.n_modes() {
            return Err(Error::Shape(format!("input has {} modal coefficients, expected {}", b.len(), model.n_modes())));
        }
    }
    let a = state.coefficients();
    let next = DVector::from_iterator(
        a.len(),
        model.eigenpairs().iter().enumerate().map(|(m, pair)| {
            let forced = input.map_or(0.0, |b| b[m] * exp_integral(pair.lambda, dt));
            (pair.lambda * dt).exp() * a[m] + forced
        }),
    );
    Ok(ModalState::from_vector(next))
}

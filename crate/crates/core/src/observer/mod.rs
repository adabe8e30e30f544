//! Output-injection observer for the unstable modes: gain synthesis, coupled simulation, decay
//! fitting and structural residual checks.

mod conditions;
mod decay;
mod gain;
mod simulate;

pub use conditions::{estimator_combine, verify_observer_conditions, ConditionResiduals, ObserverMaps};
pub use decay::{estimate_decay_rate, fit_exponential_rate, DecayEstimate, UNDERFLOW};
pub use gain::{assemble_error_matrix, spectral_abscissa, synthesize_gain, synthesize_partial_gain, GainBlock, GainSummary, ObserverGain, TARGET_SPREAD};
pub use simulate::{rk4_step_limit, simulate, InputProfile, Integrator, ObserverSystem, SimulationOptions, SimulationResult};

//! Analytic eigenstructure of `gamma1 Δ + gamma2` on Dirichlet boxes and the modal calculus
//! built on it.

mod geometry;
mod gradient;
mod model;
mod propagate;
mod quadrature;

pub use geometry::{DomainGeometry, Subregion};
pub use gradient::{
    evaluate_gradient, extend_by_zero, gradient_adjoint, h1_norm_omega, l2_norm_omega, restrict, GradientField,
    GradientSampler, ModalState,
};
pub use model::{eigenpairs, DiffusionModel, EigenPair, ModeIndex, Truncation, MIN_MODES_PER_AXIS, STABLE_BUFFER};
pub use propagate::mild_solution_step;
pub(crate) use propagate::exp_integral;
pub use quadrature::{AxisRule, QuadratureGrid, DEFAULT_ORDER};
pub(crate) use quadrature::{integrate_1d, reference_rule};
pub(crate) use model::sine_factor;

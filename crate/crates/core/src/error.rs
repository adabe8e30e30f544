use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("point or region outside the domain: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("grid mismatch: {0}")]
    Grid(String),

    #[error("sensor configuration: {0}")]
    Configuration(String),

    #[error("sensor set is not strategic for the unstable part (offending clusters: {offending:?})")]
    NotStrategic { offending: Vec<String> },

    #[error("target closed-loop real part {0} is not stabilizing (must be < 0)")]
    TargetNotStabilizing(f64),

    #[error("gain synthesis failed: {0}")]
    GainSynthesis(String),

    #[error("time step {dt} exceeds the explicit stability limit {limit:.6e} of the observer integrator")]
    IntegratorUnstable { dt: f64, limit: f64 },

    #[error("decay fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("invalid simulation parameters: {0}")]
    Simulation(String),

    #[error("invalid scenario config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

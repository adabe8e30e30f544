use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observer::Integrator;
use crate::sensors::Sensor;
use crate::spectral::{DiffusionModel, DomainGeometry, ModalState, Subregion, Truncation, DEFAULT_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Interval { a: f64 },
    Rectangle { a1: f64, a2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    pub gamma1: f64,
    pub gamma2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationOneD {
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationTwoD {
    pub n1: usize,
    pub n2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TruncationConfig {
    OneD(TruncationOneD),
    TwoD(TruncationTwoD),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubIntervalConfig {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubRectangleConfig {
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha2: f64,
    pub beta2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubregionConfig {
    Interval(SubIntervalConfig),
    Rectangle(SubRectangleConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverConfig {
    pub target_mu: f64,
    pub horizon: f64,
    pub dt: f64,
    pub output_every: usize,
    #[serde(default, skip_serializing_if = "is_rk4")]
    pub integrator: Integrator,
}

fn is_rk4(i: &Integrator) -> bool {
    *i == Integrator::Rk4
}

impl Default for ObserverConfig {
    fn default() -> Self {
        Self { target_mu: -2.0, horizon: 10.0, dt: 1e-3, output_every: 10, integrator: Integrator::Rk4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKeyword {
    Ones,
    Zeros,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Keyword(StateKeyword),
    Values(Vec<f64>),
}

impl InitialState {
    /// Coefficients in eigenpair order.
    pub fn resolve(&self, model: &DiffusionModel) -> Result<ModalState> {
        let n = model.n_modes();
        match self {
            Self::Keyword(StateKeyword::Ones) => Ok(ModalState::from_vec(vec![1.0; n])),
            Self::Keyword(StateKeyword::Zeros) => Ok(ModalState::zeros(n)),
            Self::Values(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(ModalState::from_vec(v.clone())),
            Self::Values(v) => Err(Error::Config(format!("initial state has {} finite values, expected {n}", v.len()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub x0: InitialState,
    pub zhat0: InitialState,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { x0: InitialState::Keyword(StateKeyword::Ones), zhat0: InitialState::Keyword(StateKeyword::Zeros) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { order: DEFAULT_ORDER }
    }
}

/// A complete scenario as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub domain: DomainConfig,
    pub coefficients: Coefficients,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationConfig>,
    pub subregion: SubregionConfig,
    pub sensors: Vec<Sensor>,
    #[serde(default)]
    pub unstable_margin: f64,
    #[serde(default)]
    pub observer: ObserverConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub seed: u64,
}

/// Validated objects built from a config.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub model: DiffusionModel,
    pub omega: Subregion,
    pub sensors: Vec<Sensor>,
    pub x0: ModalState,
    pub zhat0: ModalState,
}

impl ScenarioConfig {
    /// Parses JSON, reporting the failing field path and position.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            Error::Config(format!("at `{}` (line {}, column {}): {inner}", e.path(), inner.line(), inner.column()))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn geometry(&self) -> Result<DomainGeometry> {
        match self.domain {
            DomainConfig::Interval { a } => DomainGeometry::interval(a),
            DomainConfig::Rectangle { a1, a2 } => DomainGeometry::rectangle(a1, a2),
        }
    }

    pub fn model(&self) -> Result<DiffusionModel> {
        let geometry = self.geometry()?;
        let Coefficients { gamma1, gamma2 } = self.coefficients;
        match self.truncation {
            None => DiffusionModel::with_default_truncation(geometry, gamma1, gamma2),
            Some(TruncationConfig::OneD(t)) => DiffusionModel::new(geometry, gamma1, gamma2, Truncation::OneD(t.n)),
            Some(TruncationConfig::TwoD(t)) => DiffusionModel::new(geometry, gamma1, gamma2, Truncation::TwoD(t.n1, t.n2)),
        }
    }

    pub fn omega(&self) -> Subregion {
        match self.subregion {
            SubregionConfig::Interval(s) => Subregion::interval(s.alpha, s.beta),
            SubregionConfig::Rectangle(s) => Subregion::rectangle(s.alpha1, s.beta1, s.alpha2, s.beta2),
        }
    }

    /// Checks every cross-reference and builds the model, ω, sensors and initial states.
    pub fn build(&self) -> Result<Scenario> {
        let model = self.model()?;
        let omega = self.omega();
        omega.validate_in(model.geometry())?;
        if self.sensors.is_empty() {
            return Err(Error::Config("at least one sensor is required".into()));
        }
        for (i, s) in self.sensors.iter().enumerate() {
            s.validate(model.geometry()).map_err(|e| Error::Config(format!("sensors[{i}]: {e}")))?;
        }
        if !(self.unstable_margin.is_finite() && self.unstable_margin >= 0.0) {
            return Err(Error::Config(format!("unstable_margin must be a nonnegative number, got {}", self.unstable_margin)));
        }
        let o = &self.observer;
        if !(o.horizon > 0.0 && o.dt > 0.0 && o.horizon.is_finite() && o.output_every > 0 && o.target_mu.is_finite()) {
            return Err(Error::Config("observer needs horizon > 0, dt > 0, output_every >= 1 and a finite target_mu".into()));
        }
        if self.quadrature.order == 0 {
            return Err(Error::Config("quadrature order must be at least 1".into()));
        }
        let x0 = self.initial.x0.resolve(&model)?;
        let zhat0 = self.initial.zhat0.resolve(&model)?;
        Ok(Scenario { model, omega, sensors: self.sensors.clone(), x0, zhat0 })
    }
}

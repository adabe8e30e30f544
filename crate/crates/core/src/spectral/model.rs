use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use serde::{Serialize, Serializer};

use super::geometry::DomainGeometry;
use crate::error::{Error, Result};

/// Minimum number of retained modes per axis for the automatic truncation.
pub const MIN_MODES_PER_AXIS: usize = 16;
/// Width (in 1/time) of the stable buffer kept below the slowest unstable mode.
pub const STABLE_BUFFER: f64 = 10.0;
const MAX_MODES_PER_AXIS: usize = 512;

/// Index of a Dirichlet sine mode; indices start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeIndex {
    OneD(usize),
    TwoD(usize, usize),
}

impl ModeIndex {
    pub fn dim(&self) -> usize {
        match self {
            Self::OneD(_) => 1,
            Self::TwoD(..) => 2,
        }
    }

    /// Per-axis index.
    pub fn axis(&self, k: usize) -> usize {
        match (*self, k) {
            (Self::OneD(n), 0) => n,
            (Self::TwoD(i, _), 0) => i,
            (Self::TwoD(_, j), 1) => j,
            _ => panic!("axis {k} out of range for {self}"),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        (0..self.dim()).map(|k| self.axis(k)).collect()
    }

    /// Column label used in CSV headers: `3` or `1_2`.
    pub fn label(&self) -> String {
        match self {
            Self::OneD(n) => n.to_string(),
            Self::TwoD(i, j) => format!("{i}_{j}"),
        }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OneD(n) => write!(f, "({n})"),
            Self::TwoD(i, j) => write!(f, "({i},{j})"),
        }
    }
}

impl Serialize for ModeIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(serializer)
    }
}

/// Per-axis mode caps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    OneD(usize),
    TwoD(usize, usize),
}

impl Truncation {
    pub fn dim(&self) -> usize {
        match self {
            Self::OneD(_) => 1,
            Self::TwoD(..) => 2,
        }
    }

    pub fn cap(&self, axis: usize) -> usize {
        match (*self, axis) {
            (Self::OneD(n), 0) => n,
            (Self::TwoD(n1, _), 0) => n1,
            (Self::TwoD(_, n2), 1) => n2,
            _ => panic!("axis {axis} out of range"),
        }
    }

    pub fn mode_count(&self) -> usize {
        match *self {
            Self::OneD(n) => n,
            Self::TwoD(n1, n2) => n1 * n2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenPair {
    pub index: ModeIndex,
    pub lambda: f64,
}

/// `sqrt(2/len) * sin(n π x / len)` and its first two derivatives.
#[inline]
pub(crate) fn sine_factor(order: usize, n: usize, len: f64, x: f64) -> f64 {
    let k = n as f64 * PI / len;
    let c = (2.0 / len).sqrt();
    match order {
        0 => c * (k * x).sin(),
        1 => c * k * (k * x).cos(),
        2 => -c * k * k * (k * x).sin(),
        _ => unreachable!("only derivatives up to order 2 are used"),
    }
}

/// Diffusion operator `gamma1 Δ + gamma2` with homogeneous Dirichlet conditions on a box,
/// truncated to finitely many sine modes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionModel {
    geometry: DomainGeometry,
    gamma1: f64,
    gamma2: f64,
    truncation: Truncation,
    modes: Vec<EigenPair>,
}

impl DiffusionModel {
    pub fn new(geometry: DomainGeometry, gamma1: f64, gamma2: f64, truncation: Truncation) -> Result<Self> {
        geometry.validate()?;
        if !(gamma1.is_finite() && gamma1 > 0.0) {
            return Err(Error::Geometry(format!("gamma1 must be positive, got {gamma1}")));
        }
        if !gamma2.is_finite() {
            return Err(Error::Geometry(format!("gamma2 must be finite, got {gamma2}")));
        }
        if truncation.dim() != geometry.dim() {
            return Err(Error::Shape(format!(
                "truncation is {}D but the domain is {}D",
                truncation.dim(),
                geometry.dim()
            )));
        }
        if (0..truncation.dim()).any(|k| truncation.cap(k) == 0) {
            return Err(Error::Shape("truncation must keep at least one mode per axis".into()));
        }
        let mut model = Self { geometry, gamma1, gamma2, truncation, modes: Vec::new() };
        let mut modes: Vec<EigenPair> = match truncation {
            Truncation::OneD(n) => (1..=n).map(ModeIndex::OneD).collect::<Vec<_>>(),
            Truncation::TwoD(n1, n2) => (1..=n1)
                .flat_map(|i| (1..=n2).map(move |j| ModeIndex::TwoD(i, j)))
                .collect(),
        }
        .into_iter()
        .map(|index| EigenPair { index, lambda: model.eigenvalue(index) })
        .collect();
        modes.sort_by(|p, q| match q.lambda.partial_cmp(&p.lambda) {
            Some(Ordering::Equal) | None => p.index.cmp(&q.index),
            Some(ord) => ord,
        });
        model.modes = modes;
        Ok(model)
    }

    /// Keeps every mode with `lambda > lambda_unstable_min - STABLE_BUFFER` and at least
    /// [`MIN_MODES_PER_AXIS`] per axis.
    pub fn with_default_truncation(geometry: DomainGeometry, gamma1: f64, gamma2: f64) -> Result<Self> {
        // validate coefficients before sizing anything
        Self::new(geometry, gamma1, gamma2, match geometry {
            DomainGeometry::Interval { .. } => Truncation::OneD(1),
            DomainGeometry::Rectangle { .. } => Truncation::TwoD(1, 1),
        })?;
        let dim = geometry.dim();
        let base: Vec<f64> = (0..dim).map(|k| (PI / geometry.length(k)).powi(2)).collect();
        let kappa_top: f64 = base.iter().sum();
        let threshold = if gamma2 - gamma1 * kappa_top >= 0.0 {
            // largest κ that is still unstable, over all index combinations
            let kappa_max = gamma2 / gamma1;
            let bound: Vec<usize> = base.iter().map(|b| (kappa_max / b).sqrt().floor() as usize).collect();
            let mut slowest = f64::INFINITY;
            let combos: Vec<Vec<usize>> = match dim {
                1 => (1..=bound[0]).map(|n| vec![n]).collect(),
                _ => (1..=bound[0])
                    .flat_map(|i| (1..=bound[1]).map(move |j| vec![i, j]))
                    .collect(),
            };
            for idx in combos {
                let kappa: f64 = idx.iter().zip(&base).map(|(&n, b)| (n * n) as f64 * b).sum();
                let lambda = gamma2 - gamma1 * kappa;
                if lambda >= 0.0 {
                    slowest = slowest.min(lambda);
                }
            }
            slowest - STABLE_BUFFER
        } else {
            gamma2 - gamma1 * kappa_top - STABLE_BUFFER
        };
        let caps: Vec<usize> = (0..dim)
            .map(|k| {
                let others: f64 = (0..dim).filter(|&o| o != k).map(|o| base[o]).sum();
                let mut n = MIN_MODES_PER_AXIS;
                while n < MAX_MODES_PER_AXIS
                    && gamma2 - gamma1 * (((n + 1) * (n + 1)) as f64 * base[k] + others) > threshold
                {
                    n += 1;
                }
                n
            })
            .collect();
        let truncation = match caps.as_slice() {
            [n] => Truncation::OneD(*n),
            [n1, n2] => Truncation::TwoD(*n1, *n2),
            _ => unreachable!(),
        };
        Self::new(geometry, gamma1, gamma2, truncation)
    }

    pub fn geometry(&self) -> &DomainGeometry {
        &self.geometry
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Retained eigenpairs, sorted by descending eigenvalue (ties by index).
    pub fn eigenpairs(&self) -> &[EigenPair] {
        &self.modes
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|p| p.lambda).collect()
    }

    /// Column position of `index` in modal vectors.
    pub fn position(&self, index: ModeIndex) -> Option<usize> {
        self.modes.iter().position(|p| p.index == index)
    }

    /// Positive Dirichlet-Laplacian eigenvalue κ of a mode.
    pub fn laplacian_eigenvalue(&self, index: ModeIndex) -> f64 {
        (0..self.dim())
            .map(|k| (index.axis(k) as f64 * PI / self.geometry.length(k)).powi(2))
            .sum()
    }

    /// `gamma2 - gamma1 * κ`.
    pub fn eigenvalue(&self, index: ModeIndex) -> f64 {
        self.gamma2 - self.gamma1 * self.laplacian_eigenvalue(index)
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if !self.geometry.contains_closed(point) {
            return Err(Error::Domain(format!("point {point:?} is outside the closed domain")));
        }
        Ok(())
    }

    fn check_index(&self, index: ModeIndex) -> Result<()> {
        if index.dim() != self.dim() || (0..self.dim()).any(|k| index.axis(k) == 0) {
            return Err(Error::Shape(format!("mode index {index} invalid for a {}D model", self.dim())));
        }
        Ok(())
    }

    /// Mixed partial derivative of an eigenfunction; `orders[k]` is the derivative order along axis k.
    pub(crate) fn mode_derivative_unchecked(&self, index: ModeIndex, orders: &[usize], point: &[f64]) -> f64 {
        (0..self.dim())
            .map(|k| sine_factor(orders[k], index.axis(k), self.geometry.length(k), point[k]))
            .product()
    }

    /// Analytic eigenfunction value.
    pub fn evaluate_mode(&self, index: ModeIndex, point: &[f64]) -> Result<f64> {
        self.check_index(index)?;
        self.check_point(point)?;
        Ok(self.mode_derivative_unchecked(index, &[0, 0][..self.dim()], point))
    }

    /// Analytic gradient of an eigenfunction.
    pub fn mode_gradient(&self, index: ModeIndex, point: &[f64]) -> Result<Vec<f64>> {
        self.check_index(index)?;
        self.check_point(point)?;
        Ok((0..self.dim())
            .map(|k| {
                let mut orders = [0usize; 2];
                orders[k] = 1;
                self.mode_derivative_unchecked(index, &orders[..self.dim()], point)
            })
            .collect())
    }

    /// Analytic Laplacian of an eigenfunction (equals `-κ φ`).
    pub fn mode_laplacian(&self, index: ModeIndex, point: &[f64]) -> Result<f64> {
        self.check_index(index)?;
        self.check_point(point)?;
        Ok((0..self.dim())
            .map(|k| {
                let mut orders = [0usize; 2];
                orders[k] = 2;
                self.mode_derivative_unchecked(index, &orders[..self.dim()], point)
            })
            .sum())
    }
}

/// All retained eigenpairs of `model`, sorted by descending eigenvalue.
pub fn eigenpairs(model: &DiffusionModel) -> Vec<EigenPair> {
    model.eigenpairs().to_vec()
}

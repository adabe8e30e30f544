//! Sensor families and their measurement of each retained eigenfunction (rows of the output
//! operator C).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{integrate_1d, sine_factor, DiffusionModel, DomainGeometry, ModeIndex};

/// Gauss nodes per smooth piece for weighted 1D integrals.
const PIECE_ORDER: usize = 48;
/// Gauss nodes per polyline segment of a filament sensor.
pub const FILAMENT_ORDER: usize = 16;

/// Spatial weight profile of a sensor along one axis (or along a boundary segment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightProfile {
    Uniform,
    /// Symmetric triangle: 1 at the center, 0 at both ends.
    Tent,
    /// Piecewise-linear through values at uniformly spaced knots (both ends included).
    Tabulated(Vec<f64>),
}

impl WeightProfile {
    fn validate(&self) -> Result<()> {
        match self {
            Self::Tabulated(v) if v.len() < 2 || v.iter().any(|x| !x.is_finite()) => Err(Error::Configuration(
                "tabulated weights need at least two finite values".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn value(&self, lo: f64, hi: f64, x: f64) -> f64 {
        match self {
            Self::Uniform => 1.0,
            Self::Tent => {
                let c = 0.5 * (lo + hi);
                let l = 0.5 * (hi - lo);
                (1.0 - (x - c).abs() / l).max(0.0)
            }
            Self::Tabulated(v) => {
                let s = ((x - lo) / (hi - lo)).clamp(0.0, 1.0) * (v.len() - 1) as f64;
                let k = (s.floor() as usize).min(v.len() - 2);
                let t = s - k as f64;
                v[k] * (1.0 - t) + v[k + 1] * t
            }
        }
    }

    /// Breakpoints (including the ends) between which the profile is smooth.
    fn pieces(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            Self::Uniform => vec![lo, hi],
            Self::Tent => vec![lo, 0.5 * (lo + hi), hi],
            Self::Tabulated(v) => {
                let n = v.len() - 1;
                (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
            }
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            Self::Uniform | Self::Tent => true,
            Self::Tabulated(v) => v.iter().zip(v.iter().rev()).all(|(a, b)| a == b),
        }
    }

    fn scaled(&self, c: f64) -> Self {
        match self {
            Self::Uniform => Self::Tabulated(vec![c, c]),
            Self::Tent => Self::Tabulated(vec![0.0, c, 0.0]),
            Self::Tabulated(v) => Self::Tabulated(v.iter().map(|x| c * x).collect()),
        }
    }

    /// `∫_lo^hi w(x) g(x) dx` by Gauss quadrature on every smooth piece.
    fn integrate(&self, lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> f64 {
        self.pieces(lo, hi)
            .windows(2)
            .map(|p| integrate_1d(PIECE_ORDER, p[0], p[1], |x| self.value(lo, hi, x) * g(x)))
            .sum()
    }

    /// `∫_lo^hi w(x) √(2/len) sin(nπx/len) dx`, closed form for uniform weights.
    fn sine_moment(&self, lo: f64, hi: f64, n: usize, len: f64, closed_form: bool) -> f64 {
        match self {
            Self::Uniform if closed_form => {
                let k = n as f64 * std::f64::consts::PI / len;
                (2.0 / len).sqrt() * ((k * lo).cos() - (k * hi).cos()) / k
            }
            _ => self.integrate(lo, hi, |x| sine_factor(0, n, len, x)),
        }
    }
}

/// Side of the rectangle carrying a boundary sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    /// ξ₁ = 0
    Left,
    /// ξ₁ = a₁
    Right,
    /// ξ₂ = 0
    Bottom,
    /// ξ₂ = a₂
    Top,
}

impl Edge {
    /// Axis normal to the edge.
    pub fn normal_axis(self) -> usize {
        match self {
            Self::Left | Self::Right => 0,
            Self::Bottom | Self::Top => 1,
        }
    }

    pub fn tangential_axis(self) -> usize {
        1 - self.normal_axis()
    }

    /// Coordinate of the edge along its normal axis, and the sign of the outward normal.
    fn placement(self, geometry: &DomainGeometry) -> (f64, f64) {
        match self {
            Self::Left | Self::Bottom => (0.0, -1.0),
            Self::Right => (geometry.length(0), 1.0),
            Self::Top => (geometry.length(1), 1.0),
        }
    }
}

/// Interval `]from, to[` on one side of the rectangle with a weight profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySegment {
    pub edge: Edge,
    pub from: f64,
    pub to: f64,
    #[serde(default = "uniform")]
    pub weight: WeightProfile,
}

fn uniform() -> WeightProfile {
    WeightProfile::Uniform
}

/// One measurement device: its support and spatial weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sensor {
    /// Dirac sensor `y = x(b)`.
    Pointwise { b: Vec<f64> },
    /// `y = ∫_D x f` over the box `center ± half_width` with a separable weight
    /// (one profile per axis; empty means uniform).
    Zone {
        center: Vec<f64>,
        half_width: Vec<f64>,
        #[serde(default)]
        weight: Vec<WeightProfile>,
    },
    /// `y = Σ_segments ∫_Γ (∂x/∂ν) f` on pieces of ∂Ω.
    BoundaryZone { segments: Vec<BoundarySegment> },
    /// Normal derivative at a boundary point.
    BoundaryPointwise { b: Vec<f64> },
    /// Line integral `∫_σ x f ds` along a polyline with constant weight per segment
    /// (empty means 1 on every segment).
    Filament {
        points: Vec<Vec<f64>>,
        #[serde(default)]
        weights: Vec<f64>,
    },
}

impl Sensor {
    pub fn pointwise(b: &[f64]) -> Self {
        Self::Pointwise { b: b.to_vec() }
    }

    pub fn zone(center: &[f64], half_width: &[f64], weight: Vec<WeightProfile>) -> Self {
        Self::Zone { center: center.to_vec(), half_width: half_width.to_vec(), weight }
    }

    pub fn boundary_zone(segments: Vec<BoundarySegment>) -> Self {
        Self::BoundaryZone { segments }
    }

    pub fn boundary_pointwise(b: &[f64]) -> Self {
        Self::BoundaryPointwise { b: b.to_vec() }
    }

    pub fn filament(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Self {
        Self::Filament { points, weights }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Pointwise { .. } => "pointwise",
            Self::Zone { .. } => "zone",
            Self::BoundaryZone { .. } => "boundary_zone",
            Self::BoundaryPointwise { .. } => "boundary_pointwise",
            Self::Filament { .. } => "filament",
        }
    }

    fn zone_profile(weight: &[WeightProfile], k: usize) -> &WeightProfile {
        weight.get(k).unwrap_or(&WeightProfile::Uniform)
    }

    /// Checks the sensor against the domain geometry.
    pub fn validate(&self, geometry: &DomainGeometry) -> Result<()> {
        let dim = geometry.dim();
        let bad = |msg: String| Err(Error::Configuration(format!("{} sensor: {msg}", self.kind())));
        match self {
            Self::Pointwise { b } => {
                if !geometry.contains_open(b) {
                    return bad(format!("point {b:?} must lie strictly inside the domain"));
                }
            }
            Self::Zone { center, half_width, weight } => {
                if center.len() != dim || half_width.len() != dim {
                    return bad(format!("center and half_width need {dim} coordinates"));
                }
                if !(weight.is_empty() || weight.len() == dim) {
                    return bad(format!("give one weight profile per axis ({dim}) or none"));
                }
                for w in weight {
                    w.validate()?;
                }
                for k in 0..dim {
                    let (lo, hi) = (center[k] - half_width[k], center[k] + half_width[k]);
                    if !(half_width[k] > 0.0) || !(lo > 0.0 && hi < geometry.length(k)) {
                        return bad(format!(
                            "support ({lo}, {hi}) on axis {k} must have positive width and lie strictly inside the domain"
                        ));
                    }
                }
            }
            Self::BoundaryZone { segments } => {
                if dim != 2 {
                    return bad("boundary zones are defined on rectangles only".into());
                }
                if segments.is_empty() {
                    return bad("at least one boundary segment is required".into());
                }
                for s in segments {
                    s.weight.validate()?;
                    let len = geometry.length(s.edge.tangential_axis());
                    if !(s.from >= 0.0 && s.to <= len && s.from < s.to) {
                        return bad(format!(
                            "segment ({}, {}) must be a nonempty interval of the {:?} edge [0, {len}]",
                            s.from, s.to, s.edge
                        ));
                    }
                }
            }
            Self::BoundaryPointwise { b } => {
                if !geometry.contains_closed(b) || boundary_normal(geometry, b).is_none() {
                    return bad(format!("point {b:?} must lie on the boundary (not on a corner)"));
                }
            }
            Self::Filament { points, weights } => {
                if points.len() < 2 {
                    return bad("a filament needs at least two points".into());
                }
                if points.iter().any(|p| !geometry.contains_closed(p)) {
                    return bad("all filament points must lie in the closed domain".into());
                }
                if !(weights.is_empty() || weights.len() == points.len() - 1) {
                    return bad("give one weight per polyline segment or none".into());
                }
                if points.windows(2).any(|w| segment_length(&w[0], &w[1]) == 0.0) {
                    return bad("filament segments must have positive length".into());
                }
            }
        }
        Ok(())
    }

    /// The same sensor with its weight multiplied by `c` (Dirac sensors cannot be rescaled).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Ok(match self {
            Self::Zone { center, half_width, weight } => {
                let dim = center.len();
                let mut w: Vec<WeightProfile> =
                    (0..dim).map(|k| Self::zone_profile(weight, k).clone()).collect();
                w[0] = w[0].scaled(c);
                Self::Zone { center: center.clone(), half_width: half_width.clone(), weight: w }
            }
            Self::BoundaryZone { segments } => Self::BoundaryZone {
                segments: segments
                    .iter()
                    .map(|s| BoundarySegment { weight: s.weight.scaled(c), ..s.clone() })
                    .collect(),
            },
            Self::Filament { points, weights } => Self::Filament {
                points: points.clone(),
                weights: if weights.is_empty() {
                    vec![c; points.len() - 1]
                } else {
                    weights.iter().map(|w| c * w).collect()
                },
            },
            _ => {
                return Err(Error::Configuration(format!("{} sensors carry no weight to rescale", self.kind())));
            }
        })
    }

    /// Moves the sensor's position parameter along `axis` to `value`: the point for pointwise
    /// sensors, the center for zones, the center of each segment running along `axis` for
    /// boundary zones, and a rigid translation (first point) for filaments.
    pub fn with_position(&self, axis: usize, value: f64) -> Result<Self> {
        let mut out = self.clone();
        let axis_err = || Error::Configuration(format!("{} sensor has no position along axis {axis}", self.kind()));
        match &mut out {
            Self::Pointwise { b } | Self::BoundaryPointwise { b } => *b.get_mut(axis).ok_or_else(axis_err)? = value,
            Self::Zone { center, .. } => *center.get_mut(axis).ok_or_else(axis_err)? = value,
            Self::BoundaryZone { segments } => {
                let mut moved = false;
                for s in segments.iter_mut().filter(|s| s.edge.tangential_axis() == axis) {
                    let half = 0.5 * (s.to - s.from);
                    s.from = value - half;
                    s.to = value + half;
                    moved = true;
                }
                if !moved {
                    return Err(axis_err());
                }
            }
            Self::Filament { points, .. } => {
                let shift = value - *points[0].get(axis).ok_or_else(axis_err)?;
                for p in points.iter_mut() {
                    p[axis] += shift;
                }
            }
        }
        Ok(out)
    }
}

fn segment_length(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// `(normal axis, outward sign)` at a boundary point; `None` inside the domain or on a corner.
fn boundary_normal(geometry: &DomainGeometry, b: &[f64]) -> Option<(usize, f64)> {
    let mut found = None;
    for (k, &x) in b.iter().enumerate() {
        let len = geometry.length(k);
        let tol = 1e-12 * len;
        let side = if x.abs() <= tol {
            Some(-1.0)
        } else if (x - len).abs() <= tol {
            Some(1.0)
        } else {
            None
        };
        if let Some(sign) = side {
            if found.is_some() {
                return None;
            }
            found = Some((k, sign));
        }
    }
    found
}

fn measure(sensor: &Sensor, model: &DiffusionModel, index: ModeIndex, closed_form: bool) -> Result<f64> {
    sensor.validate(model.geometry())?;
    if index.dim() != model.dim() {
        return Err(Error::Shape(format!("mode {index} does not match a {}D model", model.dim())));
    }
    let geometry = model.geometry();
    let dim = model.dim();
    let len = |k: usize| geometry.length(k);
    Ok(match sensor {
        Sensor::Pointwise { b } => model.evaluate_mode(index, b)?,
        Sensor::Zone { center, half_width, weight } => (0..dim)
            .map(|k| {
                Sensor::zone_profile(weight, k).sine_moment(
                    center[k] - half_width[k],
                    center[k] + half_width[k],
                    index.axis(k),
                    len(k),
                    closed_form,
                )
            })
            .product(),
        Sensor::BoundaryZone { segments } => segments
            .iter()
            .map(|s| {
                let (nk, tk) = (s.edge.normal_axis(), s.edge.tangential_axis());
                let (coord, sign) = s.edge.placement(geometry);
                let normal = sign * sine_factor(1, index.axis(nk), len(nk), coord);
                normal * s.weight.sine_moment(s.from, s.to, index.axis(tk), len(tk), closed_form)
            })
            .sum(),
        Sensor::BoundaryPointwise { b } => {
            let (nk, sign) = boundary_normal(geometry, b).expect("validated boundary point");
            let mut orders = [0usize; 2];
            orders[nk] = 1;
            sign * model.mode_derivative_unchecked(index, &orders[..dim], b)
        }
        Sensor::Filament { points, weights } => points
            .windows(2)
            .enumerate()
            .map(|(s, w)| {
                let f = weights.get(s).copied().unwrap_or(1.0);
                let (p, q) = (&w[0], &w[1]);
                let length = segment_length(p, q);
                let zero = [0usize; 2];
                let mut point = vec![0.0; dim];
                f * length
                    * integrate_1d(FILAMENT_ORDER, 0.0, 1.0, |t| {
                        for k in 0..dim {
                            point[k] = p[k] + t * (q[k] - p[k]);
                        }
                        model.mode_derivative_unchecked(index, &zero[..dim], &point)
                    })
            })
            .sum(),
    })
}

/// Measurement of eigenfunction `index` by `sensor`; closed forms are used where available.
pub fn mode_measurement(sensor: &Sensor, model: &DiffusionModel, index: ModeIndex) -> Result<f64> {
    measure(sensor, model, index, true)
}

/// Same as [`mode_measurement`] but always integrates weighted supports by quadrature.
pub fn mode_measurement_by_quadrature(sensor: &Sensor, model: &DiffusionModel, index: ModeIndex) -> Result<f64> {
    measure(sensor, model, index, false)
}

/// The output operator C on the truncated modal space: `q × n_modes`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputOperator {
    matrix: DMatrix<f64>,
    sensors: Vec<Sensor>,
    modes: Vec<ModeIndex>,
}

impl OutputOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn sensors(&self) -> &[Sensor] {
        &self.sensors
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn n_sensors(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.ncols()
    }

    /// Largest singular value of C; the reference scale for numerical rank decisions.
    pub fn scale(&self) -> f64 {
        self.matrix.singular_values().max()
    }

    /// Copy with sensor row `i` multiplied by `c`.
    pub fn with_row_scaled(&self, i: usize, c: f64) -> Self {
        let mut out = self.clone();
        out.matrix.row_mut(i).scale_mut(c);
        out
    }

    /// Columns of C for the given retained positions.
    pub fn columns(&self, positions: &[usize]) -> DMatrix<f64> {
        self.matrix.select_columns(positions)
    }
}

/// Row i, column m is `mode_measurement(sensor_i, model, mode m)` in eigenpair order.
pub fn build_output_matrix(sensors: &[Sensor], model: &DiffusionModel) -> Result<OutputOperator> {
    if sensors.is_empty() {
        return Err(Error::Configuration("at least one sensor is required".into()));
    }
    let modes: Vec<ModeIndex> = model.eigenpairs().iter().map(|p| p.index).collect();
    let mut matrix = DMatrix::zeros(sensors.len(), modes.len());
    for (i, s) in sensors.iter().enumerate() {
        for (m, &idx) in modes.iter().enumerate() {
            matrix[(i, m)] = mode_measurement(s, model, idx)?;
        }
    }
    Ok(OutputOperator { matrix, sensors: sensors.to_vec(), modes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Truncation;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::{PI, SQRT_2};

    fn interval(n: usize) -> DiffusionModel {
        DiffusionModel::new(DomainGeometry::interval(1.0).unwrap(), 1.0, 0.0, Truncation::OneD(n)).unwrap()
    }

    fn square(n: usize) -> DiffusionModel {
        DiffusionModel::new(DomainGeometry::rectangle(1.0, 1.0).unwrap(), 1.0, 0.0, Truncation::TwoD(n, n)).unwrap()
    }

    #[test]
    fn pointwise_midpoint_kills_even_modes() {
        let m = interval(4);
        let s = Sensor::pointwise(&[0.5]);
        assert_abs_diff_eq!(mode_measurement(&s, &m, ModeIndex::OneD(2)).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mode_measurement(&s, &m, ModeIndex::OneD(1)).unwrap(), SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn uniform_zone_closed_form() {
        let m = interval(4);
        let s = Sensor::zone(&[0.5], &[0.25], vec![]);
        let expected = SQRT_2 * ((PI / 4.0).cos() - (3.0 * PI / 4.0).cos()) / PI;
        let c = mode_measurement(&s, &m, ModeIndex::OneD(1)).unwrap();
        assert_abs_diff_eq!(c, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(c, 0.636_619_77, epsilon = 1e-8);
        let q = mode_measurement_by_quadrature(&s, &m, ModeIndex::OneD(1)).unwrap();
        assert_abs_diff_eq!(q, c, epsilon = 1e-10);
    }

    #[test]
    fn boundary_zone_right_edge() {
        let m = square(2);
        let s = Sensor::boundary_zone(vec![BoundarySegment {
            edge: Edge::Right,
            from: 0.0,
            to: 1.0,
            weight: WeightProfile::Uniform,
        }]);
        let c = mode_measurement(&s, &m, ModeIndex::TwoD(1, 1)).unwrap();
        assert_abs_diff_eq!(c, -4.0, epsilon = 1e-13);
        let q = mode_measurement_by_quadrature(&s, &m, ModeIndex::TwoD(1, 1)).unwrap();
        assert_abs_diff_eq!(q, -4.0, epsilon = 1e-10);
    }

    #[test]
    fn irrational_point_row() {
        let m = interval(4);
        let b = 1.0 / SQRT_2;
        let c = build_output_matrix(&[Sensor::pointwise(&[b])], &m).unwrap();
        assert_eq!(c.matrix().shape(), (1, 4));
        for n in 1..=4 {
            let e = SQRT_2 * (n as f64 * PI * b).sin();
            assert_abs_diff_eq!(c.matrix()[(0, n - 1)], e, epsilon = 1e-14);
            assert!(e.abs() > 0.1);
        }
    }

    #[test]
    fn two_sensor_rows_match_individual_measurements() {
        let m = square(3);
        let sensors = vec![Sensor::pointwise(&[0.3, 0.7]), Sensor::zone(&[0.4, 0.4], &[0.1, 0.2], vec![])];
        let c = build_output_matrix(&sensors, &m).unwrap();
        for (i, s) in sensors.iter().enumerate() {
            for (k, p) in m.eigenpairs().iter().enumerate() {
                assert_eq!(c.matrix()[(i, k)], mode_measurement(s, &m, p.index).unwrap());
            }
        }
    }

    #[test]
    fn empty_sensor_list_rejected() {
        assert!(build_output_matrix(&[], &interval(2)).is_err());
    }

    #[test]
    fn tent_zone_symmetry_nulls() {
        let g = DomainGeometry::rectangle(1.0, 2.0).unwrap();
        let m = DiffusionModel::new(g, 1.0, 0.0, Truncation::TwoD(8, 8)).unwrap();
        // center 0.5 on axis 1: every even i vanishes
        let s = Sensor::zone(&[0.5, 0.77], &[0.1, 0.1], vec![WeightProfile::Tent, WeightProfile::Tent]);
        for p in m.eigenpairs() {
            let c = mode_measurement(&s, &m, p.index).unwrap();
            if p.index.axis(0) % 2 == 0 {
                assert_abs_diff_eq!(c, 0.0, epsilon = 1e-12);
            } else {
                assert!(c.abs() > 1e-6, "{} {c}", p.index);
            }
        }
    }

    #[test]
    fn boundary_point_without_normal_derivative_measures_zero() {
        let m = square(4);
        for p in m.eigenpairs() {
            assert_abs_diff_eq!(m.evaluate_mode(p.index, &[1.0, 0.37]).unwrap(), 0.0, epsilon = 1e-14);
        }
        let s = Sensor::boundary_pointwise(&[1.0, 0.5]);
        let c = mode_measurement(&s, &m, ModeIndex::TwoD(1, 1)).unwrap();
        // +∂φ/∂ξ₁ at ξ₁ = 1: 2·π·cos(π)·sin(π/2)
        assert_relative_eq!(c, -2.0 * PI, max_relative = 1e-14);
    }

    #[test]
    fn filament_along_straight_line_matches_zone_integral() {
        let m = square(3);
        // a horizontal filament at ξ₂ = 0.4 from 0.2 to 0.6 equals φ-weighted line integral
        let s = Sensor::filament(vec![vec![0.2, 0.4], vec![0.6, 0.4]], vec![]);
        let idx = ModeIndex::TwoD(2, 1);
        let line = WeightProfile::Uniform.sine_moment(0.2, 0.6, 2, 1.0, true) * sine_factor(0, 1, 1.0, 0.4);
        assert_abs_diff_eq!(mode_measurement(&s, &m, idx).unwrap(), line, epsilon = 1e-12);
    }

    #[test]
    fn geometry_mismatch_is_configuration_error() {
        let m1 = interval(3);
        let seg = BoundarySegment { edge: Edge::Top, from: 0.1, to: 0.2, weight: WeightProfile::Uniform };
        assert!(matches!(
            mode_measurement(&Sensor::boundary_zone(vec![seg.clone()]), &m1, ModeIndex::OneD(1)),
            Err(Error::Configuration(_))
        ));
        let m2 = square(2);
        let bad_segment = BoundarySegment { to: 1.5, ..seg };
        assert!(mode_measurement(&Sensor::boundary_zone(vec![bad_segment]), &m2, ModeIndex::TwoD(1, 1)).is_err());
        assert!(mode_measurement(&Sensor::boundary_pointwise(&[0.5, 0.5]), &m2, ModeIndex::TwoD(1, 1)).is_err());
        assert!(mode_measurement(&Sensor::boundary_pointwise(&[1.0, 1.0]), &m2, ModeIndex::TwoD(1, 1)).is_err());
        assert!(mode_measurement(&Sensor::pointwise(&[1.0, 0.5]), &m2, ModeIndex::TwoD(1, 1)).is_err());
        assert!(mode_measurement(&Sensor::zone(&[0.05, 0.5], &[0.1, 0.1], vec![]), &m2, ModeIndex::TwoD(1, 1)).is_err());
        assert!(mode_measurement(&Sensor::filament(vec![vec![0.1, 0.1]], vec![]), &m2, ModeIndex::TwoD(1, 1)).is_err());
    }

    #[test]
    fn sensor_json_shape() {
        let s = Sensor::zone(&[0.5, 0.5], &[0.1, 0.1], vec![WeightProfile::Tent, WeightProfile::Tabulated(vec![0.0, 1.0, 0.0])]);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(
            text,
            r#"{"type":"zone","center":[0.5,0.5],"half_width":[0.1,0.1],"weight":["tent",{"tabulated":[0.0,1.0,0.0]}]}"#
        );
        let back: Sensor = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<Sensor>(r#"{"type":"pointwise","b":[0.5],"extra":1}"#).is_err());
    }
}

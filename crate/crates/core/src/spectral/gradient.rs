//! Regional gradient calculus on the truncated sine basis: sampling `∇x` on quadrature grids,
//! `(H¹(ω))ⁿ` norms, restriction to ω and its zero-extension adjoint, and `∇*`.

use nalgebra::{DMatrix, DVector};

use super::geometry::Subregion;
use super::model::{sine_factor, DiffusionModel};
use super::quadrature::QuadratureGrid;
use crate::error::{Error, Result};

/// Coefficients of a state in the retained eigenbasis, ordered like [`DiffusionModel::eigenpairs`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModalState(DVector<f64>);

impl ModalState {
    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        Self(DVector::from_vec(values))
    }

    pub fn from_vector(values: DVector<f64>) -> Self {
        Self(values)
    }

    /// Unit coefficient on retained position `m`.
    pub fn unit(n: usize, m: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[m] = 1.0;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    pub fn check_against(&self, model: &DiffusionModel) -> Result<()> {
        if self.len() != model.n_modes() {
            return Err(Error::Shape(format!(
                "modal state has {} coefficients, model retains {} modes",
                self.len(),
                model.n_modes()
            )));
        }
        Ok(())
    }
}

/// Samples of an n-component vector field and of its first derivatives at the nodes of a grid.
///
/// `values[k][p]` is component k at node p; `derivatives[k * n + l][p]` is `∂g_k/∂ξ_l` at node p.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    dim: usize,
    values: Vec<Vec<f64>>,
    derivatives: Vec<Vec<f64>>,
}

impl GradientField {
    pub fn new(dim: usize, values: Vec<Vec<f64>>, derivatives: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != dim || derivatives.len() != dim * dim {
            return Err(Error::Shape(format!(
                "a {dim}D gradient field needs {dim} components and {} derivative rows",
                dim * dim
            )));
        }
        let nodes = values.first().map_or(0, Vec::len);
        if values.iter().chain(&derivatives).any(|v| v.len() != nodes) {
            return Err(Error::Shape("all sample rows must have the same length".into()));
        }
        Ok(Self { dim, values, derivatives })
    }

    pub fn zeros(dim: usize, nodes: usize) -> Self {
        Self {
            dim,
            values: vec![vec![0.0; nodes]; dim],
            derivatives: vec![vec![0.0; nodes]; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn component(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn derivative(&self, k: usize, l: usize) -> &[f64] {
        &self.derivatives[k * self.dim + l]
    }

    /// Divergence `Σ_k ∂g_k/∂ξ_k` at every node.
    pub fn divergence(&self) -> Vec<f64> {
        (0..self.len())
            .map(|p| (0..self.dim).map(|k| self.derivatives[k * self.dim + k][p]).sum())
            .collect()
    }

    /// Component values stacked as `[g_0 at all nodes, g_1 at all nodes, ...]`.
    pub fn stacked_values(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim * self.len(), self.values.iter().flatten().copied())
    }

    pub fn scale(&self, c: f64) -> Self {
        let f = |rows: &Vec<Vec<f64>>| rows.iter().map(|r| r.iter().map(|x| c * x).collect()).collect();
        Self { dim: self.dim, values: f(&self.values), derivatives: f(&self.derivatives) }
    }

    fn check_grid(&self, grid: &QuadratureGrid) -> Result<()> {
        if grid.dim() != self.dim || grid.len() != self.len() {
            return Err(Error::Shape(format!(
                "field with {} components over {} nodes does not match a {}D grid of {} nodes",
                self.dim,
                self.len(),
                grid.dim(),
                grid.len()
            )));
        }
        Ok(())
    }
}

/// Linear map from modal coefficients to gradient samples on a fixed grid.
///
/// Rows of `values` are `(component k, node p)` at `k * nodes + p`; rows of `derivatives` are
/// `((k, l), p)` at `(k * dim + l) * nodes + p`.
#[derive(Debug, Clone)]
pub struct GradientSampler {
    dim: usize,
    nodes: usize,
    values: DMatrix<f64>,
    derivatives: DMatrix<f64>,
}

impl GradientSampler {
    pub fn new(model: &DiffusionModel, grid: &QuadratureGrid) -> Result<Self> {
        let dim = model.dim();
        if grid.dim() != dim {
            return Err(Error::Shape(format!("{}D grid for a {dim}D model", grid.dim())));
        }
        if !model.geometry().whole().contains_region(&grid.region()) {
            return Err(Error::Domain("grid extends outside the domain".into()));
        }
        let nodes = grid.len();
        let n_modes = model.n_modes();
        let mut values = DMatrix::zeros(dim * nodes, n_modes);
        let mut derivatives = DMatrix::zeros(dim * dim * nodes, n_modes);
        // per-axis tables of the 1D factor and its derivatives
        let tables: Vec<Vec<[Vec<f64>; 3]>> = (0..dim)
            .map(|k| {
                let len = model.geometry().length(k);
                let cap = model.truncation().cap(k);
                (1..=cap)
                    .map(|n| {
                        let t = |order| grid.axis(k).nodes().iter().map(|&x| sine_factor(order, n, len, x)).collect();
                        [t(0), t(1), t(2)]
                    })
                    .collect()
            })
            .collect();
        for (m, pair) in model.eigenpairs().iter().enumerate() {
            let idx = pair.index;
            for p in 0..nodes {
                let split = grid.split_index(p);
                let factor = |k: usize, order: usize| tables[k][idx.axis(k) - 1][order][split[k]];
                let partial = |orders: [usize; 2]| -> f64 { (0..dim).map(|k| factor(k, orders[k])).product() };
                for k in 0..dim {
                    let mut first = [0usize; 2];
                    first[k] += 1;
                    values[(k * nodes + p, m)] = partial(first);
                    for l in 0..dim {
                        let mut second = first;
                        second[l] += 1;
                        derivatives[((k * dim + l) * nodes + p, m)] = partial(second);
                    }
                }
            }
        }
        Ok(Self { dim, nodes, values, derivatives })
    }

    /// The gradient-value sampling matrix (the χ_ω∇ map on this grid).
    pub fn values_matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn derivatives_matrix(&self) -> &DMatrix<f64> {
        &self.derivatives
    }

    pub fn sample(&self, state: &ModalState) -> Result<GradientField> {
        self.sample_vector(state.coefficients())
    }

    pub fn sample_vector(&self, coefficients: &DVector<f64>) -> Result<GradientField> {
        if coefficients.len() != self.values.ncols() {
            return Err(Error::Shape(format!(
                "{} coefficients for a sampler over {} modes",
                coefficients.len(),
                self.values.ncols()
            )));
        }
        let v = &self.values * coefficients;
        let d = &self.derivatives * coefficients;
        let rows = |flat: &DVector<f64>, count: usize| {
            (0..count).map(|r| flat.rows(r * self.nodes, self.nodes).iter().copied().collect()).collect()
        };
        Ok(GradientField {
            dim: self.dim,
            values: rows(&v, self.dim),
            derivatives: rows(&d, self.dim * self.dim),
        })
    }
}

/// Samples `Σ aₘ∇φₘ` and its first derivatives at the grid nodes (analytic formulas).
pub fn evaluate_gradient(model: &DiffusionModel, state: &ModalState, grid: &QuadratureGrid) -> Result<GradientField> {
    state.check_against(model)?;
    GradientSampler::new(model, grid)?.sample(state)
}

/// `(H¹)ⁿ` norm over the grid region: `sqrt(Σ_k ∫ g_k² + |∇g_k|²)`.
pub fn h1_norm_omega(field: &GradientField, grid: &QuadratureGrid) -> Result<f64> {
    field.check_grid(grid)?;
    let w = grid.weights();
    let mut total = 0.0;
    for row in field.values.iter().chain(&field.derivatives) {
        total += row.iter().zip(&w).map(|(g, w)| w * g * g).sum::<f64>();
    }
    Ok(total.sqrt())
}

/// `(L²)ⁿ` norm of the field components only.
pub fn l2_norm_omega(field: &GradientField, grid: &QuadratureGrid) -> Result<f64> {
    field.check_grid(grid)?;
    let w = grid.weights();
    let total: f64 = field
        .values
        .iter()
        .map(|row| row.iter().zip(&w).map(|(g, w)| w * g * g).sum::<f64>())
        .sum();
    Ok(total.sqrt())
}

/// χ_ω: keeps the samples at nodes inside `omega`. The grid must have panel breakpoints on the
/// faces of `omega` (see [`QuadratureGrid::aligned`]); returns the restricted field and grid.
pub fn restrict(field: &GradientField, grid: &QuadratureGrid, omega: &Subregion) -> Result<(GradientField, QuadratureGrid)> {
    field.check_grid(grid)?;
    let ranges = grid.restriction_ranges(omega)?;
    let sub = grid.select(&ranges, omega);
    let keep: Vec<usize> = (0..grid.len())
        .filter(|&p| {
            let s = grid.split_index(p);
            (0..grid.dim()).all(|k| ranges[k].contains(&s[k]))
        })
        .collect();
    let pick = |rows: &Vec<Vec<f64>>| rows.iter().map(|r| keep.iter().map(|&p| r[p]).collect()).collect();
    Ok((
        GradientField { dim: field.dim, values: pick(&field.values), derivatives: pick(&field.derivatives) },
        sub,
    ))
}

/// χ_ω*: zero-extension of a field on the ω grid to a full grid aligned with ω.
pub fn extend_by_zero(field: &GradientField, omega_grid: &QuadratureGrid, full_grid: &QuadratureGrid) -> Result<GradientField> {
    field.check_grid(omega_grid)?;
    let omega = omega_grid.region();
    let ranges = full_grid.restriction_ranges(&omega)?;
    let sub = full_grid.select(&ranges, &omega);
    if sub.axes().iter().zip(omega_grid.axes()).any(|(a, b)| a.nodes() != b.nodes()) {
        return Err(Error::Grid("the ω grid is not a sub-grid of the full grid".into()));
    }
    let mut out = GradientField::zeros(field.dim, full_grid.len());
    let mut q = 0;
    for p in 0..full_grid.len() {
        let s = full_grid.split_index(p);
        if (0..full_grid.dim()).all(|k| ranges[k].contains(&s[k])) {
            for (dst, src) in out.values.iter_mut().zip(&field.values) {
                dst[p] = src[q];
            }
            for (dst, src) in out.derivatives.iter_mut().zip(&field.derivatives) {
                dst[p] = src[q];
            }
            q += 1;
        }
    }
    Ok(out)
}

/// ∇*: modal coefficients of the solution `v` of `Δv = -div(x)`, `v = 0` on ∂Ω.
///
/// `div(x)` is projected on the retained sine basis by quadrature over `grid`, which must cover Ω.
pub fn gradient_adjoint(model: &DiffusionModel, field: &GradientField, grid: &QuadratureGrid) -> Result<ModalState> {
    field.check_grid(grid)?;
    if grid.region() != model.geometry().whole() {
        return Err(Error::Grid("the adjoint gradient needs a grid covering the whole domain".into()));
    }
    let div = field.divergence();
    let w = grid.weights();
    let nodes: Vec<Vec<f64>> = (0..grid.len()).map(|p| grid.node(p)).collect();
    let zero = [0usize; 2];
    let coeffs = model
        .eigenpairs()
        .iter()
        .map(|pair| {
            let projection: f64 = (0..grid.len())
                .map(|p| w[p] * div[p] * model.mode_derivative_unchecked(pair.index, &zero[..model.dim()], &nodes[p]))
                .sum();
            projection / model.laplacian_eigenvalue(pair.index)
        })
        .collect();
    Ok(ModalState::from_vec(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{DomainGeometry, ModeIndex, Truncation};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn unit_interval(n: usize) -> DiffusionModel {
        DiffusionModel::new(DomainGeometry::interval(1.0).unwrap(), 1.0, 0.0, Truncation::OneD(n)).unwrap()
    }

    #[test]
    fn gradient_of_first_mode() {
        let m = unit_interval(4);
        let grid = QuadratureGrid::over(&Subregion::interval(0.0, 1.0), 8).unwrap();
        let f = evaluate_gradient(&m, &ModalState::unit(4, 0), &grid).unwrap();
        for p in 0..grid.len() {
            let x = grid.node(p)[0];
            assert_abs_diff_eq!(f.component(0)[p], 2f64.sqrt() * PI * (PI * x).cos(), epsilon = 1e-13);
        }
        // the spot values at 0.5 and 0 through a one-node "grid" evaluation
        let g = m.mode_gradient(ModeIndex::OneD(1), &[0.5]).unwrap();
        assert_abs_diff_eq!(g[0], 0.0, epsilon = 1e-15);
        let g0 = m.mode_gradient(ModeIndex::OneD(1), &[0.0]).unwrap();
        assert_abs_diff_eq!(g0[0], 4.442_882_938_158_366, epsilon = 1e-12);
    }

    #[test]
    fn zero_state_gives_zero_field() {
        let m = unit_interval(4);
        let grid = QuadratureGrid::over(&Subregion::interval(0.2, 0.8), 8).unwrap();
        let f = evaluate_gradient(&m, &ModalState::zeros(4), &grid).unwrap();
        assert!(f.component(0).iter().all(|&v| v == 0.0));
        assert_eq!(h1_norm_omega(&f, &grid).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_state_is_shape_error() {
        let m = unit_interval(4);
        let grid = QuadratureGrid::over(&Subregion::interval(0.0, 1.0), 8).unwrap();
        assert!(matches!(evaluate_gradient(&m, &ModalState::zeros(3), &grid), Err(Error::Shape(_))));
    }

    #[test]
    fn h1_norm_closed_forms() {
        let m = unit_interval(4);
        let full = QuadratureGrid::over(&Subregion::interval(0.0, 1.0), 64).unwrap();
        let f = evaluate_gradient(&m, &ModalState::unit(4, 0), &full).unwrap();
        // ∫(√2π cos πξ)² + (√2π² sin πξ)² over (0,1) = π² + π⁴
        let exact = (PI.powi(2) + PI.powi(4)).sqrt();
        assert_relative_eq!(h1_norm_omega(&f, &full).unwrap(), exact, max_relative = 1e-12);
        assert_relative_eq!(exact, 10.357_543, max_relative = 1e-6);
        let half = QuadratureGrid::over(&Subregion::interval(0.0, 0.5), 64).unwrap();
        let fh = evaluate_gradient(&m, &ModalState::unit(4, 0), &half).unwrap();
        assert_relative_eq!(h1_norm_omega(&fh, &half).unwrap(), (0.5 * (PI.powi(2) + PI.powi(4))).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn restriction_identity_on_whole_domain() {
        let d = DomainGeometry::interval(1.0).unwrap();
        let m = unit_interval(5);
        let grid = QuadratureGrid::over(&d.whole(), 12).unwrap();
        let f = evaluate_gradient(&m, &ModalState::from_vec(vec![1.0, -2.0, 0.5, 0.0, 3.0]), &grid).unwrap();
        let (r, rg) = restrict(&f, &grid, &d.whole()).unwrap();
        assert_eq!(r, f);
        assert_eq!(rg, grid);
    }

    #[test]
    fn constant_field_restricts_to_constant() {
        let d = DomainGeometry::rectangle(1.0, 2.0).unwrap();
        let omega = Subregion::rectangle(0.1, 0.6, 0.5, 1.5);
        let grid = QuadratureGrid::aligned(&d, &omega, 6).unwrap();
        let ones = GradientField::new(2, vec![vec![1.0; grid.len()]; 2], vec![vec![0.0; grid.len()]; 4]).unwrap();
        let (r, rg) = restrict(&ones, &grid, &omega).unwrap();
        assert_eq!(rg.len(), 36);
        assert!(r.component(0).iter().chain(r.component(1)).all(|&v| v == 1.0));
    }

    #[test]
    fn restrict_outside_domain_fails() {
        let d = DomainGeometry::interval(1.0).unwrap();
        let grid = QuadratureGrid::over(&d.whole(), 8).unwrap();
        let f = GradientField::zeros(1, grid.len());
        assert!(matches!(restrict(&f, &grid, &Subregion::interval(0.5, 1.5)), Err(Error::Domain(_))));
    }

    #[test]
    fn adjoint_of_first_mode_gradient() {
        let m = unit_interval(6);
        let grid = QuadratureGrid::over(&m.geometry().whole(), 64).unwrap();
        let f = evaluate_gradient(&m, &ModalState::unit(6, 0), &grid).unwrap();
        let v = gradient_adjoint(&m, &f, &grid).unwrap();
        assert_abs_diff_eq!(v.coefficients()[0], -1.0, epsilon = 1e-12);
        for k in 1..6 {
            assert_abs_diff_eq!(v.coefficients()[k], 0.0, epsilon = 1e-12);
        }
        let zero = gradient_adjoint(&m, &GradientField::zeros(1, grid.len()), &grid).unwrap();
        assert!(zero.coefficients().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn adjoint_is_linear_on_mixture() {
        let m = unit_interval(6);
        let grid = QuadratureGrid::over(&m.geometry().whole(), 64).unwrap();
        let mut x = ModalState::zeros(6).into_inner();
        x[1] = 1.0;
        x[4] = 3.0;
        let f = evaluate_gradient(&m, &ModalState::from_vector(x.clone()), &grid).unwrap();
        let v = gradient_adjoint(&m, &f, &grid).unwrap();
        for k in 0..6 {
            assert_abs_diff_eq!(v.coefficients()[k], -x[k], epsilon = 1e-11);
        }
    }
}

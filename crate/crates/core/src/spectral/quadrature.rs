use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;

use super::geometry::{DomainGeometry, Subregion};
use crate::error::{Error, Result};

/// Default Gauss–Legendre order per axis (per segment).
pub const DEFAULT_ORDER: usize = 64;

/// Reference Gauss–Legendre nodes and weights on [-1, 1], cached per order.
pub(crate) fn reference_rule(order: usize) -> Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(order)
        .or_insert_with(|| {
            let order = NonZeroUsize::new(order).expect("quadrature order must be >= 1");
            Arc::new(GaussLegendre::new(order).as_node_weight_pairs().to_vec())
        })
        .clone()
}

/// Integrates `f` over `[lo, hi]` with a single Gauss–Legendre panel.
pub(crate) fn integrate_1d(order: usize, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let rule = reference_rule(order);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    half * rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>()
}

/// Composite Gauss–Legendre rule along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    breakpoints: Vec<f64>,
}

impl AxisRule {
    fn composite(breakpoints: Vec<f64>, order: usize) -> Self {
        let rule = reference_rule(order);
        let mut nodes = Vec::with_capacity(order * (breakpoints.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for seg in breakpoints.windows(2) {
            let (lo, hi) = (seg[0], seg[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for &(x, w) in rule.iter() {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        Self { nodes, weights, breakpoints }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn has_breakpoint(&self, x: f64) -> bool {
        let scale = self.breakpoints.last().unwrap().abs().max(1.0);
        self.breakpoints.iter().any(|&b| (b - x).abs() <= 1e-14 * scale)
    }
}

/// Tensor-product quadrature grid over a box. Nodes are ordered row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    axes: Vec<AxisRule>,
    order: usize,
}

impl QuadratureGrid {
    /// Single Gauss–Legendre panel of `order` nodes per axis over `region`.
    pub fn over(region: &Subregion, order: usize) -> Result<Self> {
        Self::composite(region, &vec![Vec::new(); region.dim()], order)
    }

    /// Panels split at the interior `cuts` of each axis.
    pub fn composite(region: &Subregion, cuts: &[Vec<f64>], order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Grid("quadrature order must be at least 1".into()));
        }
        if cuts.len() != region.dim() {
            return Err(Error::Grid("one cut list per axis is required".into()));
        }
        let axes = (0..region.dim())
            .map(|k| {
                let (lo, hi) = region.bounds(k);
                if !(lo < hi) {
                    return Err(Error::Grid(format!("empty axis range ({lo}, {hi})")));
                }
                let mut bps = vec![lo];
                let mut inner: Vec<f64> = cuts[k].iter().copied().filter(|&c| c > lo && c < hi).collect();
                inner.sort_by(f64::total_cmp);
                inner.dedup();
                bps.extend(inner);
                bps.push(hi);
                Ok(AxisRule::composite(bps, order))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { axes, order })
    }

    /// Grid over all of Ω with panels split at the faces of `omega`; restriction to `omega` then
    /// selects an exact sub-grid.
    pub fn aligned(domain: &DomainGeometry, omega: &Subregion, order: usize) -> Result<Self> {
        omega.validate_in(domain)?;
        let cuts: Vec<Vec<f64>> = (0..domain.dim())
            .map(|k| {
                let (lo, hi) = omega.bounds(k);
                vec![lo, hi]
            })
            .collect();
        Self::composite(&domain.whole(), &cuts, order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, k: usize) -> &AxisRule {
        &self.axes[k]
    }

    pub fn axes(&self) -> &[AxisRule] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(AxisRule::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The box covered by the grid.
    pub fn region(&self) -> Subregion {
        let bounds: Vec<_> = self
            .axes
            .iter()
            .map(|a| (a.breakpoints[0], *a.breakpoints.last().unwrap()))
            .collect();
        Subregion::from_bounds(&bounds)
    }

    /// Per-axis node indices of flat node `p`.
    pub fn split_index(&self, p: usize) -> [usize; 2] {
        match self.axes.len() {
            1 => [p, 0],
            _ => {
                let n2 = self.axes[1].len();
                [p / n2, p % n2]
            }
        }
    }

    pub fn node(&self, p: usize) -> Vec<f64> {
        let idx = self.split_index(p);
        (0..self.dim()).map(|k| self.axes[k].nodes[idx[k]]).collect()
    }

    pub fn weight(&self, p: usize) -> f64 {
        let idx = self.split_index(p);
        (0..self.dim()).map(|k| self.axes[k].weights[idx[k]]).product()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|p| self.weight(p)).collect()
    }

    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        (0..self.len()).map(|p| self.weight(p) * f(&self.node(p))).sum()
    }

    /// Per-axis index ranges of the nodes inside `omega`. Faces of `omega` must be breakpoints.
    pub(crate) fn restriction_ranges(&self, omega: &Subregion) -> Result<Vec<std::ops::Range<usize>>> {
        if omega.dim() != self.dim() {
            return Err(Error::Shape("subregion and grid dimensions differ".into()));
        }
        if !self.region().contains_region(omega) {
            return Err(Error::Domain(format!("{omega:?} is not contained in the grid region")));
        }
        (0..self.dim())
            .map(|k| {
                let axis = &self.axes[k];
                let (lo, hi) = omega.bounds(k);
                if !axis.has_breakpoint(lo) || !axis.has_breakpoint(hi) {
                    return Err(Error::Grid(format!(
                        "subregion faces ({lo}, {hi}) on axis {k} are not panel breakpoints of the grid"
                    )));
                }
                let start = axis.nodes.iter().position(|&x| x > lo).unwrap_or(axis.len());
                let end = axis.nodes.iter().rposition(|&x| x < hi).map_or(start, |e| e + 1);
                Ok(start..end)
            })
            .collect()
    }

    /// Sub-grid formed by the given per-axis index ranges.
    pub(crate) fn select(&self, ranges: &[std::ops::Range<usize>], omega: &Subregion) -> Self {
        let axes = self
            .axes
            .iter()
            .zip(ranges)
            .enumerate()
            .map(|(k, (axis, r))| {
                let (lo, hi) = omega.bounds(k);
                let mut bps: Vec<f64> = axis.breakpoints.iter().copied().filter(|&b| b > lo && b < hi).collect();
                bps.insert(0, lo);
                bps.push(hi);
                AxisRule {
                    nodes: axis.nodes[r.clone()].to_vec(),
                    weights: axis.weights[r.clone()].to_vec(),
                    breakpoints: bps,
                }
            })
            .collect();
        Self { axes, order: self.order }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomials_up_to_design_degree() {
        let g = QuadratureGrid::over(&Subregion::interval(0.2, 0.8), 8).unwrap();
        // degree 15 is exact for 8 nodes
        let exact = (0.8f64.powi(16) - 0.2f64.powi(16)) / 16.0;
        assert_relative_eq!(g.integrate(|p| p[0].powi(15)), exact, max_relative = 1e-13);
        assert!(g.axis(0).weights().iter().all(|&w| w > 0.0));
        assert!(g.axis(0).nodes().iter().all(|&x| x > 0.2 && x < 0.8));
    }

    #[test]
    fn tensor_grid_area() {
        let r = Subregion::rectangle(0.0, 1.0, 0.5, 2.0);
        let g = QuadratureGrid::over(&r, 4).unwrap();
        assert_eq!(g.len(), 16);
        assert_relative_eq!(g.integrate(|_| 1.0), 1.5, max_relative = 1e-14);
        assert_relative_eq!(g.integrate(|p| p[0] * p[1]), 0.5 * (4.0 - 0.25) / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn aligned_grid_restricts_to_same_nodes() {
        let d = DomainGeometry::interval(1.0).unwrap();
        let omega = Subregion::interval(0.2, 0.8);
        let full = QuadratureGrid::aligned(&d, &omega, 16).unwrap();
        let sub = QuadratureGrid::over(&omega, 16).unwrap();
        let ranges = full.restriction_ranges(&omega).unwrap();
        let picked = full.select(&ranges, &omega);
        assert_eq!(picked, sub);
    }

    #[test]
    fn unaligned_restriction_is_rejected() {
        let full = QuadratureGrid::over(&Subregion::interval(0.0, 1.0), 16).unwrap();
        assert!(matches!(full.restriction_ranges(&Subregion::interval(0.2, 0.8)), Err(Error::Grid(_))));
        assert!(matches!(full.restriction_ranges(&Subregion::interval(0.2, 1.8)), Err(Error::Domain(_))));
    }
}

//! Strategic-sensor analysis: eigenvalue clustering, the per-cluster measurement matrices `G_m`,
//! the rank test on the unstable part, and an independent observability-Gramian oracle.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::Result;
use crate::sensors::{build_output_matrix, OutputOperator, Sensor};
use crate::spectral::{h1_norm_omega, reference_rule, DiffusionModel, EigenPair, GradientSampler, ModalState, ModeIndex, QuadratureGrid, Subregion};

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-9;
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
pub const DEFAULT_NULL_TOL: f64 = 1e-10;
pub const DEFAULT_FIELD_TOL: f64 = 1e-8;
const TIME_ORDER: usize = 16;
const TIME_PANELS: usize = 16;

/// Eigenvalue with its multiplicity and member modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenCluster {
    pub lambda: f64,
    pub members: Vec<ModeIndex>,
    /// Positions of the members in the eigenpair ordering (model columns).
    #[serde(skip)]
    pub positions: Vec<usize>,
}

impl EigenCluster {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }

    pub fn is_unstable(&self, unstable_margin: f64) -> bool {
        self.lambda >= -unstable_margin
    }
}

/// Greedy clustering of eigenpairs sorted by descending eigenvalue: consecutive eigenvalues within
/// `rel_tol · max(1, |λ|)` of their predecessor share a cluster.
pub fn cluster_eigenvalues(eigenpairs: &[EigenPair], rel_tol: f64) -> Vec<EigenCluster> {
    let mut clusters: Vec<EigenCluster> = Vec::new();
    let mut prev: Option<f64> = None;
    for (pos, pair) in eigenpairs.iter().enumerate() {
        let joins = prev.is_some_and(|p| (p - pair.lambda).abs() <= rel_tol * pair.lambda.abs().max(1.0));
        match clusters.last_mut() {
            Some(c) if joins => {
                c.members.push(pair.index);
                c.positions.push(pos);
            }
            _ => clusters.push(EigenCluster { lambda: pair.lambda, members: vec![pair.index], positions: vec![pos] }),
        }
        prev = Some(pair.lambda);
    }
    clusters
}

/// The `q × r_m` measurement matrix of one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct GmMatrix {
    pub cluster: EigenCluster,
    pub matrix: DMatrix<f64>,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

impl GmMatrix {
    /// Builds `G_m` from the cluster's columns of C. Singular values count toward the rank when they
    /// exceed `rank_tol · scale`, where `scale` is the largest singular value of the full output
    /// operator.
    pub fn from_output(output: &OutputOperator, cluster: &EigenCluster, rank_tol: f64) -> Self {
        Self::from_matrix(output.columns(&cluster.positions), cluster, rank_tol * output.scale())
    }

    fn from_matrix(matrix: DMatrix<f64>, cluster: &EigenCluster, threshold: f64) -> Self {
        let mut singular_values: Vec<f64> = matrix.singular_values().iter().copied().collect();
        singular_values.sort_by(|a, b| b.total_cmp(a));
        let rank = singular_values.iter().filter(|&&s| s > threshold).count();
        Self { cluster: cluster.clone(), matrix, singular_values, rank }
    }

    pub fn required_rank(&self) -> usize {
        self.cluster.multiplicity()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.required_rank()
    }

    /// `σ_{r_m}(G_m)`, zero when there are fewer sensors than the multiplicity.
    pub fn margin(&self) -> f64 {
        self.singular_values.get(self.required_rank() - 1).copied().unwrap_or(0.0)
    }
}

/// `G_m` for one cluster, computed from scratch for the given sensors.
pub fn build_gm(sensors: &[Sensor], model: &DiffusionModel, cluster: &EigenCluster) -> Result<GmMatrix> {
    let output = build_output_matrix(sensors, model)?;
    Ok(GmMatrix::from_output(&output, cluster, DEFAULT_RANK_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategicOptions {
    /// Clusters with `λ >= -unstable_margin` form the unstable part.
    pub unstable_margin: f64,
    pub cluster_tol: f64,
    pub rank_tol: f64,
}

impl Default for StrategicOptions {
    fn default() -> Self {
        Self { unstable_margin: 0.0, cluster_tol: DEFAULT_CLUSTER_TOL, rank_tol: DEFAULT_RANK_TOL }
    }
}

impl StrategicOptions {
    pub fn with_margin(unstable_margin: f64) -> Self {
        Self { unstable_margin, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterVerdict {
    pub lambda: f64,
    pub members: Vec<ModeIndex>,
    pub multiplicity: usize,
    pub rank: usize,
    pub required_rank: usize,
    pub singular_values: Vec<f64>,
    pub full_rank: bool,
}

impl From<&GmMatrix> for ClusterVerdict {
    fn from(g: &GmMatrix) -> Self {
        Self {
            lambda: g.cluster.lambda,
            members: g.cluster.members.clone(),
            multiplicity: g.cluster.multiplicity(),
            rank: g.rank,
            required_rank: g.required_rank(),
            singular_values: g.singular_values.clone(),
            full_rank: g.is_full_rank(),
        }
    }
}

/// Outcome of the rank test on the unstable part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategicReport {
    pub unstable_margin: f64,
    /// Number of sensors.
    pub q: usize,
    /// Largest multiplicity among unstable clusters (0 when there are none).
    pub r: usize,
    pub verdict: bool,
    /// `min σ_{r_m}(G_m)` over unstable clusters; `None` for a stable system.
    pub margin: Option<f64>,
    pub clusters: Vec<ClusterVerdict>,
    /// Members of the unstable clusters that fail the rank condition.
    pub offending: Vec<Vec<ModeIndex>>,
    #[serde(skip)]
    pub gm: Vec<GmMatrix>,
}

impl StrategicReport {
    /// Unstable clusters, in descending eigenvalue order.
    pub fn unstable_clusters(&self) -> impl Iterator<Item = &EigenCluster> {
        self.gm.iter().map(|g| &g.cluster)
    }
}

/// Rank test on an already assembled output operator.
pub fn analyze_output(output: &OutputOperator, model: &DiffusionModel, options: &StrategicOptions) -> StrategicReport {
    let clusters = cluster_eigenvalues(model.eigenpairs(), options.cluster_tol);
    let gm: Vec<GmMatrix> = clusters
        .iter()
        .filter(|c| c.is_unstable(options.unstable_margin))
        .map(|c| GmMatrix::from_output(output, c, options.rank_tol))
        .collect();
    let q = output.n_sensors();
    let r = gm.iter().map(GmMatrix::required_rank).max().unwrap_or(0);
    let all_full = gm.iter().all(GmMatrix::is_full_rank);
    let margin = gm.iter().map(GmMatrix::margin).reduce(f64::min);
    StrategicReport {
        unstable_margin: options.unstable_margin,
        q,
        r,
        verdict: q >= r && all_full,
        margin,
        clusters: gm.iter().map(ClusterVerdict::from).collect(),
        offending: gm.iter().filter(|g| !g.is_full_rank()).map(|g| g.cluster.members.clone()).collect(),
        gm,
    }
}

/// Decides whether `sensors` are gradient strategic on `omega` for the unstable part:
/// `q >= r` and `rank G_m = r_m` for every unstable cluster.
///
/// The rank condition does not depend on ω; `omega` is validated against the domain only.
pub fn check_strategic(sensors: &[Sensor], model: &DiffusionModel, omega: &Subregion, unstable_margin: f64) -> Result<StrategicReport> {
    check_strategic_with(sensors, model, omega, &StrategicOptions::with_margin(unstable_margin))
}

pub fn check_strategic_with(sensors: &[Sensor], model: &DiffusionModel, omega: &Subregion, options: &StrategicOptions) -> Result<StrategicReport> {
    omega.validate_in(model.geometry())?;
    let output = build_output_matrix(sensors, model)?;
    Ok(analyze_output(&output, model, options))
}

/// Regional gradient detectability: the strategic verdict for the unstable part.
pub fn detectability_check(report: &StrategicReport) -> bool {
    report.verdict
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramianOptions {
    pub horizon: f64,
    pub null_tol: f64,
    pub field_tol: f64,
    /// Restrict the Gramian to clusters with `λ >= -margin`; `None` uses every retained mode.
    pub unstable_margin: Option<f64>,
}

impl GramianOptions {
    pub fn new(horizon: f64) -> Self {
        Self { horizon, null_tol: DEFAULT_NULL_TOL, field_tol: DEFAULT_FIELD_TOL, unstable_margin: None }
    }

    pub fn unstable_only(mut self, margin: f64) -> Self {
        self.unstable_margin = Some(margin);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullDirection {
    /// Coefficients over `GramianVerdict::modes`.
    pub direction: Vec<f64>,
    /// Singular value of the Gramian factor along the direction, relative to the largest.
    pub relative_singular_value: f64,
    /// `‖χ_ω∇(Σ dₘφₘ)‖` in `(H¹(ω))ⁿ`.
    pub field_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramianVerdict {
    pub observable: bool,
    pub modes: Vec<ModeIndex>,
    pub null_dimension: usize,
    /// Null direction with the smallest Gramian eigenvalue whose gradient on ω is not negligible.
    pub violation: Option<NullDirection>,
    /// Smallest over largest singular value of the Gramian factor.
    pub conditioning: f64,
}

/// Weak regional gradient observability on the truncated space. The Gramian
/// `W_{m,m'} = Σ_i c_{im} c_{im'} ∫₀^T e^{(λ_m+λ_{m'})s} ds` is handled through a factor `F` with
/// `FᵀF = W` (Gauss–Legendre in time), whose singular values are the square roots of the Gramian
/// eigenvalues. The verdict accepts when every null direction has a negligible gradient on ω
/// (`grid` must cover ω).
/// Rows `√wₖ · C e^{Λtₖ}` over composite Gauss–Legendre nodes `tₖ` in `[0, T]`.
pub fn gramian_factor(c: &DMatrix<f64>, lambdas: &[f64], horizon: f64) -> DMatrix<f64> {
    let q = c.nrows();
    let k = lambdas.len();
    let rule = reference_rule(TIME_ORDER);
    let panels = TIME_PANELS.max(k.div_ceil(q * TIME_ORDER));
    let h = horizon / panels as f64;
    let mut f = DMatrix::zeros(q * panels * TIME_ORDER, k);
    let mut row = 0;
    for panel in 0..panels {
        for &(x, w) in rule.iter() {
            let t = h * (panel as f64 + 0.5 * (x + 1.0));
            let sw = (0.5 * h * w).sqrt();
            for i in 0..q {
                for (m, l) in lambdas.iter().enumerate() {
                    f[(row, m)] = sw * c[(i, m)] * (l * t).exp();
                }
                row += 1;
            }
        }
    }
    f
}

pub fn gramian_oracle(sensors: &[Sensor], model: &DiffusionModel, omega: &Subregion, grid: &QuadratureGrid, options: &GramianOptions) -> Result<GramianVerdict> {
    omega.validate_in(model.geometry())?;
    if !(options.horizon > 0.0) {
        return Err(crate::Error::Simulation(format!("Gramian horizon must be positive, got {}", options.horizon)));
    }
    let output = build_output_matrix(sensors, model)?;
    let positions: Vec<usize> = match options.unstable_margin {
        Some(margin) => cluster_eigenvalues(model.eigenpairs(), DEFAULT_CLUSTER_TOL)
            .into_iter()
            .filter(|c| c.is_unstable(margin))
            .flat_map(|c| c.positions)
            .collect(),
        None => (0..model.n_modes()).collect(),
    };
    let modes: Vec<ModeIndex> = positions.iter().map(|&p| model.eigenpairs()[p].index).collect();
    if positions.is_empty() {
        return Ok(GramianVerdict { observable: true, modes, null_dimension: 0, violation: None, conditioning: 1.0 });
    }
    let lambdas: Vec<f64> = positions.iter().map(|&p| model.eigenpairs()[p].lambda).collect();
    let factor = gramian_factor(&output.columns(&positions), &lambdas, options.horizon);
    let svd = factor.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let max_sigma = sigma.max();
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[a].total_cmp(&sigma[b]));
    let sampler = GradientSampler::new(model, grid)?;
    let mut null_dimension = 0;
    let mut violation = None;
    for &j in &order {
        let rel = if max_sigma > 0.0 { sigma[j] / max_sigma } else { 0.0 };
        if rel >= options.null_tol {
            break;
        }
        null_dimension += 1;
        let d = v_t.row(j);
        let mut full = DVector::zeros(model.n_modes());
        for (a, &p) in positions.iter().enumerate() {
            full[p] = d[a];
        }
        let field = sampler.sample(&ModalState::from_vector(full))?;
        let norm = h1_norm_omega(&field, grid)?;
        if norm >= options.field_tol && violation.is_none() {
            violation = Some(NullDirection { direction: d.iter().copied().collect(), relative_singular_value: rel, field_norm: norm });
        }
    }
    let conditioning = if max_sigma > 0.0 { sigma.min() / max_sigma } else { 0.0 };
    Ok(GramianVerdict { observable: violation.is_none(), modes, null_dimension, violation, conditioning })
}

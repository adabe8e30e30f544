use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sensors::OutputOperator;
use crate::spectral::{DiffusionModel, ModeIndex};
use crate::strategic::{EigenCluster, GmMatrix, DEFAULT_RANK_TOL};

/// Spacing between consecutive cluster targets, relative to `target_mu`.
pub const TARGET_SPREAD: f64 = 0.25;

/// Gain rows for one corrected cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct GainBlock {
    pub cluster: EigenCluster,
    /// Closed-loop eigenvalue assigned to every member of the cluster.
    pub target: f64,
    /// `r_m × q`.
    pub block: DMatrix<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GainSummary {
    pub target_mu: f64,
    pub corrected: Vec<Vec<ModeIndex>>,
    pub targets: Vec<f64>,
}

/// Output-injection gain `H` (`n_modes × q`). Rows of uncorrected modes are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverGain {
    pub target_mu: f64,
    pub blocks: Vec<GainBlock>,
    pub matrix: DMatrix<f64>,
}

impl ObserverGain {
    pub fn zero(n_modes: usize, q: usize, target_mu: f64) -> Self {
        Self { target_mu, blocks: Vec::new(), matrix: DMatrix::zeros(n_modes, q) }
    }

    pub fn summary(&self) -> GainSummary {
        GainSummary {
            target_mu: self.target_mu,
            corrected: self.blocks.iter().map(|b| b.cluster.members.clone()).collect(),
            targets: self.blocks.iter().map(|b| b.target).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            target_mu: self.target_mu,
            blocks: self.blocks.iter().map(|b| GainBlock { block: &b.block * c, ..b.clone() }).collect(),
            matrix: &self.matrix * c,
        }
    }
}

fn unstable<'a>(clusters: &'a [EigenCluster], unstable_margin: f64) -> impl Iterator<Item = &'a EigenCluster> {
    clusters.iter().filter(move |c| c.is_unstable(unstable_margin))
}

/// Places every unstable cluster at its own target `target_mu · (1 + TARGET_SPREAD · t)`, `t` counting
/// clusters in descending eigenvalue order, by solving the diagonal Sylvester equation
/// `X_ab (λ_a − f_b) = (CᵤᵀCᵤ)_ab` and setting `Hᵤ = X⁻ᵀCᵤᵀ`. With a single unstable cluster this is
/// `(λ − μ)C⁺`.
pub fn synthesize_gain(model: &DiffusionModel, output: &OutputOperator, clusters: &[EigenCluster], unstable_margin: f64, target_mu: f64) -> Result<ObserverGain> {
    let offending: Vec<String> = unstable(clusters, unstable_margin)
        .filter(|c| !GmMatrix::from_output(output, c, DEFAULT_RANK_TOL).is_full_rank())
        .map(|c| c.members.iter().map(ModeIndex::label).collect::<Vec<_>>().join(","))
        .collect();
    if !offending.is_empty() {
        return Err(Error::NotStrategic { offending });
    }
    place(model, output, unstable(clusters, unstable_margin).collect(), target_mu)
}

/// Like [`synthesize_gain`] but corrects only the unstable clusters whose `G_m` has full rank and
/// leaves the others untouched (negative controls, sweeps).
pub fn synthesize_partial_gain(model: &DiffusionModel, output: &OutputOperator, clusters: &[EigenCluster], unstable_margin: f64, target_mu: f64) -> Result<ObserverGain> {
    let chosen = unstable(clusters, unstable_margin)
        .filter(|c| GmMatrix::from_output(output, c, DEFAULT_RANK_TOL).is_full_rank())
        .collect();
    place(model, output, chosen, target_mu)
}

fn place(model: &DiffusionModel, output: &OutputOperator, chosen: Vec<&EigenCluster>, target_mu: f64) -> Result<ObserverGain> {
    if !(target_mu.is_finite() && target_mu < 0.0) {
        return Err(Error::TargetNotStabilizing(target_mu));
    }
    if output.n_modes() != model.n_modes() {
        return Err(Error::Shape(format!("output operator over {} modes, model has {}", output.n_modes(), model.n_modes())));
    }
    let q = output.n_sensors();
    let mut gain = ObserverGain::zero(model.n_modes(), q, target_mu);
    if chosen.is_empty() {
        return Ok(gain);
    }
    let targets: Vec<f64> = (0..chosen.len()).map(|t| target_mu * (1.0 + TARGET_SPREAD * t as f64)).collect();
    let positions: Vec<usize> = chosen.iter().flat_map(|c| c.positions.iter().copied()).collect();
    let lambdas: Vec<f64> = positions.iter().map(|&p| model.eigenpairs()[p].lambda).collect();
    let per_mode_target: Vec<f64> = chosen.iter().zip(&targets).flat_map(|(c, &f)| std::iter::repeat_n(f, c.multiplicity())).collect();
    for &f in &targets {
        if let Some(clash) = model.eigenpairs().iter().find(|p| (p.lambda - f).abs() <= 1e-9 * f.abs().max(1.0)) {
            return Err(Error::GainSynthesis(format!("target {f} coincides with the eigenvalue of mode {}", clash.index)));
        }
    }
    let cu = output.columns(&positions);
    let gram = cu.transpose() * &cu;
    let k = positions.len();
    let x = DMatrix::from_fn(k, k, |a, b| gram[(a, b)] / (lambdas[a] - per_mode_target[b]));
    let sv = x.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 0.0 && smax / smin < 1e12) {
        return Err(Error::GainSynthesis(format!("placement system is ill-conditioned (condition {:.3e})", smax / smin)));
    }
    let x_inv = x.try_inverse().ok_or_else(|| Error::GainSynthesis("placement system is singular".into()))?;
    let hu = x_inv.transpose() * cu.transpose();
    let mut offset = 0;
    for (cluster, &target) in chosen.iter().zip(&targets) {
        let r = cluster.multiplicity();
        let block = hu.rows(offset, r).into_owned();
        for (j, &p) in cluster.positions.iter().enumerate() {
            gain.matrix.row_mut(p).copy_from(&block.row(j));
        }
        gain.blocks.push(GainBlock { cluster: (*cluster).clone(), target, block });
        offset += r;
    }
    Ok(gain)
}

/// `diag(λ) − H·C`, the generator of the modal estimation error.
pub fn assemble_error_matrix(model: &DiffusionModel, output: &OutputOperator, gain: &ObserverGain) -> DMatrix<f64> {
    let lambdas = model.eigenvalues();
    let mut e = -(&gain.matrix * output.matrix());
    for (m, l) in lambdas.iter().enumerate() {
        e[(m, m)] += l;
    }
    e
}

/// Largest real part in the spectrum of a square matrix.
pub fn spectral_abscissa(matrix: &DMatrix<f64>) -> f64 {
    matrix.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensors::{build_output_matrix, Sensor};
    use crate::spectral::{DomainGeometry, Truncation};
    use crate::strategic::{cluster_eigenvalues, DEFAULT_CLUSTER_TOL};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{E, PI, SQRT_2};

    fn interval(n: usize) -> DiffusionModel {
        DiffusionModel::new(DomainGeometry::interval(1.0).unwrap(), 0.01, 1.0, Truncation::OneD(n)).unwrap()
    }

    fn sorted_re(m: &DMatrix<f64>) -> Vec<f64> {
        let mut v: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.re).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn setup(model: &DiffusionModel, sensors: &[Sensor]) -> (OutputOperator, Vec<EigenCluster>) {
        (build_output_matrix(sensors, model).unwrap(), cluster_eigenvalues(model.eigenpairs(), DEFAULT_CLUSTER_TOL))
    }

    #[test]
    fn scalar_cluster_gain() {
        // only mode 1 unstable: margin cuts at λ ≥ 0.8
        let m = interval(4);
        let (c, clusters) = setup(&m, &[Sensor::pointwise(&[1.0 / SQRT_2])]);
        let g = synthesize_gain(&m, &c, &clusters, -0.8, -2.0).unwrap();
        let coeff = SQRT_2 * (PI / SQRT_2).sin();
        assert_abs_diff_eq!(coeff, 1.125_280_1, epsilon = 1e-7);
        let lambda1 = m.eigenpairs()[0].lambda;
        assert_abs_diff_eq!(g.matrix[(0, 0)], (lambda1 + 2.0) / coeff, epsilon = 1e-12);
        assert_abs_diff_eq!(g.matrix[(0, 0)], 2.578_296, epsilon = 1e-5);
        assert!(g.matrix.rows(1, 3).iter().all(|&h| h == 0.0));
        let e = assemble_error_matrix(&m, &c, &g);
        assert!(sorted_re(&e).iter().any(|&r| (r + 2.0).abs() < 1e-10));
    }

    #[test]
    fn all_unstable_modes_placed() {
        let m = interval(8);
        let (c, clusters) = setup(&m, &[Sensor::pointwise(&[1.0 / SQRT_2])]);
        let g = synthesize_gain(&m, &c, &clusters, 0.0, -2.0).unwrap();
        assert_eq!(g.blocks.len(), 3);
        let e = assemble_error_matrix(&m, &c, &g);
        let re = sorted_re(&e);
        let mut expected: Vec<f64> = vec![-2.0, -2.5, -3.0];
        expected.extend(m.eigenvalues().into_iter().skip(3));
        expected.sort_by(f64::total_cmp);
        for (a, b) in re.iter().zip(&expected) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
        assert!(spectral_abscissa(&e) <= m.eigenpairs()[3].lambda + 1e-8);
    }

    #[test]
    fn zero_gain_without_unstable_modes() {
        let m = DiffusionModel::new(DomainGeometry::interval(1.0).unwrap(), 1.0, 0.0, Truncation::OneD(5)).unwrap();
        let (c, clusters) = setup(&m, &[Sensor::pointwise(&[0.3])]);
        let g = synthesize_gain(&m, &c, &clusters, 0.0, -2.0).unwrap();
        assert!(g.matrix.iter().all(|&h| h == 0.0));
        let e = assemble_error_matrix(&m, &c, &g);
        assert_eq!(e, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(m.eigenvalues())));
    }

    #[test]
    fn degenerate_cluster_with_two_sensors() {
        let g = DomainGeometry::rectangle(1.0, 1.0).unwrap();
        let m = DiffusionModel::new(g, 0.1, 6.0, Truncation::TwoD(6, 6)).unwrap();
        let sensors = [Sensor::pointwise(&[1.0 / SQRT_2, 1.0 / PI]), Sensor::pointwise(&[1.0 / PI, 1.0 / E])];
        let (c, clusters) = setup(&m, &sensors);
        let gain = synthesize_gain(&m, &c, &clusters, 0.0, -2.0).unwrap();
        assert_eq!(gain.blocks[1].cluster.multiplicity(), 2);
        let re = sorted_re(&assemble_error_matrix(&m, &c, &gain));
        assert_eq!(re.iter().filter(|&&r| (r + 2.5).abs() < 1e-8).count(), 2);
        assert_eq!(re.iter().filter(|&&r| (r + 2.0).abs() < 1e-8).count(), 1);
    }

    #[test]
    fn refuses_non_strategic_and_bad_targets() {
        let m = interval(6);
        let (c, clusters) = setup(&m, &[Sensor::pointwise(&[0.5])]);
        match synthesize_gain(&m, &c, &clusters, 0.0, -2.0) {
            Err(Error::NotStrategic { offending }) => assert_eq!(offending, vec!["2".to_string()]),
            other => panic!("{other:?}"),
        }
        let (c2, _) = setup(&m, &[Sensor::pointwise(&[1.0 / SQRT_2])]);
        assert!(matches!(synthesize_gain(&m, &c2, &clusters, 0.0, 0.0), Err(Error::TargetNotStabilizing(_))));
        assert!(matches!(synthesize_gain(&m, &c2, &clusters, 0.0, 0.5), Err(Error::TargetNotStabilizing(_))));
    }

    #[test]
    fn partial_gain_leaves_unmeasured_mode() {
        let m = interval(6);
        let (c, clusters) = setup(&m, &[Sensor::pointwise(&[0.5])]);
        let g = synthesize_partial_gain(&m, &c, &clusters, 0.0, -2.0).unwrap();
        assert_eq!(g.blocks.len(), 2);
        let pos2 = m.position(ModeIndex::OneD(2)).unwrap();
        assert!(g.matrix.row(pos2).iter().all(|&h| h == 0.0));
        let e = assemble_error_matrix(&m, &c, &g);
        assert_abs_diff_eq!(spectral_abscissa(&e), 0.605_215_82, epsilon = 1e-7);
    }

    #[test]
    fn sensor_scaling_inverts_gain() {
        let m = interval(8);
        let (c, clusters) = setup(&m, &[Sensor::pointwise(&[1.0 / SQRT_2])]);
        let g = synthesize_gain(&m, &c, &clusters, 0.0, -2.0).unwrap();
        let e = assemble_error_matrix(&m, &c, &g);
        for scale in [1e-3, 0.5, 7.0, 1e3] {
            let cs = c.with_row_scaled(0, scale);
            let gs = synthesize_gain(&m, &cs, &clusters, 0.0, -2.0).unwrap();
            let expected = g.scaled(1.0 / scale);
            assert!((&gs.matrix - &expected.matrix).amax() <= 1e-9 * g.matrix.amax() / scale);
            assert!((assemble_error_matrix(&m, &cs, &gs) - &e).amax() < 1e-9);
        }
    }
}

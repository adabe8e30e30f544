use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sensors::OutputOperator;
use crate::spectral::DiffusionModel;

/// Linear maps of a general observer `ż = Fz + Gu + H_g y` on gradient samples over ω.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverMaps {
    /// Modal state to gradient samples.
    pub phi: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub h: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionResiduals {
    /// `‖Phi·A − F·Phi − H_g·C‖_max`.
    pub structural: f64,
    /// `‖G − Phi·B‖_max`.
    pub input: f64,
}

fn shape_check(name: &str, m: &DMatrix<f64>, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::Shape(format!("{name} is {}x{}, expected {rows}x{cols}", m.nrows(), m.ncols())));
    }
    Ok(())
}

/// Residuals of the observer structure conditions, with `A = diag(λ)` and input matrix `b`.
pub fn verify_observer_conditions(maps: &ObserverMaps, output: &OutputOperator, model: &DiffusionModel, b: &DMatrix<f64>) -> Result<ConditionResiduals> {
    let n = model.n_modes();
    let s = maps.phi.nrows();
    shape_check("Phi", &maps.phi, s, n)?;
    shape_check("F", &maps.f, s, s)?;
    shape_check("H", &maps.h, s, output.n_sensors())?;
    shape_check("C", output.matrix(), output.n_sensors(), n)?;
    shape_check("B", b, n, b.ncols())?;
    shape_check("G", &maps.g, s, b.ncols())?;
    let mut phi_a = maps.phi.clone();
    for (m, l) in model.eigenvalues().into_iter().enumerate() {
        phi_a.column_mut(m).scale_mut(l);
    }
    let structural = (phi_a - &maps.f * &maps.phi - &maps.h * output.matrix()).amax();
    let input = (&maps.g - &maps.phi * b).amax();
    Ok(ConditionResiduals { structural, input })
}

/// Gradient estimate `M·y + N·z`.
pub fn estimator_combine(y: &DVector<f64>, z: &DVector<f64>, m: &DMatrix<f64>, n: &DMatrix<f64>) -> Result<DVector<f64>> {
    if m.ncols() != y.len() || n.ncols() != z.len() || m.nrows() != n.nrows() {
        return Err(Error::Shape(format!(
            "M is {}x{} with |y| = {}, N is {}x{} with |z| = {}",
            m.nrows(),
            m.ncols(),
            y.len(),
            n.nrows(),
            n.ncols(),
            z.len()
        )));
    }
    Ok(m * y + n * z)
}

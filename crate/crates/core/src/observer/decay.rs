use serde::Serialize;

use super::simulate::SimulationResult;
use crate::error::{Error, Result};

/// Values below this are treated as converged to zero.
pub const UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayEstimate {
    /// `−d log(err)/dt`; negative for growth.
    pub rate: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares fit of `log v` against `t` over the last `tail_fraction` of the time span.
pub fn fit_exponential_rate(times: &[f64], values: &[f64], tail_fraction: f64) -> Result<DecayEstimate> {
    if times.len() != values.len() {
        return Err(Error::Shape(format!("{} times for {} values", times.len(), values.len())));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::Simulation(format!("tail fraction must lie in (0, 1], got {tail_fraction}")));
    }
    let (Some(&t0), Some(&t1)) = (times.first(), times.last()) else {
        return Err(Error::DegenerateFit("empty trajectory".into()));
    };
    let start = t1 - tail_fraction * (t1 - t0);
    let window: Vec<(f64, f64)> = times.iter().zip(values).filter(|(t, _)| **t >= start - 1e-12 * t1.abs().max(1.0)).map(|(&t, &v)| (t, v)).collect();
    if window.len() < 2 {
        return Err(Error::DegenerateFit(format!("only {} samples in the fit window", window.len())));
    }
    if let Some((t, v)) = window.iter().find(|(_, v)| !(*v >= UNDERFLOW)) {
        return Err(Error::DegenerateFit(format!("error {v:e} at t={t} has converged to zero")));
    }
    let n = window.len() as f64;
    let mt = window.iter().map(|p| p.0).sum::<f64>() / n;
    let my = window.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, v) in &window {
        let (dt, dy) = (t - mt, v.ln() - my);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(Error::DegenerateFit("fit window has zero time span".into()));
    }
    let slope = sty / stt;
    let r_squared = if syy == 0.0 { 1.0 } else { (sty * sty) / (stt * syy) };
    Ok(DecayEstimate { rate: -slope, window: (window[0].0, t1), r_squared, points: window.len() })
}

/// Decay rate of `err_h1_omega` over the tail of the run.
pub fn estimate_decay_rate(result: &SimulationResult, tail_fraction: f64) -> Result<DecayEstimate> {
    fit_exponential_rate(&result.times, &result.err_h1_omega, tail_fraction)
}

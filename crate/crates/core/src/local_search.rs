//! Adam-based local refinement on a black-box objective.
//!
//! The objective is a simulation with no analytic gradient, so gradients come
//! from central finite differences (one-sided at the box boundary). Updates
//! are projected back onto the box after every step and the best iterate
//! visited is returned, so the result never scores worse than the start.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dimension::Bounds;
use crate::error::{Error, Result};

/// Adam hyperparameters and the finite-difference step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub steps: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Step used for the finite-difference gradient estimate.
    pub fd_step: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            steps: 100,
            learning_rate: 0.02,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            fd_step: 1e-3,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::invalid("learning_rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::invalid("beta1 and beta2 must lie in [0, 1)"));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if !self.fd_step.is_finite() || self.fd_step <= 0.0 {
            return Err(Error::invalid("fd_step must be positive"));
        }
        Ok(())
    }
}

/// Outcome of a local search.
#[derive(Clone, Debug)]
pub struct AdamResult {
    /// Best iterate visited (including the start point).
    pub point: Vec<f64>,
    /// Objective value at [`AdamResult::point`].
    pub value: f64,
    /// Iterates after each update, for diagnostics.
    pub iterates: Vec<Vec<f64>>,
    /// Objective evaluations charged, counting a full central-difference
    /// stencil (2d + 1) per step plus one evaluation per iterate.
    pub evaluations: usize,
}

fn check_finite(value: f64, point: &[f64]) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::EvaluationFailure(format!(
            "objective returned {value} at {point:?}"
        )))
    }
}

/// Central-difference gradient estimate, falling back to one-sided
/// differences where `point ± fd_step` would leave the box.
///
/// The objective is never evaluated outside the bounds. Coordinate
/// evaluations run in parallel; the result order is fixed by coordinate
/// index.
pub fn fd_gradient<F>(objective: &F, point: &[f64], fd_step: f64, bounds: Bounds) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if !fd_step.is_finite() || fd_step <= 0.0 {
        return Err(Error::invalid("fd_step must be positive"));
    }
    if point.iter().any(|&x| !bounds.contains(x)) {
        return Err(Error::invalid("gradient point must lie within the bounds"));
    }
    let base = check_finite(objective(point)?, point)?;
    (0..point.len())
        .into_par_iter()
        .map(|k| {
            let mut shifted = point.to_vec();
            let up_ok = point[k] + fd_step <= bounds.upper;
            let down_ok = point[k] - fd_step >= bounds.lower;
            let eval = |shifted: &mut Vec<f64>, x: f64| -> Result<f64> {
                shifted[k] = x;
                check_finite(objective(shifted)?, shifted)
            };
            match (up_ok, down_ok) {
                (true, true) => {
                    let up = eval(&mut shifted, point[k] + fd_step)?;
                    let down = eval(&mut shifted, point[k] - fd_step)?;
                    Ok((up - down) / (2.0 * fd_step))
                }
                (true, false) => {
                    let up = eval(&mut shifted, point[k] + fd_step)?;
                    Ok((up - base) / fd_step)
                }
                (false, true) => {
                    let down = eval(&mut shifted, point[k] - fd_step)?;
                    Ok((base - down) / fd_step)
                }
                // Box narrower than the step; no usable difference.
                (false, false) => Ok(0.0),
            }
        })
        .collect()
}

/// One Adam update with bias correction, followed by projection onto the box.
pub(crate) fn adam_update(
    x: &mut [f64],
    gradient: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    step: usize,
    config: &AdamConfig,
    bounds: Bounds,
) {
    let b1 = config.beta1;
    let b2 = config.beta2;
    let bias1 = 1.0 - b1.powi(step as i32);
    let bias2 = 1.0 - b2.powi(step as i32);
    for k in 0..x.len() {
        m[k] = b1 * m[k] + (1.0 - b1) * gradient[k];
        v[k] = b2 * v[k] + (1.0 - b2) * gradient[k] * gradient[k];
        let m_hat = m[k] / bias1;
        let v_hat = v[k] / bias2;
        x[k] = bounds.clamp(x[k] - config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon));
    }
}

/// Runs `config.steps` Adam iterations from `start`, using finite-difference
/// gradients, and returns the best iterate visited.
pub fn adam_search<F>(
    objective: &F,
    start: &[f64],
    config: &AdamConfig,
    bounds: Bounds,
) -> Result<AdamResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    config.validate()?;
    if start.is_empty() {
        return Err(Error::invalid("start point must not be empty"));
    }
    if start.iter().any(|&x| !bounds.contains(x)) {
        return Err(Error::invalid("start point must lie within the bounds"));
    }

    let mut x = start.to_vec();
    let mut m = vec![0.0; x.len()];
    let mut v = vec![0.0; x.len()];
    let mut best = start.to_vec();
    let mut best_value = check_finite(objective(start)?, start)?;
    let mut evaluations = 1;
    let mut iterates = Vec::with_capacity(config.steps);

    for step in 1..=config.steps {
        let gradient = fd_gradient(objective, &x, config.fd_step, bounds)?;
        evaluations += 2 * x.len() + 1;
        adam_update(&mut x, &gradient, &mut m, &mut v, step, config, bounds);
        iterates.push(x.clone());
        let value = check_finite(objective(&x)?, &x)?;
        evaluations += 1;
        if value < best_value {
            best_value = value;
            best.copy_from_slice(&x);
        }
    }

    Ok(AdamResult {
        point: best,
        value: best_value,
        iterates,
        evaluations,
    })
}

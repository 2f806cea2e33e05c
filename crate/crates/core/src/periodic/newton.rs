//! Damped Newton iteration on a square nonlinear system.

use nalgebra::{DMatrix, DVector};

use crate::error::{DynamicsError, PeriodicError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// Consecutive growing steps tolerated before declaring divergence.
    pub divergence_window: usize,
    pub min_damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { residual_tol: 1e-9, max_iterations: 50, divergence_window: 5, min_damping: 1.0 / 1024.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
}

pub(crate) fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `F(x) = 0`. `residual` may fail (e.g. a trial point makes the flow
/// blow up); such trial points are treated as infinitely bad and the step is
/// damped.
pub fn damped_newton<R, J>(
    x0: DVector<f64>,
    mut residual: R,
    mut jacobian: J,
    opts: &NewtonOptions,
) -> Result<NewtonOutcome, PeriodicError>
where
    R: FnMut(&DVector<f64>) -> Result<DVector<f64>, DynamicsError>,
    J: FnMut(&DVector<f64>, &DVector<f64>) -> Result<DMatrix<f64>, DynamicsError>,
{
    let mut x = x0;
    let mut r = residual(&x)?;
    let mut norm = inf_norm(&r);
    let mut last_step = f64::INFINITY;
    let mut growing = 0usize;

    for it in 0..opts.max_iterations {
        if norm < opts.residual_tol {
            return Ok(NewtonOutcome { x, residual: norm, iterations: it });
        }
        let jac = jacobian(&x, &r)?;
        let step = jac.lu().solve(&(-&r)).ok_or(PeriodicError::SingularJacobian)?;
        let step_norm = inf_norm(&step);
        if !step_norm.is_finite() {
            return Err(PeriodicError::SingularJacobian);
        }
        if step_norm > last_step {
            growing += 1;
            if growing >= opts.divergence_window {
                return Err(PeriodicError::Divergence { iterations: it + 1, residual: norm });
            }
        } else {
            growing = 0;
        }
        last_step = step_norm;

        let mut lambda = 1.0;
        loop {
            let trial = &x + &step * lambda;
            if let Ok(rt) = residual(&trial) {
                let nt = inf_norm(&rt);
                if nt.is_finite() && (nt < norm || lambda <= opts.min_damping) {
                    x = trial;
                    r = rt;
                    norm = nt;
                    break;
                }
            }
            if lambda <= opts.min_damping {
                // no admissible trial point along the Newton direction
                return Err(PeriodicError::NoConvergence { iterations: it + 1, residual: norm });
            }
            lambda *= 0.5;
        }
    }
    if norm < opts.residual_tol {
        return Ok(NewtonOutcome { x, residual: norm, iterations: opts.max_iterations });
    }
    Err(PeriodicError::NoConvergence { iterations: opts.max_iterations, residual: norm })
}

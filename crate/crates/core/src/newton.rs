//! Damped Newton-Raphson with backtracking on the residual norm.
//!
//! Rows are scaled by `1 / max_j |J_ij|` taken from the first Jacobian so that
//! electromagnetic, constraint and thermal rows, which differ by many orders
//! of magnitude, weigh alike in the convergence test.

use crate::error::{Error, Result};
use crate::sparse::Triplets;

/// A nonlinear system `R(x) = 0`.
pub trait NonlinearSystem {
    fn size(&self) -> usize;
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// Residual together with its Jacobian.
    fn residual_and_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, Triplets<f64>)>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    /// Relative reduction of the scaled residual.
    pub tol: f64,
    /// Absolute floor on the scaled residual.
    pub abs_tol: f64,
    pub max_iter: usize,
    /// Step reduction factor while backtracking.
    pub backtrack: f64,
    /// Smallest step length tried; it is taken if nothing longer helps.
    pub min_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            abs_tol: 1e-12,
            max_iter: 25,
            backtrack: 0.5,
            min_step: 1.0 / 64.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonReport {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Scaled residual norm before each iteration and after the last.
    pub history: Vec<f64>,
}

fn scaled_norm(r: &[f64], s: &[f64]) -> f64 {
    r.iter().zip(s).map(|(a, b)| (a * b) * (a * b)).sum::<f64>().sqrt()
}

pub fn newton_solve<S: NonlinearSystem + ?Sized>(
    sys: &S,
    x0: Vec<f64>,
    cfg: &NewtonConfig,
) -> Result<NewtonReport> {
    let n = sys.size();
    if x0.len() != n {
        return Err(Error::InvalidArgument(format!(
            "initial guess has {} entries, system has {n}",
            x0.len()
        )));
    }
    let mut x = x0;
    let (mut r, mut jac) = sys.residual_and_jacobian(&x)?;
    let scale: Vec<f64> = jac
        .row_max_abs()
        .into_iter()
        .map(|m| if m > 0.0 { 1.0 / m } else { 1.0 })
        .collect();
    let mut rn = scaled_norm(&r, &scale);
    let r0 = rn;
    let mut history = vec![rn];
    let converged = |rn: f64| rn <= cfg.tol * r0 || rn <= cfg.abs_tol;
    if converged(rn) {
        return Ok(NewtonReport {
            x,
            iterations: 0,
            history,
        });
    }
    for it in 1..=cfg.max_iter {
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let dx = jac.solve(&rhs)?;
        let mut alpha = 1.0;
        let (x_new, r_new, rn_new) = loop {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + alpha * d).collect();
            let rt = sys.residual(&trial);
            if let Ok(rt) = rt {
                let rnt = scaled_norm(&rt, &scale);
                if rnt.is_finite() && (rnt < rn || alpha * cfg.backtrack < cfg.min_step) {
                    break (trial, rt, rnt);
                }
            } else if alpha * cfg.backtrack < cfg.min_step {
                return Err(rt.unwrap_err());
            }
            alpha *= cfg.backtrack;
            log::debug!("newton iteration {it}: backtracking to step {alpha}");
        };
        let step = alpha * norm_inf(&dx);
        x = x_new;
        r = r_new;
        rn = rn_new;
        history.push(rn);
        log::trace!("newton iteration {it}: residual {rn:e}, step {alpha}");
        if converged(rn) || step <= 1e-12 * (1.0 + norm_inf(&x)) {
            return Ok(NewtonReport {
                x,
                iterations: it,
                history,
            });
        }
        if it < cfg.max_iter {
            let (r2, j2) = sys.residual_and_jacobian(&x)?;
            r = r2;
            jac = j2;
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        initial_residual: r0,
        final_residual: rn,
        history,
    })
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

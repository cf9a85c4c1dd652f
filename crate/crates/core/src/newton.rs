//! Damped Newton iteration for small dense systems.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Converged when `‖f‖ < tol`.
    pub tol: f64,
    /// Also accepted: step below `step_tol (1 + ‖x‖)` with `‖f‖ < stall_tol`.
    pub step_tol: f64,
    pub stall_tol: f64,
    /// Relative central-difference step, `h_j = fd_step (1 + |x_j|)`.
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iter: 50, tol: 1e-11, step_tol: 1e-14, stall_tol: 1e-9, fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Central-difference Jacobian of `f` at `x`.
pub fn fd_jacobian<F>(f: &F, x: &[f64], rel_step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let m = f(x)?.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = rel_step * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let fp = f(&xp)?;
        xp[j] = x[j] - h;
        let fm = f(&xp)?;
        xp[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Damped Newton with a finite-difference Jacobian and backtracking on `‖f‖`.
pub fn solve<F>(f: F, x0: &[f64], opts: &NewtonOptions) -> Result<NewtonOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    let mut res = norm(&fx);
    for it in 0..opts.max_iter {
        if res < opts.tol {
            return Ok(NewtonOutcome { x, residual: res, iterations: it });
        }
        let jac = fd_jacobian(&f, &x, opts.fd_step)?;
        let rhs = DVector::from_vec(fx.iter().map(|v| -v).collect());
        let step = match jac.lu().solve(&rhs) {
            Some(s) => s,
            None => return Err(Error::NewtonFailed { iterations: it, residual: res }),
        };
        if step.iter().any(|v| !v.is_finite()) {
            return Err(Error::NewtonFailed { iterations: it, residual: res });
        }

        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda > 1e-4 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi + lambda * si).collect();
            if let Ok(ft) = f(&trial) {
                let rt = norm(&ft);
                if rt.is_finite() && rt < res {
                    accepted = Some((trial, ft, rt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let step_norm = norm(step.as_slice());
        match accepted {
            Some((xn, fn_, rn)) => {
                x = xn;
                fx = fn_;
                res = rn;
                if lambda * step_norm < opts.step_tol * (1.0 + norm(&x)) && res < opts.stall_tol {
                    return Ok(NewtonOutcome { x, residual: res, iterations: it + 1 });
                }
            }
            None => {
                // no decrease possible: at the noise floor or genuinely stuck
                if res < opts.stall_tol {
                    return Ok(NewtonOutcome { x, residual: res, iterations: it + 1 });
                }
                return Err(Error::NewtonFailed { iterations: it + 1, residual: res });
            }
        }
    }
    if res < opts.tol || res < opts.stall_tol {
        Ok(NewtonOutcome { x, residual: res, iterations: opts.max_iter })
    } else {
        Err(Error::NewtonFailed { iterations: opts.max_iter, residual: res })
    }
}

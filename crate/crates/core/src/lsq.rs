//! Levenberg-Marquardt nonlinear least squares.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop when the relative cost decrease falls below this.
    pub ftol: f64,
    /// Stop when the relative parameter step falls below this.
    pub xtol: f64,
    pub lambda0: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iter: 200,
            ftol: 1e-14,
            xtol: 1e-12,
            lambda0: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmReport {
    pub params: Vec<f64>,
    /// Half the sum of squared residuals.
    pub cost: f64,
    pub initial_cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Parameter standard errors from (JᵀJ)⁻¹ scaled by the residual variance;
    /// `None` when JᵀJ is singular or there are no spare degrees of freedom.
    pub std_errors: Option<Vec<f64>>,
}

/// Forward-difference Jacobian of `residuals` at `p`.
pub fn numeric_jacobian<R>(residuals: &mut R, p: &[f64], r0: &DVector<f64>) -> Result<DMatrix<f64>>
where
    R: FnMut(&[f64]) -> Result<DVector<f64>>,
{
    let mut jac = DMatrix::zeros(r0.len(), p.len());
    let mut q = p.to_vec();
    for j in 0..p.len() {
        let step = 1e-7 * p[j].abs().max(1e-8);
        q[j] = p[j] + step;
        let r1 = residuals(&q)?;
        q[j] = p[j];
        jac.set_column(j, &((r1 - r0) / step));
    }
    Ok(jac)
}

/// Minimise ½‖r(p)‖². `jacobian` returns ∂r/∂p (rows = residuals); pass
/// `None` to use forward differences.
pub fn levenberg_marquardt<R>(
    mut residuals: R,
    mut jacobian: Option<&mut dyn FnMut(&[f64]) -> Result<DMatrix<f64>>>,
    p0: &[f64],
    opts: &LmOptions,
) -> Result<LmReport>
where
    R: FnMut(&[f64]) -> Result<DVector<f64>>,
{
    let m = p0.len();
    let mut p = p0.to_vec();
    let mut r = residuals(&p)?;
    if r.len() < m {
        return Err(Error::InsufficientData { got: r.len(), need: m });
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitDivergence("non-finite residual at the starting point".into()));
    }
    let mut cost = 0.5 * r.norm_squared();
    let initial_cost = cost;
    let mut lambda = opts.lambda0;
    let mut converged = cost == 0.0;
    let mut iterations = 0;
    let mut jac = match jacobian.as_mut() {
        Some(j) => j(&p)?,
        None => numeric_jacobian(&mut residuals, &p, &r)?,
    };

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for i in 0..m {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(delta) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            let r_trial = match residuals(&trial) {
                Ok(v) if v.iter().all(|x| x.is_finite()) => v,
                _ => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let c_trial = 0.5 * r_trial.norm_squared();
            if c_trial < cost {
                let step_rel = delta.norm() / (DVector::from_column_slice(&p).norm() + opts.xtol);
                let f_rel = (cost - c_trial) / cost.max(f64::MIN_POSITIVE);
                p = trial;
                r = r_trial;
                cost = c_trial;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                if f_rel < opts.ftol || step_rel < opts.xtol || cost == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                break;
            }
        }
        if !accepted {
            // No downhill step exists at any damping: a local minimum.
            converged = true;
            break;
        }
        jac = match jacobian.as_mut() {
            Some(j) => j(&p)?,
            None => numeric_jacobian(&mut residuals, &p, &r)?,
        };
    }

    if !converged && cost >= initial_cost {
        return Err(Error::FitDivergence(format!(
            "residual did not decrease in {iterations} iterations"
        )));
    }

    let dof = r.len().saturating_sub(m);
    let std_errors = if dof > 0 {
        let s2 = 2.0 * cost / dof as f64;
        (jac.transpose() * &jac)
            .try_inverse()
            .map(|inv| (0..m).map(|i| (inv[(i, i)] * s2).max(0.0).sqrt()).collect())
    } else {
        None
    };

    Ok(LmReport {
        params: p,
        cost,
        initial_cost,
        iterations,
        converged,
        std_errors,
    })
}

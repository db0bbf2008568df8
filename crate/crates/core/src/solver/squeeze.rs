//! Quadrature variances, squeezing in dB and purity from a correlation matrix.

use super::CMatrix;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezeResult {
    pub theta_opt: f64,
    /// Variances with vacuum = 1/2.
    pub var_min: f64,
    pub var_max: f64,
    pub s_min_db: f64,
    pub s_max_db: f64,
    pub purity: f64,
}

/// ΔY²_ij(θ), normalised so vacuum gives 1/2 for both i = j and i ≠ j.
pub fn squeeze_variance(c: &CMatrix, i: usize, j: usize, theta: f64) -> f64 {
    let n = c.nrows() / 2;
    let e = Complex64::from_polar(1.0, theta);
    let mut acc = Complex64::new(0.0, 0.0);
    for &a in &[i, j] {
        for &b in &[i, j] {
            acc += c[(n + a, b)] + c[(a, n + b)] - e * c[(n + a, n + b)] - e.conj() * c[(a, b)];
        }
    }
    let v = 0.25 * acc.re;
    if i == j {
        0.5 * v
    } else {
        v
    }
}

/// Squeezing between modes `i` and `j` (`i == j` for single-mode).
pub fn squeeze(c: &CMatrix, i: usize, j: usize) -> Result<SqueezeResult> {
    let n = c.nrows() / 2;
    if c.nrows() != c.ncols() || i >= n || j >= n {
        return Err(Error::InvalidParameter(format!("mode indices ({i}, {j}) out of range for {n} modes")));
    }
    let theta_opt = -c[(n + i, n + j)].arg();
    let var_min = squeeze_variance(c, i, j, theta_opt);
    let var_max = squeeze_variance(c, i, j, theta_opt + std::f64::consts::PI);
    if !(var_min > 0.0) || !var_max.is_finite() {
        return Err(Error::NonPhysicalVariance { value: var_min, tolerance: 0.0 });
    }
    let (s_minus, s_plus) = (var_min / 0.5, var_max / 0.5);
    Ok(SqueezeResult {
        theta_opt,
        var_min,
        var_max,
        s_min_db: 10.0 * s_minus.log10(),
        s_max_db: 10.0 * s_plus.log10(),
        purity: 1.0 / (s_minus * s_plus).sqrt(),
    })
}

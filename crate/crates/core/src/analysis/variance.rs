//! Principal-axis variances of an I/Q cloud.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Minimum samples per cell.
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    /// mV².
    pub var_min: f64,
    pub var_max: f64,
    /// Direction of the major axis, rad in (−π/2, π/2].
    pub angle: f64,
    pub n: usize,
    /// Standard error of `var_min`, mV².
    pub stderr: f64,
    /// Standard error of `var_max`, mV².
    pub stderr_max: f64,
    /// Asymptotic standard error of `angle`; infinite for an isotropic cloud.
    pub angle_stderr: f64,
}

impl VarianceEstimate {
    pub fn sigma_min(&self) -> f64 {
        self.var_min.sqrt()
    }

    pub fn sigma_max(&self) -> f64 {
        self.var_max.sqrt()
    }

    /// Mean of the two principal variances (trace / 2).
    pub fn mean_variance(&self) -> f64 {
        0.5 * (self.var_min + self.var_max)
    }
}

/// Standard error of a Gaussian sample variance.
pub fn variance_stderr(var: f64, n: usize) -> f64 {
    var * (2.0 / (n as f64 - 1.0)).sqrt()
}

/// Unbiased sample covariance (var_i, var_q, cov).
pub fn sample_covariance(i: &[f64], q: &[f64]) -> Result<(f64, f64, f64)> {
    if i.len() != q.len() {
        return Err(Error::LengthMismatch(i.len(), q.len()));
    }
    let n = i.len();
    if n < 2 {
        return Err(Error::InsufficientData { got: n, need: 2 });
    }
    let mi = i.iter().sum::<f64>() / n as f64;
    let mq = q.iter().sum::<f64>() / n as f64;
    let (mut vi, mut vq, mut c) = (0.0, 0.0, 0.0);
    for (&a, &b) in i.iter().zip(q) {
        let (da, db) = (a - mi, b - mq);
        vi += da * da;
        vq += db * db;
        c += da * db;
    }
    let d = (n - 1) as f64;
    Ok((vi / d, vq / d, c / d))
}

pub fn estimate_variances(i: &[f64], q: &[f64]) -> Result<VarianceEstimate> {
    if i.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData { got: i.len(), need: MIN_SAMPLES });
    }
    let (vi, vq, c) = sample_covariance(i, q)?;
    let half_tr = 0.5 * (vi + vq);
    let r = (0.25 * (vi - vq).powi(2) + c * c).sqrt();
    let (var_max, var_min) = (half_tr + r, half_tr - r);
    if !(var_min > f64::EPSILON * var_max) {
        return Err(Error::DegenerateData);
    }
    let n = i.len();
    let angle = 0.5 * c.atan2(0.5 * (vi - vq));
    let angle = if angle <= -std::f64::consts::FRAC_PI_2 { angle + std::f64::consts::PI } else { angle };
    let angle_stderr = if var_max > var_min {
        (var_min * var_max / (n as f64 - 1.0)).sqrt() / (var_max - var_min)
    } else {
        f64::INFINITY
    };
    Ok(VarianceEstimate {
        var_min,
        var_max,
        angle,
        n,
        stderr: variance_stderr(var_min, n),
        stderr_max: variance_stderr(var_max, n),
        angle_stderr,
    })
}

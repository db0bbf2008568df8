//! Shot-noise tunnel junction: noise model and fit of (T, T_N, G·k_B·B).

use crate::error::{Error, Result};
use crate::lsq::{levenberg_marquardt, LmOptions};
use crate::units::{dbm_to_watts, BOLTZMANN, ELECTRON_CHARGE, MICRO, PLANCK};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::io::Read;

/// Minimum number of bias points for a fit.
pub const MIN_POINTS: usize = 20;

/// x·coth(x/T), finite as x → 0.
fn x_coth(x: f64, t: f64) -> f64 {
    let u = x / t;
    if u.abs() < 1e-4 {
        t * (1.0 + u * u / 3.0)
    } else {
        x / u.tanh()
    }
}

/// T·∂/∂T [x·coth(x/T)] = T·u²/sinh²(u) with u = x/T.
fn x_coth_dlog_t(x: f64, t: f64) -> f64 {
    let u = (x / t).abs();
    if u < 1e-4 {
        t * (1.0 - u * u / 3.0)
    } else if u > 300.0 {
        0.0
    } else {
        t * (u / u.sinh()).powi(2)
    }
}

/// Bias-dependent source temperature: ½[x₊ coth(x₊/T) + x₋ coth(x₋/T)], with
/// x± = (eV ± hf)/2k_B.
pub fn source_temperature(v: f64, t: f64, f_hz: f64) -> f64 {
    let (xp, xm) = arguments(v, f_hz);
    0.5 * (x_coth(xp, t) + x_coth(xm, t))
}

fn arguments(v: f64, f_hz: f64) -> (f64, f64) {
    let ev = ELECTRON_CHARGE * v / (2.0 * BOLTZMANN);
    let hf = PLANCK * f_hz / (2.0 * BOLTZMANN);
    (ev + hf, ev - hf)
}

/// Noise power (W) from a junction at bias `v` (V) and temperature `t` (K), seen
/// through a chain of gain `g` and noise temperature `t_n` in bandwidth `b` (Hz).
pub fn sntj_model(v: f64, t: f64, t_n: f64, g: f64, b: f64, f_hz: f64) -> f64 {
    g * BOLTZMANN * b * (t_n + source_temperature(v, t, f_hz))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SntjFit {
    pub t_junction: f64,
    pub t_noise: f64,
    /// G·k_B·B, W/K.
    pub gain_bandwidth: f64,
    pub t_junction_err: f64,
    pub t_noise_err: f64,
    pub gain_bandwidth_err: f64,
    /// RMS of relative residuals.
    pub rms_rel_residual: f64,
    pub iterations: usize,
}

impl SntjFit {
    /// Gain G for a known bandwidth.
    pub fn gain(&self, b_hz: f64) -> f64 {
        self.gain_bandwidth / (BOLTZMANN * b_hz)
    }

    pub fn model(&self, v: f64, f_hz: f64) -> f64 {
        self.gain_bandwidth * (self.t_noise + source_temperature(v, self.t_junction, f_hz))
    }
}

/// Fit (T, T_N, G·k_B·B) to a noise-vs-bias curve `(V, N)` (volts, watts). Residuals are
/// relative to the data.
pub fn sntj_fit(curve: &[(f64, f64)], f_hz: f64) -> Result<SntjFit> {
    if curve.len() < MIN_POINTS {
        return Err(Error::InsufficientData { got: curve.len(), need: MIN_POINTS });
    }
    if curve.iter().any(|&(v, n)| !v.is_finite() || !(n > 0.0)) {
        return Err(Error::InvalidParameter("noise powers must be positive and biases finite".into()));
    }
    let v_hf = PLANCK * f_hz / ELECTRON_CHARGE;
    let plateau: Vec<f64> = curve.iter().filter(|p| p.0.abs() < 0.5 * v_hf).map(|p| p.1).collect();
    if plateau.len() < 3 {
        return Err(Error::Identifiability(format!(
            "need ≥ 3 points with |V| < hf/2e = {:.3e} V, got {}",
            0.5 * v_hf,
            plateau.len()
        )));
    }
    let v_max = curve.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    if v_max < 4.0 * v_hf {
        return Err(Error::Identifiability(format!("bias must reach the shot-noise asymptote (|V| ≥ {:.3e} V)", 4.0 * v_hf)));
    }

    // Slope of the outer third on each side gives G·k_B·B·e/2k_B.
    let outer: Vec<(f64, f64)> = curve.iter().filter(|p| p.0.abs() > 2.0 / 3.0 * v_max).map(|&(v, n)| (v.abs(), n)).collect();
    let slope = linear_slope(&outer).filter(|s| *s > 0.0).ok_or_else(|| Error::Identifiability("no rising shot-noise asymptote".into()))?;
    let a0 = slope * 2.0 * BOLTZMANN / ELECTRON_CHARGE;
    let t0 = 0.05;
    let n0 = plateau.iter().sum::<f64>() / plateau.len() as f64;
    let tn0 = (n0 / a0 - source_temperature(0.0, t0, f_hz)).max(1e-3);

    let residuals = |p: &[f64]| -> Result<DVector<f64>> {
        let (t, tn, a) = (p[0].exp(), p[1], p[2].exp());
        Ok(DVector::from_iterator(curve.len(), curve.iter().map(|&(v, n)| a * (tn + source_temperature(v, t, f_hz)) / n - 1.0)))
    };
    let mut jacobian = |p: &[f64]| -> Result<DMatrix<f64>> {
        let (t, tn, a) = (p[0].exp(), p[1], p[2].exp());
        let mut j = DMatrix::zeros(curve.len(), 3);
        for (r, &(v, n)) in curve.iter().enumerate() {
            let (xp, xm) = arguments(v, f_hz);
            j[(r, 0)] = a * 0.5 * (x_coth_dlog_t(xp, t) + x_coth_dlog_t(xm, t)) / n;
            j[(r, 1)] = a / n;
            j[(r, 2)] = a * (tn + source_temperature(v, t, f_hz)) / n;
        }
        Ok(j)
    };
    let rep = levenberg_marquardt(residuals, Some(&mut jacobian), &[t0.ln(), tn0, a0.ln()], &LmOptions::default())?;
    let (t, tn, a) = (rep.params[0].exp(), rep.params[1], rep.params[2].exp());
    if !(t.is_finite() && tn.is_finite() && a.is_finite()) {
        return Err(Error::FitDivergence("non-finite SNTJ parameters".into()));
    }
    let errs = rep.std_errors.clone().unwrap_or_else(|| vec![f64::NAN; 3]);
    Ok(SntjFit {
        t_junction: t,
        t_noise: tn,
        gain_bandwidth: a,
        t_junction_err: t * errs[0],
        t_noise_err: errs[1],
        gain_bandwidth_err: a * errs[2],
        rms_rel_residual: (2.0 * rep.cost / curve.len() as f64).sqrt(),
        iterations: rep.iterations,
    })
}

fn linear_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Deserialize)]
struct SntjRow {
    v_bias_uv: f64,
    noise_dbm: f64,
}

/// Read `v_bias_uv,noise_dbm` rows as (V, W).
pub fn read_sntj_csv<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize::<SntjRow>()
        .map(|r| {
            let r = r.map_err(|e| Error::Parse(e.to_string()))?;
            Ok((r.v_bias_uv * MICRO, dbm_to_watts(r.noise_dbm)))
        })
        .collect()
}

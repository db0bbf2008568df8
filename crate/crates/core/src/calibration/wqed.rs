//! Qubit-in-waveguide transmission: model, 2D fit over detuning and power, and the
//! drive-power calibration it provides.

use crate::error::{Error, Result};
use crate::lsq::{levenberg_marquardt, LmOptions};
use crate::units::{angular, dbm_to_watts, HBAR, MHZ};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Read;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WqedParams {
    /// Radiative decay into the line, Hz.
    pub gamma1: f64,
    /// Transverse decoherence Γ₁/2 + Γ_φ, Hz.
    pub gamma2: f64,
    pub xi: f64,
}

/// Background-normalised transmission at detuning `delta` (Hz) and drive `omega` (Hz).
pub fn wqed_transmission(delta: f64, omega: f64, p: &WqedParams) -> Complex64 {
    let (g1, g2) = (p.gamma1, p.gamma2);
    let d = 1.0 + (delta / g2).powi(2) + omega * omega / (g1 * g2);
    1.0 - p.xi * g1 / (2.0 * g2) * Complex64::new(1.0, -delta / g2) / d
}

/// ∂t/∂(ln Γ₁, ln Γ₂, Ω).
fn transmission_gradient(delta: f64, omega: f64, p: &WqedParams) -> [Complex64; 3] {
    let (g1, g2) = (p.gamma1, p.gamma2);
    let a = p.xi * g1 / (2.0 * g2);
    let z = Complex64::new(1.0, -delta / g2);
    let d = 1.0 + (delta / g2).powi(2) + omega * omega / (g1 * g2);
    let az_d2 = a * z / (d * d);
    let dg1 = -(a / g1) * z / d + az_d2 * (-omega * omega / (g1 * g1 * g2));
    let dz2 = Complex64::new(0.0, delta / (g2 * g2));
    let dd2 = -2.0 * delta * delta / (g2 * g2 * g2) - omega * omega / (g1 * g2 * g2);
    let dg2 = -((-a / g2) * z + a * dz2) / d + az_d2 * dd2;
    let dom = az_d2 * (2.0 * omega / (g1 * g2));
    [dg1 * g1, dg2 * g2, dom]
}

/// One VNA point: detuning (Hz), input power (W at the reference plane of the scan), and
/// background-normalised S21.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub delta_hz: f64,
    pub power_w: f64,
    pub s21: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WqedFit {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma_phi: f64,
    pub xi: f64,
    pub gamma1_err: f64,
    pub gamma2_err: f64,
    /// (input power W, fitted Ω Hz) per distinct power, ascending in power.
    pub omega_drive: Vec<(f64, f64)>,
    pub rms_residual: f64,
    pub iterations: usize,
}

impl WqedFit {
    pub fn params(&self) -> WqedParams {
        WqedParams { gamma1: self.gamma1, gamma2: self.gamma2, xi: self.xi }
    }

    /// |t(Δ = 0)|² for every power row.
    pub fn resonant_transmittance(&self) -> Vec<(f64, f64)> {
        let p = self.params();
        self.omega_drive.iter().map(|&(pw, om)| (pw, wqed_transmission(0.0, om, &p).norm_sqr())).collect()
    }

    /// Attenuation from the scan's power reference plane to the qubit: geometric mean of
    /// P_qubit/P_in over rows in the transition region (0.05 ≤ Ω²/Γ₁Γ₂ ≤ 20), where Ω is
    /// well constrained. Falls back to all rows when none qualify.
    pub fn input_attenuation(&self, f_qubit_hz: f64) -> f64 {
        let sat = |om: f64| om * om / (self.gamma1 * self.gamma2);
        let mut rows: Vec<&(f64, f64)> = self.omega_drive.iter().filter(|r| (0.05..=20.0).contains(&sat(r.1))).collect();
        if rows.is_empty() {
            rows = self.omega_drive.iter().collect();
        }
        let mean_log = rows.iter().map(|&&(pw, om)| (power_at_qubit(om, self.gamma1, f_qubit_hz) / pw).ln()).sum::<f64>() / rows.len() as f64;
        mean_log.exp()
    }
}

/// P = πħω_q Ω²/(2Γ₁) with ω_q = 2πf_q.
pub fn power_at_qubit(omega_drive: f64, gamma1: f64, f_qubit_hz: f64) -> f64 {
    PI * HBAR * angular(f_qubit_hz) * omega_drive * omega_drive / (2.0 * gamma1)
}

/// Inverse of [`power_at_qubit`].
pub fn drive_from_power(p_w: f64, gamma1: f64, f_qubit_hz: f64) -> f64 {
    (2.0 * gamma1 * p_w / (PI * HBAR * angular(f_qubit_hz))).sqrt()
}

fn group_by_power(scan: &[ScanPoint]) -> Vec<(f64, Vec<ScanPoint>)> {
    let mut powers: Vec<f64> = scan.iter().map(|s| s.power_w).collect();
    powers.sort_by(f64::total_cmp);
    powers.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
    powers
        .into_iter()
        .map(|p| (p, scan.iter().copied().filter(|s| (s.power_w - p).abs() <= 1e-9 * p.abs()).collect()))
        .collect()
}

fn resonant_point(row: &[ScanPoint]) -> ScanPoint {
    *row.iter().min_by(|a, b| a.delta_hz.abs().total_cmp(&b.delta_hz.abs())).unwrap()
}

/// Joint least squares of Re and Im S21 over the whole scan for Γ₁, Γ₂ and one Ω per
/// power; ξ is held at `xi`.
pub fn wqed_fit_2d(scan: &[ScanPoint], xi: f64) -> Result<WqedFit> {
    let rows = group_by_power(scan);
    if rows.len() < 2 || rows.iter().any(|r| r.1.len() < 5) {
        return Err(Error::InsufficientData { got: scan.len(), need: 10 });
    }
    let resonant: Vec<ScanPoint> = rows.iter().map(|r| resonant_point(&r.1)).collect();
    if resonant.iter().all(|s| s.s21.norm_sqr() > 0.5) {
        return Err(Error::Identifiability("every power row is saturated (resonant |t|² > 0.5); add lower powers".into()));
    }

    // Geometry of the weakest row: depth → Γ₁/2Γ₂, half-depth half-width → Γ₂.
    let low = &rows[0].1;
    let depth = 1.0 - resonant[0].s21.re;
    let half = low.iter().filter(|s| 1.0 - s.s21.re >= 0.5 * depth).map(|s| s.delta_hz.abs()).fold(0.0, f64::max);
    let spacing = {
        let mut d: Vec<f64> = low.iter().map(|s| s.delta_hz).collect();
        d.sort_by(f64::total_cmp);
        d.windows(2).map(|w| w[1] - w[0]).filter(|x| *x > 0.0).fold(f64::INFINITY, f64::min)
    };
    let g2_0 = half.max(spacing);
    let g1_0 = (2.0 * g2_0 * depth / xi).clamp(1e-3 * g2_0, 4.0 * g2_0);
    let a0 = xi * g1_0 / (2.0 * g2_0);
    let om0: Vec<f64> = resonant
        .iter()
        .map(|s| {
            let dip = (1.0 - s.s21.re).max(1e-6);
            (g1_0 * g2_0 * (a0 / dip - 1.0)).max(1e-6 * g1_0 * g2_0).sqrt()
        })
        .collect();

    let idx: Vec<(usize, ScanPoint)> = rows.iter().enumerate().flat_map(|(k, r)| r.1.iter().map(move |s| (k, *s))).collect();
    let n = idx.len();
    let unpack = |p: &[f64]| WqedParams { gamma1: p[0].exp(), gamma2: p[1].exp(), xi };
    let residuals = |p: &[f64]| -> Result<DVector<f64>> {
        let wp = unpack(p);
        let mut r = DVector::zeros(2 * n);
        for (m, &(k, s)) in idx.iter().enumerate() {
            let d = wqed_transmission(s.delta_hz, p[2 + k], &wp) - s.s21;
            r[2 * m] = d.re;
            r[2 * m + 1] = d.im;
        }
        Ok(r)
    };
    let np = 2 + rows.len();
    let mut jacobian = |p: &[f64]| -> Result<DMatrix<f64>> {
        let wp = unpack(p);
        let mut j = DMatrix::zeros(2 * n, np);
        for (m, &(k, s)) in idx.iter().enumerate() {
            let g = transmission_gradient(s.delta_hz, p[2 + k], &wp);
            for (col, v) in [(0, g[0]), (1, g[1]), (2 + k, g[2])] {
                j[(2 * m, col)] = v.re;
                j[(2 * m + 1, col)] = v.im;
            }
        }
        Ok(j)
    };
    let mut p0 = vec![g1_0.ln(), g2_0.ln()];
    p0.extend(om0);
    let opts = LmOptions { max_iter: 500, ..LmOptions::default() };
    let rep = levenberg_marquardt(residuals, Some(&mut jacobian), &p0, &opts)?;
    let wp = unpack(&rep.params);
    if !(wp.gamma1.is_finite() && wp.gamma2.is_finite()) {
        return Err(Error::FitDivergence("non-finite decay rates".into()));
    }
    let errs = rep.std_errors.clone().unwrap_or_else(|| vec![f64::NAN; np]);
    Ok(WqedFit {
        gamma1: wp.gamma1,
        gamma2: wp.gamma2,
        gamma_phi: wp.gamma2 - 0.5 * wp.gamma1,
        xi,
        gamma1_err: wp.gamma1 * errs[0],
        gamma2_err: wp.gamma2 * errs[1],
        omega_drive: rows.iter().zip(&rep.params[2..]).map(|(r, om)| (r.0, om.abs())).collect(),
        rms_residual: (2.0 * rep.cost / (2 * n) as f64).sqrt(),
        iterations: rep.iterations,
    })
}

#[derive(Debug, Deserialize)]
struct WqedRow {
    detuning_mhz: f64,
    power_dbm: f64,
    s21_real: f64,
    s21_imag: f64,
}

/// Read `detuning_mhz,power_dbm,s21_real,s21_imag` rows.
pub fn read_wqed_csv<R: Read>(reader: R) -> Result<Vec<ScanPoint>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize::<WqedRow>()
        .map(|r| {
            let r = r.map_err(|e| Error::Parse(e.to_string()))?;
            Ok(ScanPoint {
                delta_hz: r.detuning_mhz * MHZ,
                power_w: dbm_to_watts(r.power_dbm),
                s21: Complex64::new(r.s21_real, r.s21_imag),
            })
        })
        .collect()
}

/// Synthetic scan: `powers_w` at the scan reference plane, `attenuation` to the qubit,
/// complex Gaussian noise of standard deviation `noise` per component.
pub fn synthetic_scan(p: &WqedParams, f_qubit_hz: f64, powers_w: &[f64], attenuation: f64, detunings: &[f64], noise: f64, seed: u64) -> Vec<ScanPoint> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(0.0, noise.max(0.0)).unwrap();
    let mut out = Vec::with_capacity(powers_w.len() * detunings.len());
    for &pw in powers_w {
        let om = drive_from_power(pw * attenuation, p.gamma1, f_qubit_hz);
        for &delta in detunings {
            let t = wqed_transmission(delta, om, p);
            let n = if noise > 0.0 { Complex64::new(d.sample(&mut rng), d.sample(&mut rng)) } else { Complex64::new(0.0, 0.0) };
            out.push(ScanPoint { delta_hz: delta, power_w: pw, s21: t + n });
        }
    }
    out
}

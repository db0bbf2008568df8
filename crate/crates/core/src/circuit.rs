//! Linear model of the resonator-loaded Josephson transmission line.
//!
//! Each unit cell is a junction (inductance `L_J`, optional shunt `C_J`) in
//! series and a capacitance `C_g` to ground. Every `insertion_period` cells
//! a series LC resonator is coupled to the line through `C_c`. The complex
//! wavevector per cell is
//!
//! ```text
//! k(ω) = ω √(L_J C_g (1 - i tanδ)) / √(1 - ω² L_J C_J) · ξ(ω)
//! ξ²   = 1 - Σ_r C_c,r / (P_r C_g)
//!          + Σ_r C_c,r / (P_r C_g) · (1 - ω² L_r C_r (1 - i tanδ))
//!                                   / (1 - ω² L_r (C_r + C_c,r)(1 - i tanδ))
//! ```
//!
//! Positions are measured in unit cells, so `k` is in rad/cell and the
//! device length is `n_cells`. With the `e^{i(ωt - kx)}` convention a lossy
//! line has `Im k < 0` and the transmitted power is `e^{2 Im k · n}`.

use crate::error::{Error, Result};
use crate::units::{self, angular};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorBank {
    /// Bare resonance frequency (Hz).
    pub f_res: f64,
    /// Resonator capacitance (F).
    pub c_res: f64,
    /// Coupling capacitance to the line (F).
    pub c_couple: f64,
    /// Cells per inserted resonator.
    #[serde(default = "default_insertion_period")]
    pub insertion_period: u32,
}

fn default_insertion_period() -> u32 {
    10
}

impl ResonatorBank {
    pub fn inductance(&self) -> f64 {
        1.0 / (angular(self.f_res).powi(2) * self.c_res)
    }

    /// Frequency where the coupled resonator's admittance diverges; the
    /// stopband opens here and closes below `f_res`.
    pub fn pole_frequency(&self) -> f64 {
        self.f_res / (1.0 + self.c_couple / self.c_res).sqrt()
    }

    fn validate(&self) -> Result<()> {
        if !(self.f_res > 0.0 && self.c_res > 0.0 && self.c_couple >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "resonator bank needs f_res > 0, c_res > 0, c_couple >= 0: {self:?}"
            )));
        }
        if self.insertion_period == 0 {
            return Err(Error::InvalidParameter("insertion_period must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub n_cells: u32,
    /// Capacitance to ground per cell (F).
    pub c_ground: f64,
    /// Junction critical current (A).
    pub i_critical: f64,
    /// Junction shunt capacitance (F); zero removes the plasma cutoff.
    #[serde(default)]
    pub c_junction: f64,
    /// Dielectric loss tangent applied to every capacitor.
    #[serde(default)]
    pub tan_delta: f64,
    pub resonators: Vec<ResonatorBank>,
    /// Pump frequencies (Hz), lower pump first.
    pub pump_freqs: [f64; 2],
}

impl CircuitParams {
    /// The fabricated dual-dispersion device.
    pub fn dual_pump_reference() -> Self {
        CircuitParams {
            n_cells: 3141,
            c_ground: 28.616 * units::FEMTO,
            i_critical: 3.14 * units::MICRO,
            c_junction: 0.0,
            tan_delta: 4.9e-3,
            resonators: vec![
                ResonatorBank {
                    f_res: 5.2815 * units::GHZ,
                    c_res: 6.653 * units::PICO,
                    c_couple: 28.616 * units::FEMTO,
                    insertion_period: 10,
                },
                ResonatorBank {
                    f_res: 8.169 * units::GHZ,
                    c_res: 2.781 * units::PICO,
                    c_couple: 28.616 * units::FEMTO,
                    insertion_period: 10,
                },
            ],
            pump_freqs: [5.2984 * units::GHZ, 8.109 * units::GHZ],
        }
    }

    /// Bare line without resonators or loss, useful as a dispersionless reference.
    pub fn bare_line(&self) -> Self {
        CircuitParams {
            resonators: Vec::new(),
            c_junction: 0.0,
            tan_delta: 0.0,
            ..self.clone()
        }
    }

    pub fn lossless(&self) -> Self {
        CircuitParams {
            tan_delta: 0.0,
            ..self.clone()
        }
    }

    pub fn junction_inductance(&self) -> f64 {
        units::FLUX_QUANTUM / (2.0 * std::f64::consts::PI * self.i_critical)
    }

    pub fn length(&self) -> f64 {
        self.n_cells as f64
    }

    pub fn center_frequency(&self) -> f64 {
        0.5 * (self.pump_freqs[0] + self.pump_freqs[1])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells == 0 {
            return Err(Error::InvalidParameter("n_cells must be > 0".into()));
        }
        if !(self.i_critical > 0.0 && self.c_ground > 0.0) {
            return Err(Error::InvalidParameter(
                "i_critical and c_ground must be > 0".into(),
            ));
        }
        if !(self.tan_delta >= 0.0 && self.c_junction >= 0.0) {
            return Err(Error::InvalidParameter(
                "tan_delta and c_junction must be >= 0".into(),
            ));
        }
        if !(self.pump_freqs[0] > 0.0 && self.pump_freqs[0] < self.pump_freqs[1]) {
            return Err(Error::InvalidParameter(
                "pump frequencies must satisfy 0 < f1 < f2".into(),
            ));
        }
        self.resonators.iter().try_for_each(ResonatorBank::validate)
    }

    /// ξ² at angular frequency `w` with capacitor factor `cap` = 1 - i tanδ.
    fn xi_squared(&self, w: f64, cap: Complex64) -> Complex64 {
        let mut xi2 = Complex64::new(1.0, 0.0);
        for r in &self.resonators {
            let weight = r.c_couple / (r.insertion_period as f64 * self.c_ground);
            let lr = r.inductance();
            let num = 1.0 - w * w * lr * r.c_res * cap;
            let den = 1.0 - w * w * lr * (r.c_res + r.c_couple) * cap;
            xi2 += weight * (num / den - 1.0);
        }
        xi2
    }

    /// Lossless stopbands as `(f_lo, f_hi)` pairs in Hz, sorted.
    ///
    /// Each resonator bank closes the line between its pole frequency and the
    /// point where ξ² returns to zero. A nonzero junction capacitance adds a
    /// cutoff above the junction plasma frequency (reported with `f_hi = ∞`).
    pub fn stopbands(&self) -> Vec<(f64, f64)> {
        let one = Complex64::new(1.0, 0.0);
        let mut bands = Vec::new();
        for r in &self.resonators {
            let lo = r.pole_frequency();
            let hi = r.f_res;
            if r.c_couple == 0.0 {
                continue;
            }
            // ξ² → -∞ just above the pole and ≥ 1 - Σweights > 0 at f_res.
            let xi = |f: f64| self.xi_squared(angular(f), one).re;
            let (mut a, mut b) = (lo * (1.0 + 1e-12), hi);
            if xi(b) < 0.0 {
                bands.push((lo, hi));
                continue;
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if xi(m) < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
                if b - a < 1e-6 {
                    break;
                }
            }
            bands.push((lo, b));
        }
        if self.c_junction > 0.0 {
            let fp = 1.0
                / (2.0 * std::f64::consts::PI * (self.junction_inductance() * self.c_junction).sqrt());
            bands.push((fp, f64::INFINITY));
        }
        bands.sort_by(|a, b| a.0.total_cmp(&b.0));
        bands
    }

    pub fn in_stopband(&self, f: f64) -> bool {
        self.stopbands().iter().any(|&(lo, hi)| f >= lo && f <= hi)
    }
}

/// Complex wavevector in rad/cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wavevector(pub Complex64);

impl Wavevector {
    pub fn re(&self) -> f64 {
        self.0.re
    }
    pub fn im(&self) -> f64 {
        self.0.im
    }
}

/// Complex wavevector at ordinary frequency `f` (Hz).
///
/// `tan_delta_override` replaces the circuit's loss tangent when given.
/// Returns [`Error::Stopband`] when the real part of ξ² (or of the plasma
/// factor) is negative, or when `f` sits on a pole.
pub fn wavevector(f: f64, params: &CircuitParams, tan_delta_override: Option<f64>) -> Result<Wavevector> {
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::InvalidParameter(format!("frequency must be > 0, got {f}")));
    }
    let tan_delta = tan_delta_override.unwrap_or(params.tan_delta);
    let cap = Complex64::new(1.0, -tan_delta);
    let w = angular(f);
    let lj = params.junction_inductance();

    let xi2 = params.xi_squared(w, cap);
    let plasma = 1.0 - w * w * lj * params.c_junction;
    if !xi2.is_finite() || xi2.re < 0.0 || plasma <= 0.0 {
        return Err(Error::Stopband { f_hz: f });
    }
    let line = (cap * (lj * params.c_ground)).sqrt();
    let k = w * line * xi2.sqrt() / plasma.sqrt();
    if !k.is_finite() {
        return Err(Error::Stopband { f_hz: f });
    }
    Ok(Wavevector(k))
}

/// Real (lossless) wavevector, the `k_ω` entering phase matching and couplings.
pub fn real_wavevector(f: f64, params: &CircuitParams) -> Result<f64> {
    wavevector(f, params, Some(0.0)).map(|k| k.re())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InsertionLoss {
    pub per_cell_db: f64,
    pub total_db: f64,
}

/// Transmitted-power insertion loss `20 log10 |e^{-i k n}|` (negative dB).
pub fn insertion_loss_db(f: f64, params: &CircuitParams) -> Result<InsertionLoss> {
    let k = wavevector(f, params, None)?;
    let per_cell_db = 20.0 / LN_10 * k.im();
    Ok(InsertionLoss {
        per_cell_db,
        total_db: per_cell_db * params.length(),
    })
}

/// One row of the dispersion CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionPoint {
    pub frequency_ghz: f64,
    pub k_real_rad_per_cell: f64,
    pub k_imag_rad_per_cell: f64,
    pub loss_db_total: f64,
}

/// Evaluates the dispersion on a grid; stopband points are skipped.
pub fn dispersion_curve(freqs: &[f64], params: &CircuitParams) -> Vec<DispersionPoint> {
    freqs
        .iter()
        .filter_map(|&f| {
            let k = wavevector(f, params, None).ok()?;
            Some(DispersionPoint {
                frequency_ghz: f / units::GHZ,
                k_real_rad_per_cell: k.re(),
                k_imag_rad_per_cell: k.im(),
                loss_db_total: 20.0 / LN_10 * k.im() * params.length(),
            })
        })
        .collect()
}

//! Voltage-to-photon conversion through the lossy, amplified output chain.

use crate::error::{Error, Result};
use crate::units::{angular, BOLTZMANN, HBAR};
use serde::{Deserialize, Serialize};

/// Default residual thermal occupation at the device input.
pub const DEFAULT_N_BAR: f64 = 1.4e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainModel {
    pub eta_meas: f64,
    pub n_bar: f64,
    /// quanta / mV².
    pub alpha: f64,
    /// Vacuum variance at the digitizer, mV².
    pub var_off: f64,
    /// System noise temperature the efficiency came from, K.
    pub t_sys: Option<f64>,
}

pub fn build_chain(var_off: f64, eta_meas: f64, n_bar: f64) -> Result<ChainModel> {
    if !(var_off > 0.0 && var_off.is_finite()) {
        return Err(Error::InvalidParameter(format!("vacuum variance must be positive, got {var_off}")));
    }
    if !(eta_meas > 0.0 && eta_meas <= 1.0) {
        return Err(Error::InvalidParameter(format!("eta_meas must lie in (0, 1], got {eta_meas}")));
    }
    if !(n_bar >= 0.0 && n_bar.is_finite()) {
        return Err(Error::InvalidParameter(format!("n_bar must be non-negative, got {n_bar}")));
    }
    let x_off = 0.5 + eta_meas * n_bar;
    Ok(ChainModel { eta_meas, n_bar, alpha: x_off / var_off, var_off, t_sys: None })
}

impl ChainModel {
    /// Attach the system noise temperature; it must reproduce η = ħω/(2 k_B T_sys).
    pub fn with_t_sys(mut self, t_sys: f64, f_hz: f64) -> Result<Self> {
        let eta = HBAR * angular(f_hz) / (2.0 * BOLTZMANN * t_sys);
        if (eta - self.eta_meas).abs() > 1e-6 * self.eta_meas {
            return Err(Error::InvalidParameter(format!(
                "T_sys = {t_sys} K at {f_hz} Hz implies eta = {eta}, chain has {}",
                self.eta_meas
            )));
        }
        self.t_sys = Some(t_sys);
        Ok(self)
    }

    /// Δx²_off = ½ + η n̄ after the beamsplitter.
    pub fn x_off(&self) -> f64 {
        0.5 + self.eta_meas * self.n_bar
    }

    /// ΔX²_off = ½ + n̄ at the device output.
    pub fn big_x_off(&self) -> f64 {
        0.5 + self.n_bar
    }

    /// Δx² = α ΔV².
    pub fn to_beamsplitter_output(&self, var_mv2: f64) -> f64 {
        self.alpha * var_mv2
    }

    /// Forward model: device-output variance (quanta) to digitizer variance (mV²).
    pub fn forward(&self, big_x: f64) -> f64 {
        (self.eta_meas * big_x + (1.0 - self.eta_meas) * 0.5) / self.alpha
    }

    /// Same chain with a different efficiency; α is recomputed from the vacuum variance.
    pub fn with_eta(&self, eta_meas: f64) -> Result<Self> {
        build_chain(self.var_off, eta_meas, self.n_bar)
    }
}

/// ΔX² = (α ΔV² − (1 − η)/2) / η, rejecting negative results.
pub fn to_photon_basis(var_mv2: f64, chain: &ChainModel) -> Result<f64> {
    let x = raw_photon_basis(var_mv2, chain);
    if x < 0.0 {
        return Err(Error::NonPhysicalVariance { value: x, tolerance: 0.0 });
    }
    Ok(x)
}

fn raw_photon_basis(var_mv2: f64, chain: &ChainModel) -> f64 {
    (chain.alpha * var_mv2 - 0.5 * (1.0 - chain.eta_meas)) / chain.eta_meas
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonVariance {
    pub value: f64,
    pub stderr: f64,
    /// Raw estimate was negative but within 3 stderr and has been clamped to zero.
    pub clamped: bool,
}

/// Photon-basis variance with statistical tolerance: negative results within three
/// propagated standard errors are clamped to zero and flagged.
pub fn to_photon_basis_with_stderr(var_mv2: f64, stderr_mv2: f64, chain: &ChainModel) -> Result<PhotonVariance> {
    let value = raw_photon_basis(var_mv2, chain);
    let stderr = chain.alpha * stderr_mv2 / chain.eta_meas;
    if value >= 0.0 {
        return Ok(PhotonVariance { value, stderr, clamped: false });
    }
    if value < -3.0 * stderr {
        return Err(Error::NonPhysicalVariance { value, tolerance: 3.0 * stderr });
    }
    Ok(PhotonVariance { value: 0.0, stderr, clamped: true })
}

pub fn squeezing_db(var: f64, var_off: f64) -> Result<f64> {
    if !(var > 0.0 && var_off > 0.0) {
        return Err(Error::InvalidParameter(format!("variances must be positive, got {var} and {var_off}")));
    }
    Ok(10.0 * (var / var_off).log10())
}

/// 𝒫 = 1/√(S₋ S₊) from the linear variance ratios to vacuum.
pub fn purity(s_min_linear: f64, s_max_linear: f64) -> Result<f64> {
    if !(s_min_linear > 0.0 && s_max_linear > 0.0) {
        return Err(Error::InvalidParameter(format!("variance ratios must be positive, got {s_min_linear} and {s_max_linear}")));
    }
    Ok(1.0 / (s_min_linear * s_max_linear).sqrt())
}

/// 1 − ΔṼ²/ΔṼ²_off.
pub fn variance_change(var_sqz: f64, var_off: f64) -> Result<f64> {
    if !(var_off > 0.0) {
        return Err(Error::InvalidParameter(format!("vacuum variance must be positive, got {var_off}")));
    }
    Ok(1.0 - var_sqz / var_off)
}

/// Asymmetric efficiency uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaInterval {
    pub eta: f64,
    pub plus: f64,
    pub minus: f64,
}

/// Value with asymmetric bounds: `value + plus` and `value − minus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounded {
    pub value: f64,
    pub plus: f64,
    pub minus: f64,
}

/// Photon-basis variance and its dB level re-evaluated at η ± δη; returns
/// (ΔX² bounds, dB bounds). ΔX²_off = ½ + n̄ does not depend on η.
pub fn eta_bounds(var_mv2: f64, chain: &ChainModel, eta: EtaInterval) -> Result<(Bounded, Bounded)> {
    let eval = |e: f64| -> Result<(f64, f64)> {
        let c = chain.with_eta(e)?;
        let x = to_photon_basis(var_mv2, &c)?;
        Ok((x, squeezing_db(x, c.big_x_off())?))
    };
    let (x0, d0) = eval(eta.eta)?;
    let (xa, da) = eval(eta.eta + eta.plus)?;
    let (xb, db) = eval(eta.eta - eta.minus)?;
    let bound = |v: f64, a: f64, b: f64| Bounded {
        value: v,
        plus: (a.max(b) - v).max(0.0),
        minus: (v - a.min(b)).max(0.0),
    };
    Ok((bound(x0, xa, xb), bound(d0, da, db)))
}

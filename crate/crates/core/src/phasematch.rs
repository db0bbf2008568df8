//! Power-dependent phase mismatch of the amplification process and of the
//! four parasitic two-pump-photon processes, and the coupled-mode coupling
//! constants.
//!
//! Kerr shifts use the rotating-frame wavevectors
//! `k̃_ω = (1 + 2Σ|β_p|²) k_ω` for signal-band waves and
//! `k̃_p = (1 + |β_p|² + 2|β_q|²) k_p` for pump `p`.

use crate::circuit::{real_wavevector, CircuitParams};
use crate::error::{Error, Result};
use crate::units::GHZ;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Largest admissible |β| (a pump current of I_c).
pub const BETA_LIMIT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProcessKind {
    PA,
    DFWM1,
    DFWM2,
    FC1,
    FC2,
}

impl ProcessKind {
    pub const ALL: [ProcessKind; 5] = [
        ProcessKind::PA,
        ProcessKind::DFWM1,
        ProcessKind::DFWM2,
        ProcessKind::FC1,
        ProcessKind::FC2,
    ];

    /// Partner ("idler") frequency of the process for signal `f_s`.
    pub fn idler_frequency(self, f_s: f64, pumps: [f64; 2]) -> f64 {
        let [o1, o2] = pumps;
        match self {
            ProcessKind::PA => o1 + o2 - f_s,
            ProcessKind::DFWM1 => 2.0 * o1 - f_s,
            ProcessKind::DFWM2 => 2.0 * o2 - f_s,
            ProcessKind::FC1 => f_s - (o2 - o1),
            ProcessKind::FC2 => f_s + (o2 - o1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProcessKind::PA => "PA",
            ProcessKind::DFWM1 => "DFWM1",
            ProcessKind::DFWM2 => "DFWM2",
            ProcessKind::FC1 => "FC1",
            ProcessKind::FC2 => "FC2",
        }
    }
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveRole {
    SignalBand,
    /// Pump index 0 or 1.
    Pump(usize),
}

pub fn check_betas(betas: [f64; 2]) -> Result<()> {
    for b in betas {
        if !(b.abs() < BETA_LIMIT) {
            return Err(Error::Overdrive { beta: b.abs() });
        }
    }
    Ok(())
}

/// Kerr factor multiplying the linear wavevector.
pub fn kerr_factor(role: WaveRole, betas: [f64; 2]) -> f64 {
    let b2 = [betas[0] * betas[0], betas[1] * betas[1]];
    match role {
        WaveRole::SignalBand => 1.0 + 2.0 * (b2[0] + b2[1]),
        WaveRole::Pump(p) => 1.0 + b2[p] + 2.0 * b2[1 - p],
    }
}

/// Kerr-shifted real wavevector (rad/cell). `betas` are pump magnitudes.
pub fn nonlinear_wavevector(f: f64, role: WaveRole, betas: [f64; 2], params: &CircuitParams) -> Result<f64> {
    check_betas(betas)?;
    Ok(kerr_factor(role, betas) * real_wavevector(f, params)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MismatchReport {
    pub process: ProcessKind,
    pub f_signal: f64,
    pub f_idler: f64,
    /// Total mismatch (rad/cell).
    pub delta_k: f64,
    /// Linear-dispersion part.
    pub bare: f64,
    /// Parts proportional to |β_1|² and |β_2|².
    pub kerr: [f64; 2],
}

struct Waves {
    s: f64,
    i: f64,
    p: [f64; 2],
}

fn process_mismatch(process: ProcessKind, w: &Waves, betas: [f64; 2]) -> f64 {
    let sig = kerr_factor(WaveRole::SignalBand, betas);
    let ks = sig * w.s;
    let ki = sig * w.i;
    let k1 = kerr_factor(WaveRole::Pump(0), betas) * w.p[0];
    let k2 = kerr_factor(WaveRole::Pump(1), betas) * w.p[1];
    match process {
        ProcessKind::PA => k1 + k2 - ks - ki,
        ProcessKind::DFWM1 => ks + ki - 2.0 * k1,
        ProcessKind::DFWM2 => ks + ki - 2.0 * k2,
        ProcessKind::FC1 => ks - ki - (k2 - k1),
        ProcessKind::FC2 => ks - ki - (k1 - k2),
    }
}

/// Phase mismatch of `process` for signal frequency `f_s` at pump magnitudes `betas`.
pub fn delta_k(process: ProcessKind, f_s: f64, betas: [f64; 2], params: &CircuitParams) -> Result<MismatchReport> {
    check_betas(betas)?;
    let f_i = process.idler_frequency(f_s, params.pump_freqs);
    if !(f_i > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{process} partner of {f_s:.6e} Hz is not positive"
        )));
    }
    let w = Waves {
        s: real_wavevector(f_s, params)?,
        i: real_wavevector(f_i, params)?,
        p: [
            real_wavevector(params.pump_freqs[0], params)?,
            real_wavevector(params.pump_freqs[1], params)?,
        ],
    };
    let bare = process_mismatch(process, &w, [0.0, 0.0]);
    let kerr = [
        process_mismatch(process, &w, [betas[0], 0.0]) - bare,
        process_mismatch(process, &w, [0.0, betas[1]]) - bare,
    ];
    Ok(MismatchReport {
        process,
        f_signal: f_s,
        f_idler: f_i,
        delta_k: process_mismatch(process, &w, betas),
        bare,
        kerr,
    })
}

/// One coupling term between a mode and its partner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingEntry {
    pub partner_hz: f64,
    pub lambda: Complex64,
    /// Rotating-frame mismatch Δ̃k (rad/cell).
    pub delta_k: f64,
    /// Mismatch from linear dispersion only.
    pub delta_k_bare: f64,
}

/// λ^fc, λ^sq and their mismatches for every pump pair `(p, q)`.
/// Entries whose partner is non-positive or in a stopband are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Couplings {
    pub fc: [[Option<CouplingEntry>; 2]; 2],
    pub sq: [[Option<CouplingEntry>; 2]; 2],
}

/// Coupling constants at frequency `f` for local pump amplitudes `betas`.
pub fn couplings(f: f64, betas: [Complex64; 2], params: &CircuitParams) -> Result<Couplings> {
    let mags = [betas[0].norm(), betas[1].norm()];
    check_betas(mags)?;
    let pumps = params.pump_freqs;
    let k = real_wavevector(f, params)?;
    let kp = [real_wavevector(pumps[0], params)?, real_wavevector(pumps[1], params)?];
    let sig = kerr_factor(WaveRole::SignalBand, mags);
    let kpt = [
        kerr_factor(WaveRole::Pump(0), mags) * kp[0],
        kerr_factor(WaveRole::Pump(1), mags) * kp[1],
    ];
    let partner_k = |fp: f64| -> Option<f64> {
        if fp > 0.0 {
            real_wavevector(fp, params).ok()
        } else {
            None
        }
    };

    let mut out = Couplings {
        fc: [[None; 2]; 2],
        sq: [[None; 2]; 2],
    };
    for p in 0..2 {
        for q in 0..2 {
            let f_fc = f + pumps[p] - pumps[q];
            if let Some(kf) = partner_k(f_fc) {
                out.fc[p][q] = Some(CouplingEntry {
                    partner_hz: f_fc,
                    lambda: betas[p].conj() * betas[q] * (k * kf).sqrt(),
                    delta_k: -sig * k + sig * kf - kpt[p] + kpt[q],
                    delta_k_bare: -k + kf - kp[p] + kp[q],
                });
            }
            let f_sq = pumps[p] + pumps[q] - f;
            if let Some(ks) = partner_k(f_sq) {
                out.sq[p][q] = Some(CouplingEntry {
                    partner_hz: f_sq,
                    lambda: betas[p] * betas[q] * (k * ks).sqrt(),
                    delta_k: -sig * k - sig * ks + kpt[p] + kpt[q],
                    delta_k_bare: -k - ks + kp[p] + kp[q],
                });
            }
        }
    }
    Ok(out)
}

/// One row of the phase-mismatch CSV.
#[derive(Debug, Clone, Serialize)]
pub struct MismatchRow {
    pub f_signal_ghz: f64,
    pub process: String,
    pub delta_k_rad_per_cell: f64,
}

/// Mismatch of all five processes over a signal grid; failed points are skipped.
pub fn mismatch_table(freqs: &[f64], betas: [f64; 2], params: &CircuitParams) -> Vec<MismatchRow> {
    let mut rows = Vec::new();
    for &f in freqs {
        for process in ProcessKind::ALL {
            if let Ok(r) = delta_k(process, f, betas, params) {
                rows.push(MismatchRow {
                    f_signal_ghz: f / GHZ,
                    process: process.name().to_string(),
                    delta_k_rad_per_cell: r.delta_k,
                });
            }
        }
    }
    rows
}

//! Assembly of H(x) and Γ for the physical device.

use super::{CMatrix, CoupledModes};
use crate::circuit::{real_wavevector, CircuitParams};
use crate::error::{Error, Result};
use crate::units::power_rate_from_db;
use crate::lossmodel::{gamma_at, LossProfile};
use crate::modeladder::{build_modes, ModeSet};
use crate::phasematch::check_betas;
use crate::pump::{PumpPair, PumpState};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CouplingKind {
    /// Frequency conversion into Λ1.
    Conversion,
    /// Two-photon squeezing into Λ2.
    Squeezing,
}

/// One term of H: mode `i` couples to mode `j` through pumps `(p, q)`.
///
/// The entry at position x is
/// `weight · amp0 · e^{−(γ_p+γ_q)x/2} · e^{−i φ(x)}` with
/// `φ(x) = dk_bare·x + signal_kerr·Φ(x) + pump_kerr[r]·(I_r + 2I_s)` summed over
/// pumps r, where I_r = ∫|β_r|² and Φ = I_1 + I_2. In the lossless case
/// φ(x) = Δ̃k·x with the rotating-frame mismatch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub kind: CouplingKind,
    pub p: usize,
    pub q: usize,
    pub amp0: Complex64,
    pub dk_bare: f64,
    pub signal_kerr: f64,
    pub pump_kerr: [f64; 2],
    pub decay: f64,
}

/// Inputs that define a device solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    pub signal_hz: f64,
    /// Input pump magnitudes |β_1(0)|, |β_2(0)|.
    pub betas: [f64; 2],
    #[serde(default)]
    pub depth: usize,
    pub loss: LossProfile,
    /// Total pump insertion loss (dB ≤ 0); `None` derives it from `loss`.
    #[serde(default)]
    pub pump_loss_db: Option<f64>,
}

impl DeviceSpec {
    /// Pump power decay rate per cell.
    pub fn pump_gamma(&self, n_cells: f64) -> f64 {
        match self.pump_loss_db {
            Some(db) => power_rate_from_db(db, n_cells),
            None => self.loss.pump_gamma(n_cells),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Device {
    pub params: CircuitParams,
    pub modes: ModeSet,
    pub pumps: PumpPair,
    pub loss: LossProfile,
    pub couplings: Vec<Coupling>,
    /// Linear wavevector of every mode.
    pub k: Vec<f64>,
}

impl Device {
    /// Build from a spec; pump loss follows the loss profile.
    pub fn from_spec(params: &CircuitParams, spec: &DeviceSpec) -> Result<Self> {
        check_betas(spec.betas)?;
        spec.loss.validate()?;
        if spec.pump_loss_db.is_some_and(|db| !(db <= 0.0)) {
            return Err(Error::InvalidParameter("pump loss must be <= 0 dB".into()));
        }
        let gp = spec.pump_gamma(params.length());
        let [f1, f2] = params.pump_freqs;
        let pumps = PumpPair::new(
            [PumpState::new(f1, spec.betas[0], gp), PumpState::new(f2, spec.betas[1], gp)],
            params,
        )?;
        let modes = build_modes(spec.signal_hz, params.pump_freqs, spec.depth)?;
        Self::new(params.clone(), modes, pumps, spec.loss.clone())
    }

    pub fn new(params: CircuitParams, modes: ModeSet, pumps: PumpPair, loss: LossProfile) -> Result<Self> {
        params.validate()?;
        loss.validate()?;
        let k = modes
            .freqs
            .iter()
            .map(|&f| real_wavevector(f, &params))
            .collect::<Result<Vec<_>>>()?;
        let kp = pumps.k;
        let b0 = [pumps.pumps[0].beta0, pumps.pumps[1].beta0];
        let g = [pumps.pumps[0].gamma, pumps.pumps[1].gamma];

        let mut couplings = Vec::new();
        for i in 0..modes.len() {
            for pr in &modes.squeeze_partners[i] {
                let (j, p, q) = (pr.partner, pr.p, pr.q);
                let mut pump_kerr = [0.0; 2];
                pump_kerr[p] += kp[p];
                pump_kerr[q] += kp[q];
                couplings.push(Coupling {
                    i,
                    j,
                    kind: CouplingKind::Squeezing,
                    p,
                    q,
                    amp0: b0[p] * b0[q] * (k[i] * k[j]).sqrt(),
                    dk_bare: -k[i] - k[j] + kp[p] + kp[q],
                    signal_kerr: -2.0 * (k[i] + k[j]),
                    pump_kerr,
                    decay: 0.5 * (g[p] + g[q]),
                });
            }
            for pr in &modes.convert_partners[i] {
                let (j, p, q) = (pr.partner, pr.p, pr.q);
                let mut pump_kerr = [0.0; 2];
                pump_kerr[p] -= kp[p];
                pump_kerr[q] += kp[q];
                couplings.push(Coupling {
                    i,
                    j,
                    kind: CouplingKind::Conversion,
                    p,
                    q,
                    amp0: 2.0 * b0[p].conj() * b0[q] * (k[i] * k[j]).sqrt(),
                    dk_bare: -k[i] + k[j] - kp[p] + kp[q],
                    signal_kerr: 2.0 * (k[j] - k[i]),
                    pump_kerr,
                    decay: 0.5 * (g[p] + g[q]),
                });
            }
        }
        Ok(Device {
            params,
            modes,
            pumps,
            loss,
            couplings,
            k,
        })
    }

    /// Λ1 and Λ2 at position x.
    pub fn blocks(&self, x: f64) -> (CMatrix, CMatrix) {
        let n = self.modes.len();
        let mut l1 = CMatrix::zeros(n, n);
        let mut l2 = CMatrix::zeros(n, n);
        let i1 = self.pumps.intensity_integral(0, x);
        let i2 = self.pumps.intensity_integral(1, x);
        let phi = i1 + i2;
        let pump_phase = [i1 + 2.0 * i2, i2 + 2.0 * i1];
        for c in &self.couplings {
            let phase = c.dk_bare * x + c.signal_kerr * phi + c.pump_kerr[0] * pump_phase[0] + c.pump_kerr[1] * pump_phase[1];
            let v = c.amp0 * Complex64::from_polar((-c.decay * x).exp(), -phase);
            match c.kind {
                CouplingKind::Conversion => l1[(c.i, c.j)] += v,
                CouplingKind::Squeezing => l2[(c.i, c.j)] += v,
            }
        }
        (l1, l2)
    }

    /// Index of the PA partner Ω1 + Ω2 − ω_0 (0 when degenerate).
    pub fn pa_partner(&self) -> usize {
        let [o1, o2] = self.params.pump_freqs;
        self.modes.index_of(o1 + o2 - self.modes.freqs[0]).unwrap_or(0)
    }
}

impl CoupledModes for Device {
    fn n_modes(&self) -> usize {
        self.modes.len()
    }

    fn length(&self) -> f64 {
        self.params.length()
    }

    fn hamiltonian(&self, x: f64, h: &mut CMatrix) {
        let n = self.modes.len();
        let (l1, l2) = self.blocks(x);
        for a in 0..n {
            for b in 0..n {
                h[(a, b)] = l1[(a, b)];
                h[(a, n + b)] = l2[(a, b)];
                h[(n + a, b)] = l2[(a, b)].conj();
                h[(n + a, n + b)] = l1[(a, b)].conj();
            }
        }
    }

    fn loss_rates(&self, _x: f64, photons: &[f64], gamma: &mut [f64]) {
        let len = self.params.length();
        for (i, g) in gamma.iter_mut().enumerate() {
            *g = gamma_at(self.modes.freqs[i], photons[i], &self.loss, len);
        }
    }

    fn photon_dependent(&self) -> bool {
        self.loss.is_photon_dependent()
    }

    fn output_efficiency(&self) -> f64 {
        self.loss.output_efficiency()
    }
}

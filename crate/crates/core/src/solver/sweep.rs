//! Grids over pump-2 power, signal frequency and loss profile.

use super::{power_gain, propagate, squeeze, CoupledModes, Device, DeviceSpec};
use crate::circuit::{real_wavevector, CircuitParams};
use crate::error::Result;
use crate::lossmodel::{lumped_end_loss_correlation, LossProfile};
use crate::ode::OdeOptions;
use crate::pump::calibrate_beta_from_power;
use crate::units::{linear_to_db, GHZ, NANO};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Pump 1 power at the device input (W).
    pub p1_w: f64,
    /// Pump 2 powers (W).
    pub p2_w: Vec<f64>,
    /// Signal frequencies (Hz).
    pub signal_hz: Vec<f64>,
    /// Power-to-β² constants per pump (1/W).
    pub c_p: [f64; 2],
    #[serde(default)]
    pub depth: usize,
    pub losses: Vec<LossProfile>,
    /// Pump insertion loss (dB) shared by every loss profile; `None` lets
    /// each profile set its own.
    #[serde(default)]
    pub pump_loss_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p2_nw: f64,
    pub f_signal_ghz: f64,
    pub gain_db: f64,
    pub squeeze_db: f64,
    pub antisqueeze_db: f64,
    pub purity: f64,
    pub loss_model: String,
    pub betas: [f64; 2],
    pub error: Option<String>,
}

/// Input pump magnitudes for powers `p_w` given the pump decay rate `gp`.
pub fn betas_for(params: &CircuitParams, gp: f64, p_w: [f64; 2], c_p: [f64; 2]) -> Result<[f64; 2]> {
    let z = params.length();
    let mut out = [0.0; 2];
    for p in 0..2 {
        if p_w[p] > 0.0 {
            let k = real_wavevector(params.pump_freqs[p], params)?;
            out[p] = calibrate_beta_from_power(p_w[p], gp, k, z, c_p[p])?.sqrt();
        }
    }
    Ok(out)
}

/// Solve one device and report gain and squeezing of mode 0 with its PA partner.
pub fn solve_point(params: &CircuitParams, spec: &DeviceSpec, opts: &OdeOptions) -> Result<(f64, super::SqueezeResult)> {
    let dev = Device::from_spec(params, spec)?;
    let (mut snaps, _) = propagate(&dev, &[dev.length()], true, opts)?;
    let snap = snaps.pop().expect("one checkpoint");
    let eta = dev.output_efficiency();
    let mut c = snap.correlation.expect("correlation requested");
    if eta < 1.0 {
        c = lumped_end_loss_correlation(&c, linear_to_db(eta));
    }
    let gain = power_gain(&snap.fundamental) * eta;
    let sq = squeeze(&c, 0, dev.pa_partner())?;
    Ok((gain, sq))
}

/// Evaluate every (loss, P2, signal) point; output order follows the grid
/// regardless of thread scheduling, and failed points carry their error.
pub fn sweep(params: &CircuitParams, spec: &SweepSpec, opts: &OdeOptions) -> Vec<SweepRow> {
    let mut grid = Vec::new();
    for loss in &spec.losses {
        for &p2 in &spec.p2_w {
            for &f in &spec.signal_hz {
                grid.push((loss, p2, f));
            }
        }
    }
    grid.par_iter()
        .map(|&(loss, p2, f)| {
            let mut row = SweepRow {
                p2_nw: p2 / NANO,
                f_signal_ghz: f / GHZ,
                gain_db: f64::NAN,
                squeeze_db: f64::NAN,
                antisqueeze_db: f64::NAN,
                purity: f64::NAN,
                loss_model: loss.label(),
                betas: [f64::NAN; 2],
                error: None,
            };
            let mut ds = DeviceSpec {
                signal_hz: f,
                betas: [0.0; 2],
                depth: spec.depth,
                loss: loss.clone(),
                pump_loss_db: spec.pump_loss_db,
            };
            let gp = ds.pump_gamma(params.length());
            let result = betas_for(params, gp, [spec.p1_w, p2], spec.c_p).and_then(|betas| {
                row.betas = betas;
                ds.betas = betas;
                solve_point(params, &ds, opts)
            });
            match result {
                Ok((gain, sq)) => {
                    row.gain_db = linear_to_db(gain);
                    row.squeeze_db = sq.s_min_db;
                    row.antisqueeze_db = sq.s_max_db;
                    row.purity = sq.purity;
                }
                Err(e) => row.error = Some(format!("{}: {e}", e.kind())),
            }
            row
        })
        .collect()
}

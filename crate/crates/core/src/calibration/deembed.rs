//! Wavevector from transmission phase relative to a through line.
//!
//! Phases are phase delays (growing with frequency, φ = +k·length); negate raw S21
//! angles before passing them in.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest residual step after unwrapping that is still accepted.
pub const UNWRAP_LIMIT: f64 = 0.9 * PI;

/// Own phase of the through line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThruModel {
    /// Line through the origin fitted to the unwrapped through phase.
    Fitted,
    /// Known electrical delay: φ = 2π f τ.
    Delay { tau_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deembedded {
    pub freqs_hz: Vec<f64>,
    /// rad/cell; `None` inside flagged stopbands.
    pub k: Vec<Option<f64>>,
    /// Slope of the through-line linear model, rad/Hz.
    pub thru_slope: f64,
}

fn in_bands(f: f64, bands: &[(f64, f64)]) -> bool {
    bands.iter().any(|&(lo, hi)| f >= lo && f <= hi)
}

fn wrap(x: f64) -> f64 {
    x - 2.0 * PI * (x / (2.0 * PI)).round()
}

/// Unwrap `phase` on `freqs`, skipping points inside `bands`. The first segment is
/// anchored so it extrapolates to zero at DC; each later segment takes the 2π branch
/// closest to `prior(f)` when given, else to φ = r·f with r the median of φ/f over the
/// previous segment. Without a prior the branch after a strongly dispersive band can be
/// off by multiples of 2π.
pub fn unwrap_anchored(freqs: &[f64], phase: &[f64], bands: &[(f64, f64)], prior: Option<&dyn Fn(f64) -> f64>) -> Result<Vec<Option<f64>>> {
    let mut out = vec![None; freqs.len()];
    let mut segments: Vec<Vec<usize>> = Vec::new();
    let mut open = false;
    for k in 0..freqs.len() {
        if in_bands(freqs[k], bands) {
            open = false;
            continue;
        }
        if !open {
            segments.push(Vec::new());
            open = true;
        }
        segments.last_mut().unwrap().push(k);
    }
    let mut ratio: Option<f64> = None;
    for seg in &segments {
        let mut vals = Vec::with_capacity(seg.len());
        for (m, &k) in seg.iter().enumerate() {
            let v = if m == 0 {
                phase[k]
            } else {
                let pv = vals[m - 1];
                let step = wrap(phase[k] - pv);
                if step.abs() > UNWRAP_LIMIT {
                    return Err(Error::Unwrap { f_hz: freqs[k], jump: step });
                }
                pv + step
            };
            vals.push(v);
        }
        let target = match (ratio, prior) {
            (Some(_), Some(model)) => model(freqs[seg[0]]),
            (Some(r), None) => r * freqs[seg[0]],
            (None, _) => {
                let head: Vec<(f64, f64)> = seg.iter().zip(&vals).take(5).map(|(&k, &v)| (freqs[k], v)).collect();
                vals[0] - intercept(&head).unwrap_or(0.0)
            }
        };
        let shift = 2.0 * PI * ((vals[0] - target) / (2.0 * PI)).round();
        for (&k, v) in seg.iter().zip(&vals) {
            out[k] = Some(v - shift);
        }
        let mut r: Vec<f64> = seg.iter().zip(&vals).filter(|(&k, _)| freqs[k] > 0.0).map(|(&k, v)| (v - shift) / freqs[k]).collect();
        if !r.is_empty() {
            r.sort_by(f64::total_cmp);
            ratio = Some(r[r.len() / 2]);
        }
    }
    Ok(out)
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let j = xs.partition_point(|&v| v < x).clamp(1, xs.len() - 1);
    let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    ys[j - 1] + t * (ys[j] - ys[j - 1])
}

fn intercept(pts: &[(f64, f64)]) -> Option<f64> {
    match pts.len() {
        0 => None,
        1 => Some(pts[0].1),
        _ => {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
            let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
            Some(my - sxy / sxx * mx)
        }
    }
}

#[derive(Clone, Copy)]
pub struct DeembedOptions<'a> {
    pub thru: ThruModel,
    /// Frequency ranges (Hz) flagged rather than unwrapped.
    pub stopbands: &'a [(f64, f64)],
    /// Expected k(f) in rad/cell, used only to pick the 2π branch after a stopband.
    pub prior_k: Option<&'a dyn Fn(f64) -> f64>,
}

impl Default for DeembedOptions<'_> {
    fn default() -> Self {
        Self { thru: ThruModel::Fitted, stopbands: &[], prior_k: None }
    }
}

/// k = (φ_dut − φ_thru + φ_thru,lin)/n_cells on a common grid.
pub fn deembed_wavevector(freqs: &[f64], phase_dut: &[f64], phase_thru: &[f64], n_cells: f64, opts: &DeembedOptions) -> Result<Deembedded> {
    if phase_dut.len() != freqs.len() {
        return Err(Error::LengthMismatch(freqs.len(), phase_dut.len()));
    }
    if phase_thru.len() != freqs.len() {
        return Err(Error::LengthMismatch(freqs.len(), phase_thru.len()));
    }
    if freqs.len() < 2 || freqs.windows(2).any(|w| !(w[1] > w[0])) || freqs[0] < 0.0 {
        return Err(Error::InvalidParameter("frequency grid must be non-negative and strictly increasing".into()));
    }
    if !(n_cells > 0.0) {
        return Err(Error::InvalidParameter("n_cells must be positive".into()));
    }
    let thru: Vec<f64> = unwrap_anchored(freqs, phase_thru, &[], None)?.into_iter().map(|v| v.unwrap()).collect();
    let slope = match opts.thru {
        ThruModel::Delay { tau_s } => 2.0 * PI * tau_s,
        ThruModel::Fitted => {
            let sff = freqs.iter().map(|f| f * f).sum::<f64>();
            freqs.iter().zip(&thru).map(|(f, p)| f * p).sum::<f64>() / sff
        }
    };
    // Expected DUT phase: prior k·n plus the through-line excess over its linear model.
    let prior = opts.prior_k.map(|pk| {
        let thru = &thru;
        move |f: f64| {
            let t = interpolate(freqs, thru, f);
            pk(f) * n_cells + t - slope * f
        }
    });
    let dut = unwrap_anchored(freqs, phase_dut, opts.stopbands, prior.as_ref().map(|p| p as &dyn Fn(f64) -> f64))?;
    let k = freqs
        .iter()
        .zip(dut)
        .zip(&thru)
        .map(|((&f, d), &t)| d.map(|d| (d - t + slope * f) / n_cells))
        .collect();
    Ok(Deembedded { freqs_hz: freqs.to_vec(), k, thru_slope: slope })
}

//! Finite frequency ladder that truncates the coupled-mode problem.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Two frequencies closer than this (Hz) are the same mode.
pub const DEDUP_TOL_HZ: f64 = 1.0;
/// Frequencies closer than this (Hz) to a pump are dropped.
pub const PUMP_EXCLUSION_HZ: f64 = 1e6;

/// A mode `partner` reached from another mode through pumps `(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    pub partner: usize,
    pub p: usize,
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    /// Mode frequencies (Hz); index 0 is the signal.
    pub freqs: Vec<f64>,
    /// Ladder level each mode was first generated at.
    pub levels: Vec<usize>,
    /// Per mode: modes at Ω_p + Ω_q − ω (all ordered pump pairs).
    pub squeeze_partners: Vec<Vec<Pairing>>,
    /// Per mode: modes at ω + Ω_p − Ω_q with p ≠ q.
    pub convert_partners: Vec<Vec<Pairing>>,
    pub depth: usize,
    pub pumps: [f64; 2],
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn index_of(&self, f: f64) -> Option<usize> {
        self.freqs.iter().position(|&g| (g - f).abs() < DEDUP_TOL_HZ)
    }

    /// Frequencies of ladder level `l`.
    pub fn level(&self, l: usize) -> Vec<f64> {
        self.freqs
            .iter()
            .zip(&self.levels)
            .filter(|(_, &lv)| lv == l)
            .map(|(&f, _)| f)
            .collect()
    }
}

fn excluded(f: f64, pumps: [f64; 2]) -> bool {
    f <= 0.0 || pumps.iter().any(|&p| (f - p).abs() < PUMP_EXCLUSION_HZ)
}

fn children(f: f64, pumps: [f64; 2]) -> [f64; 5] {
    let [o1, o2] = pumps;
    [2.0 * o1 - f, 2.0 * o2 - f, o1 + o2 - f, f + (o2 - o1), f - (o2 - o1)]
}

/// Build the mode set around signal `omega0` up to ladder `depth`.
pub fn build_modes(omega0: f64, pumps: [f64; 2], depth: usize) -> Result<ModeSet> {
    if !(omega0 > 0.0) || !(pumps[0] > 0.0 && pumps[0] < pumps[1]) {
        return Err(Error::InvalidParameter(format!(
            "need omega0 > 0 and 0 < pump1 < pump2, got {omega0}, {pumps:?}"
        )));
    }
    let mut freqs = vec![omega0];
    let mut levels = vec![0];
    let known = |freqs: &[f64], f: f64| freqs.iter().any(|&g| (g - f).abs() < DEDUP_TOL_HZ);

    let idler = pumps[0] + pumps[1] - omega0;
    if !excluded(idler, pumps) && !known(&freqs, idler) {
        freqs.push(idler);
        levels.push(0);
    }
    for l in 1..=depth {
        let parents: Vec<f64> = freqs
            .iter()
            .zip(&levels)
            .filter(|(_, &lv)| lv == l - 1)
            .map(|(&f, _)| f)
            .collect();
        for f in parents {
            for c in children(f, pumps) {
                if !excluded(c, pumps) && !known(&freqs, c) {
                    freqs.push(c);
                    levels.push(l);
                }
            }
        }
    }

    let n = freqs.len();
    let find = |f: f64| freqs.iter().position(|&g| (g - f).abs() < DEDUP_TOL_HZ);
    let mut squeeze_partners = vec![Vec::new(); n];
    let mut convert_partners = vec![Vec::new(); n];
    for i in 0..n {
        for p in 0..2 {
            for q in 0..2 {
                if let Some(j) = find(pumps[p] + pumps[q] - freqs[i]) {
                    squeeze_partners[i].push(Pairing { partner: j, p, q });
                }
                if p != q {
                    if let Some(j) = find(freqs[i] + pumps[p] - pumps[q]) {
                        convert_partners[i].push(Pairing { partner: j, p, q });
                    }
                }
            }
        }
    }

    Ok(ModeSet {
        freqs,
        levels,
        squeeze_partners,
        convert_partners,
        depth,
        pumps,
    })
}

//! Loss rates along the device: constant, lumped at the output, and
//! photon-number dependent (saturating two-level-system loss).
//!
//! All rates are power decay rates per cell, so a uniform rate γ over `n`
//! cells gives a transmission of e^{−γn}.

use crate::error::{Error, Result};
use crate::units::{bose_einstein, db_to_linear, photon_temperature, power_rate_from_db};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossPoint {
    pub temp_k: f64,
    pub loss_db_total: f64,
}

/// Insertion loss versus temperature, interpolated log-linearly in T and
/// clamped to the end values outside the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LossTable(pub Vec<LossPoint>);

impl Default for LossTable {
    /// Two plateaus: −5 dB below 50 mK, −1 dB above 800 mK.
    fn default() -> Self {
        LossTable(vec![
            LossPoint { temp_k: 0.05, loss_db_total: -5.0 },
            LossPoint { temp_k: 0.8, loss_db_total: -1.0 },
        ])
    }
}

impl LossTable {
    pub fn validate(&self) -> Result<()> {
        let pts = &self.0;
        if pts.is_empty() {
            return Err(Error::InvalidParameter("loss table is empty".into()));
        }
        if pts.iter().any(|p| !(p.temp_k > 0.0) || !(p.loss_db_total <= 0.0)) {
            return Err(Error::InvalidParameter(
                "loss table needs temperatures > 0 and losses <= 0 dB".into(),
            ));
        }
        for w in pts.windows(2) {
            if !(w[1].temp_k > w[0].temp_k) {
                return Err(Error::InvalidParameter("loss table temperatures must increase".into()));
            }
            if w[1].loss_db_total < w[0].loss_db_total {
                return Err(Error::InvalidParameter(
                    "loss magnitude must not grow with temperature".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn range(&self) -> (f64, f64) {
        (self.0[0].temp_k, self.0[self.0.len() - 1].temp_k)
    }

    /// Interpolated loss (dB) or [`Error::TableRange`] outside the table.
    pub fn interpolate_strict(&self, t_k: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(t_k >= lo && t_k <= hi) {
            return Err(Error::TableRange { t_k, lo, hi });
        }
        Ok(self.interpolate(t_k))
    }

    /// Interpolated loss (dB), clamped outside the table.
    pub fn interpolate(&self, t_k: f64) -> f64 {
        let pts = &self.0;
        let (lo, hi) = self.range();
        if !(t_k > lo) {
            if t_k < lo {
                log::debug!("loss table clamped: T = {t_k:.4e} K below {lo} K");
            }
            return pts[0].loss_db_total;
        }
        if t_k >= hi {
            if t_k > hi {
                log::debug!("loss table clamped: T = {t_k:.4e} K above {hi} K");
            }
            return pts[pts.len() - 1].loss_db_total;
        }
        let i = pts.partition_point(|p| p.temp_k <= t_k);
        let (a, b) = (pts[i - 1], pts[i]);
        let s = (t_k.ln() - a.temp_k.ln()) / (b.temp_k.ln() - a.temp_k.ln());
        a.loss_db_total + s * (b.loss_db_total - a.loss_db_total)
    }

    /// Loss of the fully saturated (hottest) entry.
    pub fn saturated_db(&self) -> f64 {
        self.0[self.0.len() - 1].loss_db_total
    }
}

fn default_fridge_temp() -> f64 {
    0.03
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossProfile {
    Lossless,
    /// Uniform rate from a total loss (dB ≤ 0).
    Constant { total_db: f64 },
    /// Uniform distributed beamsplitter loss; same rate law as `Constant`.
    Distributed { total_db: f64 },
    /// Lossless propagation followed by one beamsplitter at the output.
    LumpedAtEnd { total_db: f64 },
    /// Photon-number dependent loss through an effective temperature.
    Saturable {
        #[serde(default)]
        table: LossTable,
        #[serde(default = "default_fridge_temp")]
        fridge_temp_k: f64,
    },
}

impl LossProfile {
    pub fn saturable_default() -> Self {
        LossProfile::Saturable {
            table: LossTable::default(),
            fridge_temp_k: default_fridge_temp(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossProfile::Lossless => "lossless",
            LossProfile::Constant { .. } => "constant",
            LossProfile::Distributed { .. } => "distributed",
            LossProfile::LumpedAtEnd { .. } => "lumped_at_end",
            LossProfile::Saturable { .. } => "saturable",
        }
    }

    /// Short label including the loss level, e.g. `distributed(-5dB)`.
    pub fn label(&self) -> String {
        match self {
            LossProfile::Constant { total_db }
            | LossProfile::Distributed { total_db }
            | LossProfile::LumpedAtEnd { total_db } => format!("{}({}dB)", self.name(), total_db),
            _ => self.name().to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LossProfile::Lossless => Ok(()),
            LossProfile::Constant { total_db }
            | LossProfile::Distributed { total_db }
            | LossProfile::LumpedAtEnd { total_db } => {
                if *total_db <= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("total loss must be <= 0 dB, got {total_db}")))
                }
            }
            LossProfile::Saturable { table, fridge_temp_k } => {
                if !(*fridge_temp_k >= 0.0) {
                    return Err(Error::InvalidParameter("fridge temperature must be >= 0".into()));
                }
                table.validate()
            }
        }
    }

    /// True when γ depends on the local photon number.
    pub fn is_photon_dependent(&self) -> bool {
        matches!(self, LossProfile::Saturable { .. })
    }

    /// Transmission η applied after the device (1 unless lumped).
    pub fn output_efficiency(&self) -> f64 {
        match self {
            LossProfile::LumpedAtEnd { total_db } => db_to_linear(*total_db),
            _ => 1.0,
        }
    }

    /// Pump power decay rate. Pumps saturate the loss, so the saturable
    /// profile uses its hottest table entry.
    pub fn pump_gamma(&self, n_cells: f64) -> f64 {
        match self {
            LossProfile::Lossless | LossProfile::LumpedAtEnd { .. } => 0.0,
            LossProfile::Constant { total_db } | LossProfile::Distributed { total_db } => {
                power_rate_from_db(*total_db, n_cells)
            }
            LossProfile::Saturable { table, .. } => power_rate_from_db(table.saturated_db(), n_cells),
        }
    }
}

/// Temperature whose Bose-Einstein occupation at `f_hz` is `n`.
pub fn photons_to_temperature(n: f64, f_hz: f64) -> f64 {
    if !(n > 0.0) {
        return 0.0;
    }
    photon_temperature(f_hz) / (1.0 / n).ln_1p()
}

/// Power loss rate (1/cell) at frequency `f_hz` for local photon number
/// `n_local`. Position enters only through `n_local`.
pub fn gamma_at(f_hz: f64, n_local: f64, profile: &LossProfile, n_cells: f64) -> f64 {
    match profile {
        LossProfile::Lossless | LossProfile::LumpedAtEnd { .. } => 0.0,
        LossProfile::Constant { total_db } | LossProfile::Distributed { total_db } => {
            power_rate_from_db(*total_db, n_cells)
        }
        LossProfile::Saturable { table, fridge_temp_k } => {
            let floor = bose_einstein(f_hz, *fridge_temp_k);
            let t_e = photons_to_temperature(n_local.max(0.0) + floor, f_hz);
            power_rate_from_db(table.interpolate(t_e), n_cells)
        }
    }
}

/// Amplitude attenuation (nepers per cell) for a total loss in dB; half the
/// power rate.
pub fn amplitude_attenuation_per_cell(total_db: f64, n_cells: f64) -> f64 {
    0.5 * power_rate_from_db(total_db, n_cells)
}

/// Beamsplitter with a vacuum ancilla applied to a quadrature variance
/// (vacuum = 1/2).
pub fn lumped_end_loss_variance(var: f64, total_db: f64) -> f64 {
    let eta = db_to_linear(total_db);
    eta * var + 0.5 * (1.0 - eta)
}

/// Beamsplitter applied to every mode of a correlation matrix laid out as
/// [[⟨cc⟩, ⟨cc†⟩], [⟨c†c⟩, ⟨c†c†⟩]].
pub fn lumped_end_loss_correlation(c: &DMatrix<Complex64>, total_db: f64) -> DMatrix<Complex64> {
    let eta = db_to_linear(total_db);
    let n = c.nrows() / 2;
    let mut out = c * Complex64::new(eta, 0.0);
    for i in 0..n {
        out[(i, n + i)] += Complex64::new(1.0 - eta, 0.0);
    }
    out
}

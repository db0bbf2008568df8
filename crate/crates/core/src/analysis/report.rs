//! End-to-end single- and two-mode pipelines with every intermediate stage kept.

use super::chain::{build_chain, eta_bounds, purity, squeezing_db, to_photon_basis_with_stderr, variance_change, Bounded, EtaInterval, PhotonVariance, DEFAULT_N_BAR};
use super::dataset::{Channel, PumpState, QuadratureDataset};
use super::twomode::{asymmetry_ratio, phase_grid, phase_sweep, Iq};
use super::variance::{estimate_variances, variance_stderr, VarianceEstimate};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisOptions {
    pub eta_meas: f64,
    #[serde(default)]
    pub eta_plus: f64,
    #[serde(default)]
    pub eta_minus: f64,
    #[serde(default = "default_n_bar")]
    pub n_bar: f64,
    #[serde(default = "default_grid")]
    pub phase_grid_points: usize,
}

fn default_n_bar() -> f64 {
    DEFAULT_N_BAR
}

fn default_grid() -> usize {
    360
}

impl AnalysisOptions {
    pub fn new(eta_meas: f64) -> Self {
        Self { eta_meas, eta_plus: 0.0, eta_minus: 0.0, n_bar: DEFAULT_N_BAR, phase_grid_points: 360 }
    }

    fn interval(&self) -> Option<EtaInterval> {
        (self.eta_plus > 0.0 || self.eta_minus > 0.0).then_some(EtaInterval {
            eta: self.eta_meas,
            plus: self.eta_plus,
            minus: self.eta_minus,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaBounds {
    pub x_min: Bounded,
    pub x_max: Bounded,
    pub db_sqz: Bounded,
    pub db_anti: Bounded,
}

/// Audit trail of the single-mode chain, from σ (mV) to dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleModeReport {
    pub n_on: usize,
    pub n_off: usize,
    pub sigma_off_min_mv: f64,
    pub sigma_off_max_mv: f64,
    pub sigma_sqz_min_mv: f64,
    pub sigma_sqz_max_mv: f64,
    pub squeeze_angle_rad: f64,
    pub var_sqz_min_mv2: f64,
    pub var_sqz_max_mv2: f64,
    pub var_off_mv2: f64,
    pub var_sqz_min_stderr_mv2: f64,
    pub var_sqz_max_stderr_mv2: f64,
    pub var_off_stderr_mv2: f64,
    pub x_sqz_min: f64,
    pub x_sqz_max: f64,
    pub x_off: f64,
    pub alpha_quanta_per_mv2: f64,
    pub eta_meas: f64,
    pub n_bar: f64,
    pub big_x_min: PhotonVariance,
    pub big_x_max: PhotonVariance,
    pub big_x_off: f64,
    pub db_sqz: f64,
    pub db_anti: f64,
    pub purity: f64,
    pub eta_bounds: Option<EtaBounds>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoModeReport {
    pub n_on: usize,
    pub n_off: usize,
    pub var_signal_off_mv2: f64,
    pub var_idler_off_mv2: f64,
    pub nu: f64,
    pub phi_opt_rad: f64,
    pub var_plus_mv2: f64,
    pub var_plus_off_mv2: f64,
    pub variance_change: f64,
    pub alpha_quanta_per_mv2: f64,
    pub eta_meas: f64,
    pub n_bar: f64,
    pub big_x_plus: PhotonVariance,
    pub big_x_off: f64,
    pub db_sqz: f64,
    pub phase_curve: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AnalysisReport {
    SingleMode(SingleModeReport),
    TwoMode(TwoModeReport),
}

fn cell_estimate(d: &QuadratureDataset, state: PumpState, channel: Channel) -> Result<VarianceEstimate> {
    let c = d.cell(state, channel);
    estimate_variances(&c.i, &c.q)
}

pub fn analyze_single_mode(d: &QuadratureDataset, opts: &AnalysisOptions) -> Result<SingleModeReport> {
    let on = cell_estimate(d, PumpState::On, Channel::Single)?;
    let off = cell_estimate(d, PumpState::Off, Channel::Single)?;
    let var_off = off.mean_variance();
    let chain = build_chain(var_off, opts.eta_meas, opts.n_bar)?;
    let big_x_min = to_photon_basis_with_stderr(on.var_min, on.stderr, &chain)?;
    let big_x_max = to_photon_basis_with_stderr(on.var_max, on.stderr_max, &chain)?;
    let big_x_off = chain.big_x_off();
    let db_sqz = squeezing_db(big_x_min.value, big_x_off)?;
    let db_anti = squeezing_db(big_x_max.value, big_x_off)?;
    let eta_bounds = match opts.interval() {
        Some(iv) => {
            let (x_min, db_sqz) = eta_bounds(on.var_min, &chain, iv)?;
            let (x_max, db_anti) = eta_bounds(on.var_max, &chain, iv)?;
            Some(EtaBounds { x_min, x_max, db_sqz, db_anti })
        }
        None => None,
    };
    Ok(SingleModeReport {
        n_on: on.n,
        n_off: off.n,
        sigma_off_min_mv: off.sigma_min(),
        sigma_off_max_mv: off.sigma_max(),
        sigma_sqz_min_mv: on.sigma_min(),
        sigma_sqz_max_mv: on.sigma_max(),
        squeeze_angle_rad: on.angle,
        var_sqz_min_mv2: on.var_min,
        var_sqz_max_mv2: on.var_max,
        var_off_mv2: var_off,
        var_sqz_min_stderr_mv2: on.stderr,
        var_sqz_max_stderr_mv2: on.stderr_max,
        var_off_stderr_mv2: variance_stderr(var_off, 2 * off.n),
        x_sqz_min: chain.to_beamsplitter_output(on.var_min),
        x_sqz_max: chain.to_beamsplitter_output(on.var_max),
        x_off: chain.x_off(),
        alpha_quanta_per_mv2: chain.alpha,
        eta_meas: chain.eta_meas,
        n_bar: chain.n_bar,
        big_x_min,
        big_x_max,
        big_x_off,
        db_sqz,
        db_anti,
        purity: purity(big_x_min.value / big_x_off, big_x_max.value / big_x_off)?,
        eta_bounds,
    })
}

pub fn analyze_two_mode(d: &QuadratureDataset, opts: &AnalysisOptions) -> Result<TwoModeReport> {
    let s_on = d.cell(PumpState::On, Channel::Signal);
    let i_on = d.cell(PumpState::On, Channel::Idler);
    let s_off = d.cell(PumpState::Off, Channel::Signal);
    let i_off = d.cell(PumpState::Off, Channel::Idler);
    if s_on.len() != i_on.len() {
        return Err(Error::LengthMismatch(s_on.len(), i_on.len()));
    }
    if s_off.len() != i_off.len() {
        return Err(Error::LengthMismatch(s_off.len(), i_off.len()));
    }
    let vs = estimate_variances(&s_off.i, &s_off.q)?.mean_variance();
    let vi = estimate_variances(&i_off.i, &i_off.q)?.mean_variance();
    estimate_variances(&s_on.i, &s_on.q)?;
    let nu = asymmetry_ratio(vs, vi)?;
    let grid = phase_grid(opts.phase_grid_points);
    let sweep = phase_sweep(Iq::new(&s_on.i, &s_on.q)?, Iq::new(&i_on.i, &i_on.q)?, nu, &grid)?;
    let off_sweep = phase_sweep(Iq::new(&s_off.i, &s_off.q)?, Iq::new(&i_off.i, &i_off.q)?, nu, &[sweep.phi_opt, sweep.phi_opt + 1.0, sweep.phi_opt + 2.0])?;
    let var_plus_off = off_sweep.curve[0].1;
    let chain = build_chain(var_plus_off, opts.eta_meas, opts.n_bar)?;
    let big_x_plus = to_photon_basis_with_stderr(sweep.var_opt, variance_stderr(sweep.var_opt, s_on.len()), &chain)?;
    Ok(TwoModeReport {
        n_on: s_on.len(),
        n_off: s_off.len(),
        var_signal_off_mv2: vs,
        var_idler_off_mv2: vi,
        nu,
        phi_opt_rad: sweep.phi_opt,
        var_plus_mv2: sweep.var_opt,
        var_plus_off_mv2: var_plus_off,
        variance_change: variance_change(sweep.var_opt, var_plus_off)?,
        alpha_quanta_per_mv2: chain.alpha,
        eta_meas: chain.eta_meas,
        n_bar: chain.n_bar,
        big_x_plus,
        big_x_off: chain.big_x_off(),
        db_sqz: squeezing_db(big_x_plus.value, chain.big_x_off())?,
        phase_curve: sweep.curve,
    })
}

/// Two-mode when the dataset carries signal and idler channels, single-mode otherwise.
pub fn analyze(d: &QuadratureDataset, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    if d.has_channel(Channel::Signal) && d.has_channel(Channel::Idler) {
        analyze_two_mode(d, opts).map(AnalysisReport::TwoMode)
    } else {
        analyze_single_mode(d, opts).map(AnalysisReport::SingleMode)
    }
}

//! Workbench configuration. Every key carries its unit; unknown keys are rejected.

use crate::error::CliError;
use jtwpa::analysis::AnalysisOptions;
use jtwpa::circuit::{CircuitParams, ResonatorBank};
use jtwpa::lossmodel::LossProfile;
use jtwpa::ode::OdeOptions;
use jtwpa::units::{FEMTO, GHZ, MHZ, MICRO, NANO, PICO};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorkbenchConfig {
    pub circuit: CircuitConfig,
    pub pumps: PumpConfig,
    pub loss: LossConfig,
    pub simulation: SimulationConfig,
    pub analysis: AnalysisConfig,
    pub calibration: CalibrationConfig,
    pub paths: PathsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorConfig {
    pub f_res_ghz: f64,
    pub c_res_pf: f64,
    pub c_couple_ff: f64,
    #[serde(default = "default_period")]
    pub insertion_period: u32,
}

fn default_period() -> u32 {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitConfig {
    pub n_cells: u32,
    pub c_ground_ff: f64,
    pub i_critical_ua: f64,
    pub c_junction_ff: f64,
    pub tan_delta: f64,
    pub resonators: Vec<ResonatorConfig>,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        let p = CircuitParams::dual_pump_reference();
        Self {
            n_cells: p.n_cells,
            c_ground_ff: p.c_ground / FEMTO,
            i_critical_ua: p.i_critical / MICRO,
            c_junction_ff: p.c_junction / FEMTO,
            tan_delta: p.tan_delta,
            resonators: p
                .resonators
                .iter()
                .map(|r| ResonatorConfig {
                    f_res_ghz: r.f_res / GHZ,
                    c_res_pf: r.c_res / PICO,
                    c_couple_ff: r.c_couple / FEMTO,
                    insertion_period: r.insertion_period,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpConfig {
    pub f_ghz: [f64; 2],
    pub p_nw: [f64; 2],
    /// β² per watt at the device input.
    pub c_p_per_w: [f64; 2],
    /// Input pump magnitudes; overrides the power calibration when set.
    pub beta: Option<[f64; 2]>,
}

impl Default for PumpConfig {
    fn default() -> Self {
        let p = CircuitParams::dual_pump_reference();
        Self { f_ghz: [p.pump_freqs[0] / GHZ, p.pump_freqs[1] / GHZ], p_nw: [1.0, 1.9], c_p_per_w: [3.4e9, 3.4e9], beta: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossConfig {
    pub profile: LossProfile,
    /// Pump insertion loss shared by every profile; absent means the profile decides.
    pub pump_loss_db: Option<f64>,
    /// Extra profiles compared by `sweep`; empty means only `profile`.
    pub sweep_profiles: Vec<LossProfile>,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { profile: LossProfile::Distributed { total_db: -1.0 }, pump_loss_db: Some(-1.0), sweep_profiles: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridGhz {
    pub start_ghz: f64,
    pub stop_ghz: f64,
    pub step_mhz: f64,
}

impl GridGhz {
    /// Hz values from start to stop inclusive.
    pub fn values_hz(&self) -> Result<Vec<f64>, CliError> {
        if !(self.step_mhz > 0.0) || !(self.stop_ghz >= self.start_ghz) {
            return Err(CliError::Config(format!("bad grid {self:?}")));
        }
        let n = ((self.stop_ghz - self.start_ghz) * GHZ / (self.step_mhz * MHZ) + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.start_ghz * GHZ + k as f64 * self.step_mhz * MHZ).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub depth: usize,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Signal frequency for single-point runs; absent means the pump centre.
    pub signal_ghz: Option<f64>,
    pub dispersion_grid: GridGhz,
    pub signal_grid: GridGhz,
    /// Degenerate phase grid for `pser`.
    pub pser_points: usize,
    /// Pump-2 powers for `sweep`.
    pub sweep_p2_nw: Vec<f64>,
    /// Signal frequencies for `sweep`; empty means `signal_ghz`.
    pub sweep_signal_ghz: Vec<f64>,
    pub threads: Option<usize>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            depth: 0,
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 2_000_000,
            signal_ghz: None,
            dispersion_grid: GridGhz { start_ghz: 1.0, stop_ghz: 12.0, step_mhz: 10.0 },
            signal_grid: GridGhz { start_ghz: 5.5, stop_ghz: 7.9, step_mhz: 50.0 },
            pser_points: 361,
            sweep_p2_nw: vec![1.9, 2.0, 2.1],
            sweep_signal_ghz: Vec::new(),
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub eta_meas: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub n_bar: f64,
    pub phase_grid_points: usize,
    pub frequency_ghz: f64,
    pub demod_bandwidth_hz: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            eta_meas: 0.06534,
            eta_plus: 0.00234,
            eta_minus: 0.00218,
            n_bar: jtwpa::analysis::DEFAULT_N_BAR,
            phase_grid_points: 360,
            frequency_ghz: 6.7,
            demod_bandwidth_hz: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    pub frequency_ghz: f64,
    /// SNTJ noise measurement bandwidth.
    pub sntj_bandwidth_hz: f64,
    /// Spectrum-analyser bandwidth for the system-noise measurement.
    pub bandwidth_hz: f64,
    pub xi: f64,
    /// Noise floor at room temperature.
    pub p_noise_rt_dbm: Option<f64>,
    /// Calibration tone: room-temperature output and source power at the scan reference.
    pub p_cal_rt_dbm: Option<f64>,
    pub p_cal_in_dbm: Option<f64>,
    /// Frequency tolerance for matching SNTJ and wQED records.
    pub match_tol_mhz: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            frequency_ghz: 6.7,
            sntj_bandwidth_hz: 1e6,
            bandwidth_hz: 100.0,
            xi: 1.0,
            p_noise_rt_dbm: None,
            p_cal_rt_dbm: None,
            p_cal_in_dbm: None,
            match_tol_mhz: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    /// Quadrature dataset: `.csv`, or raw `.f64` records with a `.f64.json` sidecar.
    pub dataset: Option<PathBuf>,
    pub sntj_csv: Option<PathBuf>,
    pub wqed_csv: Option<PathBuf>,
    /// JSON arrays of system-noise records for `cross-cal`.
    pub sntj_records: Option<PathBuf>,
    pub wqed_records: Option<PathBuf>,
}

impl WorkbenchConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.circuit_params()?;
        self.loss.profile.validate()?;
        for p in &self.loss.sweep_profiles {
            p.validate()?;
        }
        if let Some(db) = self.loss.pump_loss_db {
            if db > 0.0 {
                return Err(CliError::Config(format!("loss.pump_loss_db must be <= 0, got {db}")));
            }
        }
        if !(self.simulation.rtol > 0.0 && self.simulation.atol > 0.0) {
            return Err(CliError::Config("simulation tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn circuit_params(&self) -> Result<CircuitParams, CliError> {
        let c = &self.circuit;
        let mut f = self.pumps.f_ghz;
        f.sort_by(f64::total_cmp);
        let p = CircuitParams {
            n_cells: c.n_cells,
            c_ground: c.c_ground_ff * FEMTO,
            i_critical: c.i_critical_ua * MICRO,
            c_junction: c.c_junction_ff * FEMTO,
            tan_delta: c.tan_delta,
            resonators: c
                .resonators
                .iter()
                .map(|r| ResonatorBank {
                    f_res: r.f_res_ghz * GHZ,
                    c_res: r.c_res_pf * PICO,
                    c_couple: r.c_couple_ff * FEMTO,
                    insertion_period: r.insertion_period,
                })
                .collect(),
            pump_freqs: [f[0] * GHZ, f[1] * GHZ],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn ode_options(&self) -> OdeOptions {
        OdeOptions { rtol: self.simulation.rtol, atol: self.simulation.atol, max_steps: self.simulation.max_steps, ..OdeOptions::default() }
    }

    pub fn pump_powers_w(&self) -> [f64; 2] {
        [self.pumps.p_nw[0] * NANO, self.pumps.p_nw[1] * NANO]
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        let a = &self.analysis;
        AnalysisOptions { eta_meas: a.eta_meas, eta_plus: a.eta_plus, eta_minus: a.eta_minus, n_bar: a.n_bar, phase_grid_points: a.phase_grid_points }
    }
}

impl PathsConfig {
    /// Make relative paths relative to `dir` (the config file's directory).
    pub fn resolve(&mut self, dir: &Path) {
        for p in [&mut self.dataset, &mut self.sntj_csv, &mut self.wqed_csv, &mut self.sntj_records, &mut self.wqed_records].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }
}

use crate::config::WorkbenchConfig;
use crate::error::CliError;
use crate::output::{hash_file, InputHash, Output};
use jtwpa::analysis::{self, synth, AnalysisReport, DatasetMeta, QuadratureDataset};
use jtwpa::calibration::{self, SystemNoise};
use jtwpa::circuit::{dispersion_curve, CircuitParams};
use jtwpa::phasematch::mismatch_table;
use jtwpa::solver::{self, betas_for, solve_point, CoupledModes, Device, DeviceSpec, SweepSpec};
use jtwpa::units::{dbm_to_watts, linear_to_db, GHZ, MHZ, NANO};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};

fn signal_hz(cfg: &WorkbenchConfig, params: &CircuitParams) -> f64 {
    cfg.simulation.signal_ghz.map(|f| f * GHZ).unwrap_or_else(|| params.center_frequency())
}

fn device_spec(cfg: &WorkbenchConfig, params: &CircuitParams, f_hz: f64) -> Result<DeviceSpec, CliError> {
    let mut spec = DeviceSpec {
        signal_hz: f_hz,
        betas: [0.0; 2],
        depth: cfg.simulation.depth,
        loss: cfg.loss.profile.clone(),
        pump_loss_db: cfg.loss.pump_loss_db,
    };
    spec.betas = match cfg.pumps.beta {
        Some(b) => b,
        None => betas_for(params, spec.pump_gamma(params.length()), cfg.pump_powers_w(), cfg.pumps.c_p_per_w)?,
    };
    Ok(spec)
}

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
    p.as_deref().ok_or_else(|| CliError::Config(format!("paths.{key} is not set")))
}

fn open(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn dispersion(cfg: &WorkbenchConfig) -> Result<Output, CliError> {
    let params = cfg.circuit_params()?;
    let rows = dispersion_curve(&cfg.simulation.dispersion_grid.values_hz()?, &params);
    #[derive(Serialize)]
    struct Data<'a, R> {
        stopbands_ghz: Vec<(f64, f64)>,
        points: &'a [R],
    }
    let stopbands_ghz = params.stopbands().iter().map(|&(a, b)| (a / GHZ, b / GHZ)).collect();
    Output::table(&Data { stopbands_ghz, points: &rows }, &rows)
}

pub fn phasematch(cfg: &WorkbenchConfig) -> Result<Output, CliError> {
    let params = cfg.circuit_params()?;
    let spec = device_spec(cfg, &params, params.center_frequency())?;
    let rows = mismatch_table(&cfg.simulation.signal_grid.values_hz()?, spec.betas, &params);
    #[derive(Serialize)]
    struct Data<'a, R> {
        betas: [f64; 2],
        rows: &'a [R],
    }
    Output::table(&Data { betas: spec.betas, rows: &rows }, &rows)
}

#[derive(Serialize)]
struct GainRow {
    f_signal_ghz: f64,
    gain_db: f64,
    n_modes: usize,
    error: Option<String>,
}

pub fn gain(cfg: &WorkbenchConfig) -> Result<Output, CliError> {
    let params = cfg.circuit_params()?;
    let opts = cfg.ode_options();
    let freqs = cfg.simulation.signal_grid.values_hz()?;
    let base = device_spec(cfg, &params, params.center_frequency())?;
    let rows: Vec<GainRow> = freqs
        .par_iter()
        .map(|&f| {
            let spec = DeviceSpec { signal_hz: f, ..base.clone() };
            let r = Device::from_spec(&params, &spec).and_then(|dev| {
                let (snaps, _) = solver::propagate(&dev, &[dev.length()], false, &opts)?;
                Ok((solver::power_gain(&snaps[0].fundamental) * dev.output_efficiency(), dev.n_modes()))
            });
            match r {
                Ok((g, n)) => GainRow { f_signal_ghz: f / GHZ, gain_db: linear_to_db(g), n_modes: n, error: None },
                Err(e) => GainRow { f_signal_ghz: f / GHZ, gain_db: f64::NAN, n_modes: 0, error: Some(e.to_string()) },
            }
        })
        .collect();
    #[derive(Serialize)]
    struct Data<'a> {
        betas: [f64; 2],
        loss_model: String,
        rows: &'a [GainRow],
    }
    Output::table(&Data { betas: base.betas, loss_model: base.loss.label(), rows: &rows }, &rows)
}

pub fn pser(cfg: &WorkbenchConfig) -> Result<Output, CliError> {
    let params = cfg.circuit_params()?;
    let spec = device_spec(cfg, &params, params.center_frequency())?;
    let dev = Device::from_spec(&params, &spec)?;
    let n = cfg.simulation.pser_points.max(2);
    let thetas: Vec<f64> = (0..n).map(|k| std::f64::consts::TAU * k as f64 / (n - 1) as f64).collect();
    let r = solver::phase_sensitive_gain(&dev, &thetas, &cfg.ode_options())?;
    let eta = dev.output_efficiency();
    #[derive(Serialize)]
    struct Row {
        theta_rad: f64,
        gain_db: f64,
    }
    let rows: Vec<Row> = r.theta.iter().zip(&r.gain).map(|(&t, &g)| Row { theta_rad: t, gain_db: linear_to_db(g * eta) }).collect();
    #[derive(Serialize)]
    struct Data<'a> {
        f_signal_ghz: f64,
        betas: [f64; 2],
        gain_max_db: f64,
        gain_min_db: f64,
        pser_db: f64,
        curve: &'a [Row],
    }
    let data = Data {
        f_signal_ghz: spec.signal_hz / GHZ,
        betas: spec.betas,
        gain_max_db: linear_to_db(r.gain_max * eta),
        gain_min_db: linear_to_db(r.gain_min * eta),
        pser_db: r.pser_db,
        curve: &rows,
    };
    Output::table(&data, &rows)
}

pub fn squeeze(cfg: &WorkbenchConfig) -> Result<Output, CliError> {
    let params = cfg.circuit_params()?;
    let spec = device_spec(cfg, &params, signal_hz(cfg, &params))?;
    let (g, sq) = solve_point(&params, &spec, &cfg.ode_options())?;
    #[derive(Serialize)]
    struct Data {
        f_signal_ghz: f64,
        betas: [f64; 2],
        loss_model: String,
        depth: usize,
        gain_db: f64,
        theta_opt_rad: f64,
        var_min: f64,
        var_max: f64,
        squeeze_db: f64,
        antisqueeze_db: f64,
        purity: f64,
    }
    Output::json(&Data {
        f_signal_ghz: spec.signal_hz / GHZ,
        betas: spec.betas,
        loss_model: spec.loss.label(),
        depth: spec.depth,
        gain_db: linear_to_db(g),
        theta_opt_rad: sq.theta_opt,
        var_min: sq.var_min,
        var_max: sq.var_max,
        squeeze_db: sq.s_min_db,
        antisqueeze_db: sq.s_max_db,
        purity: sq.purity,
    })
}

/// Flat sweep row for CSV.
#[derive(Serialize)]
struct SweepCsvRow {
    loss_model: String,
    p2_nw: f64,
    f_signal_ghz: f64,
    beta1: f64,
    beta2: f64,
    gain_db: f64,
    squeeze_db: f64,
    antisqueeze_db: f64,
    purity: f64,
    error: String,
}

pub fn sweep(cfg: &WorkbenchConfig) -> Result<Output, CliError> {
    let params = cfg.circuit_params()?;
    let signals = if cfg.simulation.sweep_signal_ghz.is_empty() {
        vec![signal_hz(cfg, &params)]
    } else {
        cfg.simulation.sweep_signal_ghz.iter().map(|f| f * GHZ).collect()
    };
    let losses = if cfg.loss.sweep_profiles.is_empty() { vec![cfg.loss.profile.clone()] } else { cfg.loss.sweep_profiles.clone() };
    let spec = SweepSpec {
        p1_w: cfg.pumps.p_nw[0] * NANO,
        p2_w: cfg.simulation.sweep_p2_nw.iter().map(|p| p * NANO).collect(),
        signal_hz: signals,
        c_p: cfg.pumps.c_p_per_w,
        depth: cfg.simulation.depth,
        losses,
        pump_loss_db: cfg.loss.pump_loss_db,
    };
    let rows = solver::sweep(&params, &spec, &cfg.ode_options());
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} sweep points failed", rows.len());
    }
    let flat: Vec<SweepCsvRow> = rows
        .iter()
        .map(|r| SweepCsvRow {
            loss_model: r.loss_model.clone(),
            p2_nw: r.p2_nw,
            f_signal_ghz: r.f_signal_ghz,
            beta1: r.betas[0],
            beta2: r.betas[1],
            gain_db: r.gain_db,
            squeeze_db: r.squeeze_db,
            antisqueeze_db: r.antisqueeze_db,
            purity: r.purity,
            error: r.error.clone().unwrap_or_default(),
        })
        .collect();
    Output::table(&rows, &flat)
}

fn dataset_meta(cfg: &WorkbenchConfig) -> DatasetMeta {
    DatasetMeta { frequency_hz: cfg.analysis.frequency_ghz * GHZ, demod_bandwidth_hz: cfg.analysis.demod_bandwidth_hz }
}

fn load_dataset(cfg: &WorkbenchConfig) -> Result<(QuadratureDataset, Vec<InputHash>), CliError> {
    let path = required(&cfg.paths.dataset, "dataset")?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let d = QuadratureDataset::load_csv(path, dataset_meta(cfg))?;
        Ok((d, vec![hash_file(path)?]))
    } else {
        let d = QuadratureDataset::load_binary(path)?;
        let mut sidecar = path.as_os_str().to_owned();
        sidecar.push(".json");
        Ok((d, vec![hash_file(path)?, hash_file(Path::new(&sidecar))?]))
    }
}

pub fn analyze(cfg: &WorkbenchConfig) -> Result<Output, CliError> {
    let (d, inputs) = load_dataset(cfg)?;
    let report: AnalysisReport = analysis::analyze(&d, &cfg.analysis_options())?;
    Ok(Output::json(&report)?.with_inputs(inputs))
}

pub fn calibrate_sntj(cfg: &WorkbenchConfig) -> Result<Output, CliError> {
    let path = required(&cfg.paths.sntj_csv, "sntj_csv")?;
    let c = &cfg.calibration;
    let f = c.frequency_ghz * GHZ;
    let curve = calibration::read_sntj_csv(open(path)?)?;
    let fit = calibration::sntj_fit(&curve, f)?;
    let eta = calibration::efficiency_from_temperature(fit.t_noise, f);
    let system = SystemNoise { frequency_hz: f, g_sys_db: linear_to_db(fit.gain(c.sntj_bandwidth_hz)), t_sys_k: fit.t_noise, eta_meas: eta };
    #[derive(Serialize)]
    struct Data {
        fit: calibration::SntjFit,
        system: SystemNoise,
    }
    Ok(Output::json(&Data { fit, system })?.with_inputs(vec![hash_file(path)?]))
}

pub fn calibrate_wqed(cfg: &WorkbenchConfig) -> Result<Output, CliError> {
    let path = required(&cfg.paths.wqed_csv, "wqed_csv")?;
    let c = &cfg.calibration;
    let f = c.frequency_ghz * GHZ;
    let scan = calibration::read_wqed_csv(open(path)?)?;
    let fit = calibration::wqed_fit_2d(&scan, c.xi)?;
    let attenuation = fit.input_attenuation(f);
    let system = match (c.p_cal_rt_dbm, c.p_cal_in_dbm, c.p_noise_rt_dbm) {
        (Some(rt), Some(cal_in), Some(noise)) => {
            Some(calibration::system_noise(dbm_to_watts(rt), dbm_to_watts(cal_in) * attenuation, dbm_to_watts(noise), c.bandwidth_hz, f)?)
        }
        (None, None, None) => None,
        _ => return Err(CliError::Config("calibration.p_cal_rt_dbm, p_cal_in_dbm and p_noise_rt_dbm must be set together".into())),
    };
    #[derive(Serialize)]
    struct Data {
        fit: calibration::WqedFit,
        input_attenuation_db: f64,
        resonant_transmittance: Vec<(f64, f64)>,
        system: Option<SystemNoise>,
    }
    let data = Data { resonant_transmittance: fit.resonant_transmittance(), fit, input_attenuation_db: linear_to_db(attenuation), system };
    Ok(Output::json(&data)?.with_inputs(vec![hash_file(path)?]))
}

fn read_records(path: &Path) -> Result<Vec<SystemNoise>, CliError> {
    serde_json::from_reader(std::io::BufReader::new(open(path)?)).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn cross_cal(cfg: &WorkbenchConfig) -> Result<Output, CliError> {
    let sp = required(&cfg.paths.sntj_records, "sntj_records")?;
    let wp = required(&cfg.paths.wqed_records, "wqed_records")?;
    let points = calibration::cross_calibrate_sntj(&read_records(sp)?, &read_records(wp)?, cfg.calibration.match_tol_mhz * MHZ)?;
    Ok(Output::table(&points, &points)?.with_inputs(vec![hash_file(sp)?, hash_file(wp)?]))
}

#[derive(clap::Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value_t = SynthKind::SingleMode)]
    kind: SynthKind,
    /// Samples per (pump state, channel) cell.
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Pump-on minor and major variances and the pump-off variance (mV²).
    #[arg(long, default_value_t = 3.64065)]
    var_min: f64,
    #[arg(long, default_value_t = 13.1258)]
    var_max: f64,
    #[arg(long, default_value_t = 3.87448)]
    var_off: f64,
    /// Squeezing-ellipse angle (rad).
    #[arg(long, default_value_t = 0.6)]
    angle: f64,
    /// Two-mode squeezing parameter.
    #[arg(long, default_value_t = 0.6)]
    r: f64,
    /// Two-mode vacuum variance (mV²).
    #[arg(long, default_value_t = 1.0)]
    vac: f64,
    /// Idler phase offset (rad) and gain asymmetry.
    #[arg(long, default_value_t = 0.0)]
    phi0: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum SynthKind {
    SingleMode,
    TwoMode,
}

/// Write a dataset as CSV, or raw records plus sidecar for any other extension.
pub fn synth(cfg: &WorkbenchConfig, a: &SynthArgs, out: &Path) -> Result<(), CliError> {
    let meta = dataset_meta(cfg);
    let d = match a.kind {
        SynthKind::SingleMode => synth::single_mode_dataset(a.samples, a.var_min, a.var_max, a.var_off, a.angle, meta, a.seed),
        SynthKind::TwoMode => synth::two_mode_dataset(a.samples, a.r, a.vac, a.phi0, a.nu, meta, a.seed),
    };
    if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        d.write_csv(std::fs::File::create(out)?)?;
    } else {
        let (bytes, sidecar) = d.to_binary();
        std::fs::write(out, bytes)?;
        let mut side = out.as_os_str().to_owned();
        side.push(".json");
        let text = serde_json::to_string_pretty(&sidecar).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(Path::new(&side), text)?;
    }
    Ok(())
}

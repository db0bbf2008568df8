//! System-noise calibration from shot-noise and qubit references, plus chain bookkeeping.

mod deembed;
mod noise;
mod sntj;
mod wqed;

pub use deembed::{deembed_wavevector, unwrap_anchored, DeembedOptions, Deembedded, ThruModel, UNWRAP_LIMIT};
pub use noise::{
    cross_calibrate_sntj, efficiency_from_temperature, residual_thermal, system_noise, system_noise_db, CrossCalPoint,
    SystemNoise, ThermalStage,
};
pub use sntj::{read_sntj_csv, sntj_fit, sntj_model, source_temperature, SntjFit, MIN_POINTS};
pub use wqed::{
    drive_from_power, power_at_qubit, read_wqed_csv, synthetic_scan, wqed_fit_2d, wqed_transmission, ScanPoint, WqedFit,
    WqedParams,
};

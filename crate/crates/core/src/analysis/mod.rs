//! From digitizer voltages to calibrated squeezing at the device output.

mod chain;
mod dataset;
mod report;
pub mod synth;
mod twomode;
mod variance;

pub use chain::{
    build_chain, eta_bounds, purity, squeezing_db, to_photon_basis, to_photon_basis_with_stderr, variance_change,
    Bounded, ChainModel, EtaInterval, PhotonVariance, DEFAULT_N_BAR,
};
pub use dataset::{BinarySidecar, Cell, Channel, DatasetMeta, PumpState, QuadratureDataset, Sample};
pub use report::{analyze, analyze_single_mode, analyze_two_mode, AnalysisOptions, AnalysisReport, SingleModeReport, TwoModeReport};
pub use twomode::{asymmetry_ratio, collective_quadratures, phase_grid, phase_sweep, Collective, Iq, PhaseSweep};
pub use variance::{estimate_variances, sample_covariance, variance_stderr, VarianceEstimate, MIN_SAMPLES};

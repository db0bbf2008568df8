//! Dual-pump Josephson traveling-wave parametric amplifier: dispersion,
//! phase matching, coupled-mode propagation with loss, and the data analysis
//! and calibration chain used to report squeezing.

pub mod analysis;
pub mod calibration;
pub mod circuit;
pub mod error;
pub mod lossmodel;
pub mod lsq;
pub mod modeladder;
pub mod ode;
pub mod phasematch;
pub mod pump;
pub mod solver;
pub mod units;

pub use error::{Error, Result};

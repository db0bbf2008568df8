//! Physical constants and the unit conversions shared by every module.
//!
//! All frequencies handed between modules are ordinary frequencies in Hz;
//! the angular frequency is formed only where a formula needs it. Loss
//! rates are per unit cell and refer to power (the amplitude decays at half
//! the rate).

use std::f64::consts::{LN_10, PI};

/// Magnetic flux quantum h/2e (Wb).
pub const FLUX_QUANTUM: f64 = 2.067_833_848_461_929e-15;
/// Planck constant (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Elementary charge (C).
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;

pub const GHZ: f64 = 1e9;
pub const MHZ: f64 = 1e6;
pub const FEMTO: f64 = 1e-15;
pub const PICO: f64 = 1e-12;
pub const MICRO: f64 = 1e-6;
pub const NANO: f64 = 1e-9;

#[inline]
pub fn angular(f_hz: f64) -> f64 {
    2.0 * PI * f_hz
}

/// Power ratio in dB to linear.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * db_to_linear(dbm)
}

#[inline]
pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w / 1e-3)
}

/// Power-decay rate per cell that produces `total_db` (≤ 0) of insertion
/// loss over `n_cells`: e^{-γ n} = 10^{dB/10}.
#[inline]
pub fn power_rate_from_db(total_db: f64, n_cells: f64) -> f64 {
    -total_db * LN_10 / (10.0 * n_cells)
}

/// Inverse of [`power_rate_from_db`].
#[inline]
pub fn db_from_power_rate(gamma: f64, n_cells: f64) -> f64 {
    -10.0 * gamma * n_cells / LN_10
}

/// Amplitude attenuation in nepers for a power ratio in dB (|dB|·ln10/20).
#[inline]
pub fn nepers_from_db(db: f64) -> f64 {
    db.abs() * LN_10 / 20.0
}

/// Bose-Einstein occupation at frequency `f_hz` and temperature `t_k`.
/// Zero at zero temperature.
pub fn bose_einstein(f_hz: f64, t_k: f64) -> f64 {
    if t_k <= 0.0 {
        return 0.0;
    }
    let x = PLANCK * f_hz / (BOLTZMANN * t_k);
    1.0 / x.exp_m1()
}

/// hf/k_B in kelvin.
#[inline]
pub fn photon_temperature(f_hz: f64) -> f64 {
    PLANCK * f_hz / BOLTZMANN
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_round_trips() {
        for db in [-20.0, -5.0, 0.0, 3.0, 65.06] {
            assert!((linear_to_db(db_to_linear(db)) - db).abs() < 1e-12);
        }
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
        assert!((watts_to_dbm(1e-3)).abs() < 1e-12);
    }

    #[test]
    fn power_rate_gives_requested_attenuation() {
        let g = power_rate_from_db(-5.0, 3141.0);
        assert!(((-g * 3141.0).exp() - db_to_linear(-5.0)).abs() < 1e-14);
        assert!((db_from_power_rate(g, 3141.0) + 5.0).abs() < 1e-12);
        // Power rate is twice the amplitude attenuation constant.
        assert!((g * 3141.0 - 2.0 * nepers_from_db(-5.0)).abs() < 1e-12);
    }

    #[test]
    fn photon_temperature_at_6p7_ghz() {
        assert!((photon_temperature(6.7e9) - 0.3215).abs() < 1e-4);
        assert_eq!(bose_einstein(6.7e9, 0.0), 0.0);
    }
}

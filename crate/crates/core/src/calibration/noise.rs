//! Output-chain bookkeeping: system noise temperature, SNTJ/wQED cross-calibration and
//! residual thermal occupation.

use crate::error::{Error, Result};
use crate::units::{angular, bose_einstein, db_to_linear, dbm_to_watts, linear_to_db, BOLTZMANN, HBAR};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemNoise {
    pub frequency_hz: f64,
    pub g_sys_db: f64,
    pub t_sys_k: f64,
    pub eta_meas: f64,
}

/// η = ħω/(2 k_B T_sys).
pub fn efficiency_from_temperature(t_sys: f64, f_hz: f64) -> f64 {
    HBAR * angular(f_hz) / (2.0 * BOLTZMANN * t_sys)
}

/// G_sys = P_RT/P_MXC of the calibration tone, T_sys = P_noise/(G_sys k_B B).
pub fn system_noise(p_rt_cal: f64, p_mxc_cal: f64, p_noise_rt: f64, b_hz: f64, f_hz: f64) -> Result<SystemNoise> {
    for (name, v) in [("p_rt_cal", p_rt_cal), ("p_mxc_cal", p_mxc_cal), ("p_noise_rt", p_noise_rt), ("bandwidth", b_hz), ("frequency", f_hz)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    let g = p_rt_cal / p_mxc_cal;
    let t_sys = p_noise_rt / (g * BOLTZMANN * b_hz);
    let eta = efficiency_from_temperature(t_sys, f_hz);
    if eta > 1.0 {
        return Err(Error::QuantumBoundViolation { eta });
    }
    Ok(SystemNoise { frequency_hz: f_hz, g_sys_db: linear_to_db(g), t_sys_k: t_sys, eta_meas: eta })
}

/// Same as [`system_noise`] with the gain given in dB and the noise power in dBm.
pub fn system_noise_db(p_noise_dbm: f64, g_sys_db: f64, b_hz: f64, f_hz: f64) -> Result<SystemNoise> {
    system_noise(db_to_linear(g_sys_db), 1.0, dbm_to_watts(p_noise_dbm), b_hz, f_hz)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCalPoint {
    pub frequency_hz: f64,
    /// G_wQED − G_SNTJ, dB.
    pub delta_a_db: f64,
    pub t_sys_sntj_k: f64,
    pub t_sys_corrected_k: f64,
    pub t_sys_wqed_k: f64,
    pub eta_corrected: f64,
}

/// Rescale each SNTJ noise temperature by 10^{−ΔA/10}, ΔA being the gain difference to the
/// wQED record at the same frequency (within `tol_hz`).
pub fn cross_calibrate_sntj(sntj: &[SystemNoise], wqed: &[SystemNoise], tol_hz: f64) -> Result<Vec<CrossCalPoint>> {
    sntj.iter()
        .map(|s| {
            let w = wqed
                .iter()
                .filter(|w| (w.frequency_hz - s.frequency_hz).abs() <= tol_hz)
                .min_by(|a, b| (a.frequency_hz - s.frequency_hz).abs().total_cmp(&(b.frequency_hz - s.frequency_hz).abs()))
                .ok_or(Error::FrequencyMismatch { f_hz: s.frequency_hz })?;
            let delta_a_db = w.g_sys_db - s.g_sys_db;
            let t = s.t_sys_k * db_to_linear(-delta_a_db);
            Ok(CrossCalPoint {
                frequency_hz: s.frequency_hz,
                delta_a_db,
                t_sys_sntj_k: s.t_sys_k,
                t_sys_corrected_k: t,
                t_sys_wqed_k: w.t_sys_k,
                eta_corrected: efficiency_from_temperature(t, s.frequency_hz),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalStage {
    pub temp_k: f64,
    /// Power transmission from the stage to the device input, (0, 1].
    pub attenuation: f64,
}

/// n̄ = Σ A_i/(e^{hf/k_B T_i} − 1).
pub fn residual_thermal(stages: &[ThermalStage], f_hz: f64) -> Result<f64> {
    stages.iter().try_fold(0.0, |acc, s| {
        if !(s.attenuation > 0.0 && s.attenuation <= 1.0) {
            return Err(Error::InvalidParameter(format!("stage attenuation must lie in (0, 1], got {}", s.attenuation)));
        }
        if !(s.temp_k >= 0.0) {
            return Err(Error::InvalidParameter(format!("stage temperature must be ≥ 0, got {}", s.temp_k)));
        }
        Ok(acc + s.attenuation * bose_einstein(f_hz, s.temp_k))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_noise_chain() {
        let s = system_noise_db(-109.63, 65.06, 100.0, 6.7e9).unwrap();
        assert!((s.t_sys_k - 2.46).abs() < 0.01, "{s:?}");
        assert!((s.eta_meas - 0.0653).abs() < 3e-4, "{s:?}");
        assert!((s.g_sys_db - 65.06).abs() < 1e-12);
    }

    #[test]
    fn gain_and_bound() {
        let a = system_noise(1e3, 1.0, 1e-15, 1e2, 6e9).unwrap();
        let b = system_noise(2e3, 1.0, 1e-15, 1e2, 6e9).unwrap();
        assert!((b.t_sys_k - 0.5 * a.t_sys_k).abs() < 1e-15 * a.t_sys_k);
        let f = 6e9;
        let t_q = HBAR * angular(f) / (2.0 * BOLTZMANN);
        let p = t_q * BOLTZMANN * 1e2;
        let q = system_noise(1.0, 1.0, p, 1e2, f).unwrap();
        assert!((q.eta_meas - 1.0).abs() < 1e-12);
        assert_eq!(system_noise(1.0, 1.0, 0.5 * p, 1e2, f).unwrap_err().kind(), "QuantumBoundViolation");
        assert!(system_noise(0.0, 1.0, p, 1e2, f).is_err());
    }

    #[test]
    fn synthetic_chain_round_trip() {
        let (t, g, b, f) = (3.3, 1e6, 1e3, 6.6e9);
        let p_noise = t * g * BOLTZMANN * b;
        let s = system_noise(g * 1e-12, 1e-12, p_noise, b, f).unwrap();
        assert!((s.t_sys_k - t).abs() <= 1e-12 * t);
    }

    #[test]
    fn cross_calibration() {
        let w = SystemNoise { frequency_hz: 6.7e9, g_sys_db: 65.0, t_sys_k: 2.4, eta_meas: efficiency_from_temperature(2.4, 6.7e9) };
        let same = cross_calibrate_sntj(&[w], &[w], 1.0).unwrap();
        assert_eq!(same[0].t_sys_corrected_k, 2.4);
        let s = SystemNoise { g_sys_db: 62.0, t_sys_k: 4.8, ..w };
        let c = cross_calibrate_sntj(&[s], &[w], 1.0).unwrap()[0];
        assert!((c.delta_a_db - 3.0).abs() < 1e-12);
        assert!((c.t_sys_corrected_k / 2.4 - 1.0).abs() < 3e-3);
        let off = SystemNoise { frequency_hz: 6.8e9, ..s };
        assert_eq!(cross_calibrate_sntj(&[off], &[w], 1e6).unwrap_err().kind(), "FrequencyMismatch");
    }

    #[test]
    fn thermal_occupation() {
        assert_eq!(residual_thermal(&[ThermalStage { temp_k: 0.0, attenuation: 1.0 }], 6.7e9).unwrap(), 0.0);
        let n = residual_thermal(&[ThermalStage { temp_k: 0.0304, attenuation: 1.0 }], 6.7e9).unwrap();
        assert!((n - 2.5e-5).abs() < 0.1e-5, "{n}");
        assert!(residual_thermal(&[ThermalStage { temp_k: 0.1, attenuation: 1.5 }], 6.7e9).is_err());
    }

    proptest! {
        #[test]
        fn occupation_increases_with_temperature(t1 in 0.01f64..4.0, t2 in 0.01f64..300.0, dt in 1e-3f64..1.0, a in 1e-6f64..1.0) {
            let base = [ThermalStage { temp_k: t1, attenuation: 1.0 }, ThermalStage { temp_k: t2, attenuation: a }];
            let hot = [ThermalStage { temp_k: t1 + dt, attenuation: 1.0 }, ThermalStage { temp_k: t2, attenuation: a }];
            prop_assert!(residual_thermal(&hot, 6.7e9).unwrap() > residual_thermal(&base, 6.7e9).unwrap());
        }
    }
}

//! Classical pump amplitudes: lossy closed-form propagation with self- and
//! cross-phase modulation, and calibration of β from generator power.

use crate::circuit::{real_wavevector, CircuitParams};
use crate::error::{Error, Result};
use crate::lsq::{levenberg_marquardt, LmOptions};
use crate::phasematch::{check_betas, BETA_LIMIT};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpState {
    /// Pump frequency (Hz).
    pub freq: f64,
    /// Input amplitude β = I_p / 4I_c.
    pub beta0: Complex64,
    /// Power loss rate (1/cell).
    pub gamma: f64,
    /// Power-to-β² constant (1/W); only used by calibration.
    pub c_p: f64,
}

impl PumpState {
    pub fn new(freq: f64, beta0: f64, gamma: f64) -> Self {
        PumpState {
            freq,
            beta0: Complex64::new(beta0, 0.0),
            gamma,
            c_p: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_betas([self.beta0.norm(), 0.0])?;
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("pump gamma must be >= 0, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// (1 − e^{−γx})/γ with its γ → 0 limit.
pub fn effective_length(gamma: f64, x: f64) -> f64 {
    if gamma * x == 0.0 {
        x
    } else {
        -(-gamma * x).exp_m1() / gamma
    }
}

/// Both pumps with their linear wavevectors resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpPair {
    pub pumps: [PumpState; 2],
    /// Linear wavevectors at the pump frequencies (rad/cell).
    pub k: [f64; 2],
}

impl PumpPair {
    pub fn new(pumps: [PumpState; 2], params: &CircuitParams) -> Result<Self> {
        pumps[0].validate()?;
        pumps[1].validate()?;
        let k = [real_wavevector(pumps[0].freq, params)?, real_wavevector(pumps[1].freq, params)?];
        Ok(PumpPair { pumps, k })
    }

    /// Both pumps off at the circuit's pump frequencies.
    pub fn off(params: &CircuitParams) -> Result<Self> {
        let [f1, f2] = params.pump_freqs;
        Self::new([PumpState::new(f1, 0.0, 0.0), PumpState::new(f2, 0.0, 0.0)], params)
    }

    /// ∫₀ˣ |β_p|² dx'.
    pub fn intensity_integral(&self, p: usize, x: f64) -> f64 {
        let s = &self.pumps[p];
        s.beta0.norm_sqr() * effective_length(s.gamma, x)
    }

    /// |β_p(x)|.
    pub fn magnitude(&self, p: usize, x: f64) -> f64 {
        let s = &self.pumps[p];
        s.beta0.norm() * (-0.5 * s.gamma * x).exp()
    }

    /// Accumulated self- plus cross-phase of pump `p`.
    pub fn kerr_phase(&self, p: usize, x: f64) -> f64 {
        self.k[p] * (self.intensity_integral(p, x) + 2.0 * self.intensity_integral(1 - p, x))
    }

    pub fn at(&self, x: f64) -> [Complex64; 2] {
        [0, 1].map(|p| {
            let s = &self.pumps[p];
            s.beta0 * Complex64::new(-0.5 * s.gamma * x, self.kerr_phase(p, x)).exp()
        })
    }
}

/// Pump amplitudes at position `x` (cells).
pub fn propagate(pumps: &[PumpState; 2], params: &CircuitParams, x: f64) -> Result<[Complex64; 2]> {
    Ok(PumpPair::new(*pumps, params)?.at(x))
}

/// |β(0)|² from input power `p_w` (W) under the linear power law.
pub fn calibrate_beta_from_power(p_w: f64, gamma_p: f64, k_p: f64, z: f64, c_p: f64) -> Result<f64> {
    if !(p_w >= 0.0) || !(c_p > 0.0) {
        return Err(Error::InvalidParameter(format!("need P >= 0 and c_p > 0, got P = {p_w}, c_p = {c_p}")));
    }
    let b2 = c_p * p_w / (k_p * effective_length(gamma_p, z));
    if b2.sqrt() >= BETA_LIMIT {
        return Err(Error::Overdrive { beta: b2.sqrt() });
    }
    Ok(b2)
}

/// |β(0)|² from the measured single-pump phase shift `delta_phi` (rad).
pub fn beta_from_phase_shift(delta_phi: f64, gamma_p: f64, k_p: f64, z: f64) -> Result<f64> {
    if !(delta_phi >= 0.0) {
        return Err(Error::InvalidParameter(format!("phase shift must be >= 0, got {delta_phi}")));
    }
    Ok(delta_phi / (k_p * effective_length(gamma_p, z)))
}

#[derive(Debug, Clone, Serialize)]
pub struct CpFit {
    pub c_p: f64,
    pub rms_residual_db: f64,
    pub iterations: usize,
}

const SCAN_POINTS: usize = 32;

/// Least-squares `c_p` such that `model(c_p, P)` reproduces the measured
/// gain curve `(P, gain_db)`. `c_p0` is the starting guess.
pub fn fit_cp<M>(curve: &[(f64, f64)], c_p0: f64, mut model: M) -> Result<CpFit>
where
    M: FnMut(f64, f64) -> Result<f64>,
{
    if curve.is_empty() {
        return Err(Error::InsufficientData { got: 0, need: 1 });
    }
    if !(c_p0 > 0.0) {
        return Err(Error::InvalidParameter("c_p starting guess must be > 0".into()));
    }
    // Fit ln c_p to keep the constant positive.
    let mut residuals = |p: &[f64]| -> Result<DVector<f64>> {
        let c = p[0].exp();
        let mut r = DVector::zeros(curve.len());
        for (i, &(pw, g)) in curve.iter().enumerate() {
            r[i] = model(c, pw)? - g;
        }
        Ok(r)
    };
    // LM starts from the best point of a log grid over [c_p0/2, 2 c_p0].
    let mut start = c_p0.ln();
    let mut best = f64::INFINITY;
    for k in 0..=SCAN_POINTS {
        let lc = c_p0.ln() + std::f64::consts::LN_2 * (2.0 * k as f64 / SCAN_POINTS as f64 - 1.0);
        if let Ok(r) = residuals(&[lc]) {
            let cost = r.norm_squared();
            if cost < best {
                best = cost;
                start = lc;
            }
        }
    }
    let rep = levenberg_marquardt(residuals, None, &[start], &LmOptions::default())?;
    Ok(CpFit {
        c_p: rep.params[0].exp(),
        rms_residual_db: (2.0 * rep.cost / curve.len() as f64).sqrt(),
        iterations: rep.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate, OdeOptions};
    use proptest::prelude::*;

    fn params() -> CircuitParams {
        CircuitParams::dual_pump_reference().lossless()
    }

    fn pair(b1: f64, b2: f64, g1: f64, g2: f64) -> PumpPair {
        let p = params();
        PumpPair::new(
            [PumpState::new(p.pump_freqs[0], b1, g1), PumpState::new(p.pump_freqs[1], b2, g2)],
            &p,
        )
        .unwrap()
    }

    #[test]
    fn lossless_closed_form() {
        let pp = pair(0.1, 0.15, 0.0, 0.0);
        let x = 1234.5;
        let b = pp.at(x);
        for p in 0..2 {
            let q = 1 - p;
            let b0 = pp.pumps[p].beta0;
            let expected = b0
                * Complex64::new(0.0, pp.k[p] * x * (b0.norm_sqr() + 2.0 * pp.pumps[q].beta0.norm_sqr())).exp();
            assert!((b[p] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn intensity_decays_exactly() {
        let pp = pair(0.1, 0.2, 3e-4, 7e-5);
        for x in [0.0, 10.0, 1000.0, 3141.0] {
            let b = pp.at(x);
            assert!((b[0].norm_sqr() - 0.01 * (-3e-4 * x).exp()).abs() < 1e-16);
            assert!((b[1].norm_sqr() - 0.04 * (-7e-5 * x).exp()).abs() < 1e-16);
        }
    }

    #[test]
    fn matches_direct_ode_integration() {
        let pp = pair(0.12, 0.2, 4e-4, 1e-4);
        let (k1, k2) = (pp.k[0], pp.k[1]);
        let (g1, g2) = (pp.pumps[0].gamma, pp.pumps[1].gamma);
        let z = 3141.0;
        let opts = OdeOptions {
            rtol: 1e-12,
            atol: 1e-15,
            ..OdeOptions::default()
        };
        let (ys, _) = integrate(
            |_, y, dy| {
                let (a, b) = (y[0].norm_sqr(), y[1].norm_sqr());
                dy[0] = Complex64::new(-0.5 * g1, k1 * (a + 2.0 * b)) * y[0];
                dy[1] = Complex64::new(-0.5 * g2, k2 * (b + 2.0 * a)) * y[1];
                Ok(())
            },
            0.0,
            &[pp.pumps[0].beta0, pp.pumps[1].beta0],
            &[z],
            &opts,
        )
        .unwrap();
        let closed = pp.at(z);
        for p in 0..2 {
            assert!((ys[0][p] - closed[p]).norm() / closed[p].norm() < 1e-9);
        }
    }

    #[test]
    fn power_calibration_limits() {
        assert_eq!(calibrate_beta_from_power(0.0, 1e-4, 0.05, 3141.0, 3e9).unwrap(), 0.0);
        let lossless = calibrate_beta_from_power(1e-9, 0.0, 0.05, 3141.0, 3e9).unwrap();
        assert!((lossless - 3e9 * 1e-9 / (0.05 * 3141.0)).abs() < 1e-15);
        let tiny = calibrate_beta_from_power(1e-9, 1e-14, 0.05, 3141.0, 3e9).unwrap();
        assert!((tiny / lossless - 1.0).abs() < 1e-9);
        let a = calibrate_beta_from_power(1e-9, 2e-4, 0.05, 3141.0, 3e9).unwrap();
        let b = calibrate_beta_from_power(1e-9, 2e-4, 0.05, 3141.0, 6e9).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
        assert!(matches!(
            calibrate_beta_from_power(1e-6, 0.0, 0.05, 3141.0, 3e9),
            Err(Error::Overdrive { .. })
        ));
    }

    #[test]
    fn phase_shift_round_trip() {
        let p = params();
        let k1 = real_wavevector(p.pump_freqs[0], &p).unwrap();
        assert_eq!(beta_from_phase_shift(0.0, 0.0, k1, 3141.0).unwrap(), 0.0);
        let dphi = 2.7;
        let b2 = beta_from_phase_shift(dphi, 0.0, k1, 3141.0).unwrap();
        assert!((b2 - dphi / (k1 * 3141.0)).abs() < 1e-15);
        let pp = pair(b2.sqrt(), 0.0, 0.0, 0.0);
        let phase = pp.at(3141.0)[0].arg().rem_euclid(2.0 * std::f64::consts::PI);
        assert!((phase - dphi).abs() < 1e-9);
        // Lossy: the accumulated Kerr phase equals Δφ as well.
        let g = 2e-4;
        let b2 = beta_from_phase_shift(dphi, g, k1, 3141.0).unwrap();
        let pp = pair(b2.sqrt(), 0.0, g, 0.0);
        assert!((pp.kerr_phase(0, 3141.0) - dphi).abs() < 1e-9);
    }

    fn toy_gain(c_p: f64, p_w: f64) -> Result<f64> {
        // Monotone saturating toy law standing in for the solver.
        let b2 = c_p * p_w / (0.07 * 3141.0);
        Ok(10.0 * (1.0 + 400.0 * b2).log10())
    }

    #[test]
    fn fit_recovers_c_p() {
        let truth = 3.4e9;
        let curve: Vec<(f64, f64)> = (1..=8).map(|i| {
            let p = i as f64 * 0.25e-9;
            (p, toy_gain(truth, p).unwrap())
        }).collect();
        let fit = fit_cp(&curve, 1e9, toy_gain).unwrap();
        assert!((fit.c_p / truth - 1.0).abs() < 0.01);
        assert!(fit.rms_residual_db < 1e-8);
    }

    #[test]
    fn single_point_fit_is_exact() {
        let curve = [(1e-9, toy_gain(2e9, 1e-9).unwrap())];
        let fit = fit_cp(&curve, 5e8, toy_gain).unwrap();
        assert!(fit.rms_residual_db < 1e-9);
    }

    #[test]
    fn power_and_constant_trade_off() {
        for s in [0.5, 2.0, 7.0] {
            let a = toy_gain(3e9, 1e-9).unwrap();
            let b = toy_gain(3e9 / s, s * 1e-9).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn intensity_derivative_matches_loss(b1 in 0.01..0.24f64, g in 0.0..1e-3f64, x in 1.0..3000.0f64) {
            let pp = pair(b1, 0.1, g, 0.0);
            let h = 1e-3;
            let d = (pp.at(x + h)[0].norm_sqr() - pp.at(x - h)[0].norm_sqr()) / (2.0 * h);
            let expected = -g * pp.at(x)[0].norm_sqr();
            prop_assert!((d - expected).abs() <= 1e-6 * expected.abs().max(1e-12));
        }

        #[test]
        fn phase_is_nondecreasing(b1 in 0.01..0.24f64, b2 in 0.0..0.24f64, g in 0.0..1e-3f64) {
            let pp = pair(b1, b2, g, g * 0.5);
            let mut last = 0.0;
            for i in 0..=50 {
                let ph = pp.kerr_phase(0, i as f64 * 62.82);
                prop_assert!(ph >= last);
                last = ph;
            }
        }

        #[test]
        fn lossless_propagation_is_reversible(b1 in 0.0..0.24f64, b2 in 0.0..0.24f64, x in 0.0..3141.0f64) {
            let pp = pair(b1, b2, 0.0, 0.0);
            let b = pp.at(x);
            for p in 0..2 {
                let back = b[p] * Complex64::new(0.0, -pp.kerr_phase(p, x)).exp();
                prop_assert!((back - pp.pumps[p].beta0).norm() < 1e-14);
            }
        }
    }
}

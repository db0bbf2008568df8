//! Collective signal/idler quadratures and the relative-phase sweep.

use super::variance::sample_covariance;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// I/Q record pair for one channel.
#[derive(Debug, Clone, Copy)]
pub struct Iq<'a> {
    pub i: &'a [f64],
    pub q: &'a [f64],
}

impl<'a> Iq<'a> {
    pub fn new(i: &'a [f64], q: &'a [f64]) -> Result<Self> {
        if i.len() != q.len() {
            return Err(Error::LengthMismatch(i.len(), q.len()));
        }
        Ok(Self { i, q })
    }

    pub fn len(&self) -> usize {
        self.i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Collective {
    pub x_plus: Vec<f64>,
    pub x_minus: Vec<f64>,
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
}

/// ν = √(ΔV²_s,off / ΔV²_i,off): the idler scale that equalises the two vacuum levels.
pub fn asymmetry_ratio(var_signal_off: f64, var_idler_off: f64) -> Result<f64> {
    if !(var_signal_off > 0.0 && var_idler_off > 0.0) {
        return Err(Error::InvalidParameter("vacuum variances must be positive".into()));
    }
    Ok((var_signal_off / var_idler_off).sqrt())
}

/// X± = X_s ± ν R(φ) X_i and P± likewise, with R(φ) rotating the idler IQ plane.
pub fn collective_quadratures(signal: Iq, idler: Iq, phi_m: f64, nu: f64) -> Result<Collective> {
    if signal.len() != idler.len() {
        return Err(Error::LengthMismatch(signal.len(), idler.len()));
    }
    let (s, c) = phi_m.sin_cos();
    let mut out = Collective::default();
    for k in 0..signal.len() {
        let xi = nu * (c * idler.i[k] - s * idler.q[k]);
        let pi = nu * (s * idler.i[k] + c * idler.q[k]);
        out.x_plus.push(signal.i[k] + xi);
        out.x_minus.push(signal.i[k] - xi);
        out.p_plus.push(signal.q[k] + pi);
        out.p_minus.push(signal.q[k] - pi);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSweep {
    pub phi_opt: f64,
    pub var_opt: f64,
    /// (φ, Var X₊(φ)) on the grid.
    pub curve: Vec<(f64, f64)>,
}

/// Second moments needed for Var X₊(φ) in closed form.
#[derive(Debug, Clone, Copy)]
struct Moments {
    v_xs: f64,
    v_xi: f64,
    v_pi: f64,
    c_xi_pi: f64,
    c_xs_xi: f64,
    c_xs_pi: f64,
}

impl Moments {
    fn new(signal: Iq, idler: Iq) -> Result<Self> {
        let (v_xs, _, c_xs_xi) = sample_covariance(signal.i, idler.i)?;
        let (v_xi, v_pi, c_xi_pi) = sample_covariance(idler.i, idler.q)?;
        let (_, _, c_xs_pi) = sample_covariance(signal.i, idler.q)?;
        Ok(Self { v_xs, v_xi, v_pi, c_xi_pi, c_xs_xi, c_xs_pi })
    }

    fn var_x_plus(&self, phi: f64, nu: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        self.v_xs
            + nu * nu * (c * c * self.v_xi + s * s * self.v_pi - 2.0 * c * s * self.c_xi_pi)
            + 2.0 * nu * (c * self.c_xs_xi - s * self.c_xs_pi)
    }
}

/// Uniform grid of `n` points on [0, 2π).
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// Var X₊ over `grid`, minimum refined by a parabola through the best grid point and its
/// periodic neighbours. The grid must be uniform on [0, 2π).
pub fn phase_sweep(signal: Iq, idler: Iq, nu: f64, grid: &[f64]) -> Result<PhaseSweep> {
    if signal.len() != idler.len() {
        return Err(Error::LengthMismatch(signal.len(), idler.len()));
    }
    if grid.len() < 3 {
        return Err(Error::InvalidParameter("phase grid needs at least 3 points".into()));
    }
    let m = Moments::new(signal, idler)?;
    let curve: Vec<(f64, f64)> = grid.iter().map(|&p| (p, m.var_x_plus(p, nu))).collect();
    let n = curve.len();
    let k = (0..n).min_by(|&a, &b| curve[a].1.total_cmp(&curve[b].1)).unwrap();
    let (y0, y1, y2) = (curve[(k + n - 1) % n].1, curve[k].1, curve[(k + 1) % n].1);
    let h = 2.0 * PI / n as f64;
    let den = y0 - 2.0 * y1 + y2;
    let shift = if den > 0.0 { (0.5 * (y0 - y2) / den).clamp(-1.0, 1.0) } else { 0.0 };
    let phi_opt = (curve[k].0 + shift * h).rem_euclid(2.0 * PI);
    Ok(PhaseSweep { phi_opt, var_opt: m.var_x_plus(phi_opt, nu), curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::synth;

    fn var(v: &[f64]) -> f64 {
        sample_covariance(v, v).unwrap().0
    }

    fn angle_diff(a: f64, b: f64) -> f64 {
        (a - b + PI).rem_euclid(2.0 * PI) - PI
    }

    #[test]
    fn identity_combination() {
        let (si, sq) = synth::gaussian_iq(10, 1.0, 1.0, 0.0, 1);
        let (ii, iq) = synth::gaussian_iq(10, 1.0, 1.0, 0.0, 2);
        let c = collective_quadratures(Iq::new(&si, &sq).unwrap(), Iq::new(&ii, &iq).unwrap(), 0.0, 1.0).unwrap();
        for k in 0..10 {
            assert_eq!(c.x_plus[k], si[k] + ii[k]);
            assert_eq!(c.x_minus[k], si[k] - ii[k]);
            assert_eq!(c.p_minus[k], sq[k] - iq[k]);
        }
        assert!(collective_quadratures(Iq::new(&si, &sq).unwrap(), Iq::new(&ii[..5], &iq[..5]).unwrap(), 0.0, 1.0).is_err());
    }

    #[test]
    fn independent_vacua_add() {
        let n = 50_000;
        let (si, sq) = synth::gaussian_iq(n, 0.5, 0.5, 0.0, 3);
        let (ii, iq) = synth::gaussian_iq(n, 0.8, 0.8, 0.0, 4);
        let c = collective_quadratures(Iq::new(&si, &sq).unwrap(), Iq::new(&ii, &iq).unwrap(), 0.9, 1.0).unwrap();
        let expect = var(&si) + var(&ii);
        let se = expect * (2.0 / (n as f64 - 1.0)).sqrt();
        assert!((var(&c.x_plus) - expect).abs() < 3.0 * se);
    }

    #[test]
    fn asymmetry_ratio_value() {
        assert!((asymmetry_ratio(1.119, 1.424).unwrap() - 0.8865).abs() < 1e-4);
        assert!(asymmetry_ratio(0.0, 1.0).is_err());
    }

    #[test]
    fn sweep_recovers_pre_rotation() {
        let grid = phase_grid(360);
        for (seed, phi0) in [(5u64, 0.17), (6, 2.5), (7, 5.9)] {
            let t = synth::two_mode_squeezed(20_000, 0.8, 1.0, phi0, 0.8865, seed);
            let ps = phase_sweep(Iq::new(&t.signal_i, &t.signal_q).unwrap(), Iq::new(&t.idler_i, &t.idler_q).unwrap(), 0.8865, &grid).unwrap();
            assert!(angle_diff(ps.phi_opt, phi0).abs() < 2.0 * PI / 360.0, "φ0 {phi0} got {}", ps.phi_opt);
        }
    }

    #[test]
    fn perfect_correlation_without_rotation() {
        let (si, sq) = synth::whitened_iq(2000, 1.0, 1.0, 0.0, 8);
        let ii: Vec<f64> = si.iter().map(|x| -x).collect();
        let ps = phase_sweep(Iq::new(&si, &sq).unwrap(), Iq::new(&ii, &sq).unwrap(), 1.0, &phase_grid(360)).unwrap();
        assert!(angle_diff(ps.phi_opt, 0.0).abs() < 1e-9, "{}", ps.phi_opt);
        assert!(ps.var_opt.abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_samples_and_is_periodic() {
        let t = synth::two_mode_squeezed(5000, 0.5, 1.0, 1.0, 1.2, 9);
        let (s, i) = (Iq::new(&t.signal_i, &t.signal_q).unwrap(), Iq::new(&t.idler_i, &t.idler_q).unwrap());
        let grid = phase_grid(72);
        let ps = phase_sweep(s, i, 1.2, &grid).unwrap();
        for &(phi, v) in ps.curve.iter().step_by(9) {
            let c = collective_quadratures(s, i, phi, 1.2).unwrap();
            assert!((var(&c.x_plus) - v).abs() < 1e-10 * v);
        }
        let m = Moments::new(s, i).unwrap();
        for k in 0..72 {
            let phi = grid[k];
            assert!((m.var_x_plus(phi, 1.2) - m.var_x_plus(phi + 2.0 * PI, 1.2)).abs() < 1e-9);
            let next = ps.curve[(k + 1) % 72].1;
            assert!((next - ps.curve[k].1).abs() < 0.2 * ps.curve.iter().map(|c| c.1).fold(0.0, f64::max));
        }
    }
}

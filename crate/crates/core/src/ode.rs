//! Adaptive Dormand-Prince 5(4) integrator over complex state vectors.

use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on the step size; `f64::INFINITY` for none.
    pub max_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 2_000_000,
            max_step: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Fifth minus fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        *o = y[i] + acc * h;
    }
}

fn error_norm(err: &[Complex64], y0: &[Complex64], y1: &[Complex64], opts: &OdeOptions) -> f64 {
    let n = err.len().max(1) as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = opts.atol + opts.rtol * a.norm().max(b.norm());
            (e.norm() / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

/// Integrate `dy/dx = f(x, y)` from `x0`, returning the state at every
/// checkpoint (which must be sorted and `>= x0`). Steps are shortened to land
/// exactly on each checkpoint.
pub fn integrate<F>(
    mut f: F,
    x0: f64,
    y0: &[Complex64],
    checkpoints: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<Vec<Complex64>>, OdeStats)>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]) -> Result<()>,
{
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(checkpoints.len());
    if checkpoints.windows(2).any(|w| w[1] < w[0]) || checkpoints.first().is_some_and(|&c| c < x0) {
        return Err(Error::InvalidParameter("checkpoints must be sorted and >= x0".into()));
    }
    let x_end = match checkpoints.last() {
        Some(&x) => x,
        None => return Ok((out, stats)),
    };

    let mut x = x0;
    let mut y = y0.to_vec();
    let zero = Complex64::new(0.0, 0.0);
    let mut k: Vec<Vec<Complex64>> = vec![vec![zero; n]; 7];
    let mut tmp = vec![zero; n];
    let mut ynew = vec![zero; n];
    let mut err = vec![zero; n];

    f(x, &y, &mut k[0])?;
    stats.evaluations += 1;

    // Initial step from the scale of y and f(y).
    let span = x_end - x0;
    let mut h = {
        let d0 = error_norm(&y, &y, &y, opts);
        let d1 = error_norm(&k[0], &y, &y, opts);
        let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        guess.min(span.max(f64::MIN_POSITIVE)).min(opts.max_step)
    };
    let mut err_prev: f64 = 1e-4;

    let mut next = 0;
    while next < checkpoints.len() && checkpoints[next] <= x {
        out.push(y.clone());
        next += 1;
    }

    while next < checkpoints.len() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Integration {
                x,
                reason: format!("step budget of {} exhausted", opts.max_steps),
            });
        }
        let target = checkpoints[next];
        let mut hstep = h.min(opts.max_step);
        let landing = x + hstep >= target - 1e-12 * target.abs().max(1.0);
        if landing {
            hstep = target - x;
        }
        if !(hstep > 0.0) || x + hstep == x {
            return Err(Error::Integration {
                x,
                reason: "step size underflow".into(),
            });
        }

        let (k0, rest) = k.split_at_mut(1);
        let k0 = &k0[0];
        combine(&mut tmp, &y, hstep, &[(A21, k0)]);
        f(x + C2 * hstep, &tmp, &mut rest[0])?;
        combine(&mut tmp, &y, hstep, &[(A31, k0), (A32, &rest[0])]);
        f(x + C3 * hstep, &tmp, &mut rest[1])?;
        combine(&mut tmp, &y, hstep, &[(A41, k0), (A42, &rest[0]), (A43, &rest[1])]);
        f(x + C4 * hstep, &tmp, &mut rest[2])?;
        combine(
            &mut tmp,
            &y,
            hstep,
            &[(A51, k0), (A52, &rest[0]), (A53, &rest[1]), (A54, &rest[2])],
        );
        f(x + C5 * hstep, &tmp, &mut rest[3])?;
        combine(
            &mut tmp,
            &y,
            hstep,
            &[(A61, k0), (A62, &rest[0]), (A63, &rest[1]), (A64, &rest[2]), (A65, &rest[3])],
        );
        f(x + hstep, &tmp, &mut rest[4])?;
        combine(
            &mut ynew,
            &y,
            hstep,
            &[(A71, k0), (A73, &rest[1]), (A74, &rest[2]), (A75, &rest[3]), (A76, &rest[4])],
        );
        f(x + hstep, &ynew, &mut rest[5])?;
        stats.evaluations += 6;

        for i in 0..n {
            err[i] = (k0[i] * E1
                + rest[1][i] * E3
                + rest[2][i] * E4
                + rest[3][i] * E5
                + rest[4][i] * E6
                + rest[5][i] * E7)
                * hstep;
        }
        let e = error_norm(&err, &y, &ynew, opts);
        if !e.is_finite() {
            return Err(Error::Integration {
                x,
                reason: "non-finite state".into(),
            });
        }

        if e <= 1.0 {
            stats.accepted += 1;
            x = if landing { target } else { x + hstep };
            std::mem::swap(&mut y, &mut ynew);
            k.swap(0, 6);
            let e = e.max(1e-10);
            let fac = (0.9 * e.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0)).clamp(0.2, 10.0);
            err_prev = e;
            // A short landing step says nothing about the natural step size.
            h = if landing { h.max(hstep * fac) } else { hstep * fac };
            while next < checkpoints.len() && checkpoints[next] <= x {
                out.push(y.clone());
                next += 1;
            }
        } else {
            stats.rejected += 1;
            h = hstep * (0.9 * e.powf(-0.2)).max(0.2);
        }
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let y0 = [Complex64::new(1.0, 0.0)];
        let (ys, stats) = integrate(
            |_, y, dy| {
                dy[0] = -y[0];
                Ok(())
            },
            0.0,
            &y0,
            &[1.0, 5.0],
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((ys[0][0].re - (-1.0f64).exp()).abs() < 1e-10);
        assert!((ys[1][0].re - (-5.0f64).exp()).abs() < 1e-11);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn complex_rotation_keeps_modulus() {
        let y0 = [Complex64::new(0.6, 0.8)];
        let (ys, _) = integrate(
            |_, y, dy| {
                dy[0] = Complex64::new(0.0, 3.0) * y[0];
                Ok(())
            },
            0.0,
            &y0,
            &[10.0],
            &OdeOptions::default(),
        )
        .unwrap();
        let exact = y0[0] * Complex64::new(0.0, 30.0).exp();
        assert!((ys[0][0] - exact).norm() < 1e-8);
    }

    #[test]
    fn checkpoints_hit_exactly_including_start() {
        let y0 = [Complex64::new(0.0, 0.0)];
        let cps: Vec<f64> = (0..=100).map(|i| i as f64 * 0.01).collect();
        let (ys, _) = integrate(
            |x, _, dy| {
                dy[0] = Complex64::new(2.0 * x, 0.0);
                Ok(())
            },
            0.0,
            &y0,
            &cps,
            &OdeOptions::default(),
        )
        .unwrap();
        assert_eq!(ys.len(), cps.len());
        for (x, y) in cps.iter().zip(&ys) {
            assert!((y[0].re - x * x).abs() < 1e-12);
        }
    }

    #[test]
    fn unsorted_checkpoints_rejected() {
        let r = integrate(|_, _, _| Ok(()), 0.0, &[Complex64::new(1.0, 0.0)], &[2.0, 1.0], &OdeOptions::default());
        assert!(r.is_err());
    }

    #[test]
    fn step_budget_reports_integration_error() {
        let opts = OdeOptions {
            max_steps: 3,
            ..OdeOptions::default()
        };
        let r = integrate(
            |_, y, dy| {
                dy[0] = Complex64::new(0.0, 50.0) * y[0];
                Ok(())
            },
            0.0,
            &[Complex64::new(1.0, 0.0)],
            &[100.0],
            &opts,
        );
        assert!(matches!(r, Err(Error::Integration { .. })));
    }
}

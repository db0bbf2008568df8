//! Seeded synthetic quadrature generators.

use super::dataset::{Channel, DatasetMeta, PumpState, QuadratureDataset, Sample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn normals(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn rotate(a: &[f64], b: &[f64], angle: f64) -> (Vec<f64>, Vec<f64>) {
    let (s, c) = angle.sin_cos();
    a.iter().zip(b).map(|(&x, &y)| (c * x - s * y, s * x + c * y)).unzip()
}

/// Zero-mean Gaussian cloud with principal variances `var_major` along `angle` and
/// `var_minor` across it.
pub fn gaussian_iq(n: usize, var_major: f64, var_minor: f64, angle: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = normals(n, &mut rng).into_iter().map(|x| x * var_major.sqrt()).collect();
    let b: Vec<f64> = normals(n, &mut rng).into_iter().map(|x| x * var_minor.sqrt()).collect();
    rotate(&a, &b, angle)
}

/// Like [`gaussian_iq`] but whitened so the sample covariance is exact: zero mean, and
/// principal variances exactly `var_min` and `var_max` (major axis along `angle`).
pub fn whitened_iq(n: usize, var_min: f64, var_max: f64, angle: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = normals(n, &mut rng);
    let mut b = normals(n, &mut rng);
    let d = (n - 1) as f64;
    for v in [&mut a, &mut b] {
        let m = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= m);
    }
    // Gram-Schmidt on the two columns, then unit sample variance.
    let aa = a.iter().map(|x| x * x).sum::<f64>();
    let ab = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>();
    b.iter_mut().zip(&a).for_each(|(y, x)| *y -= ab / aa * x);
    let bb = b.iter().map(|x| x * x).sum::<f64>();
    let (sa, sb) = ((d * var_max / aa).sqrt(), (d * var_min / bb).sqrt());
    a.iter_mut().for_each(|x| *x *= sa);
    b.iter_mut().for_each(|x| *x *= sb);
    rotate(&a, &b, angle)
}

/// Signal and idler quadratures of a two-mode squeezed state.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeSamples {
    pub signal_i: Vec<f64>,
    pub signal_q: Vec<f64>,
    pub idler_i: Vec<f64>,
    pub idler_q: Vec<f64>,
}

/// Two-mode squeezed vacuum with squeezing parameter `r` and per-quadrature vacuum
/// variance `vac`. X_s + X_i and P_s − P_i carry variance 2·vac·e^{−2r}. The idler is
/// stored rotated by −φ₀ and scaled by 1/ν, so the collective quadratures recover the
/// ideal state at (φ₀, ν).
pub fn two_mode_squeezed(n: usize, r: f64, vac: f64, phi0: f64, nu: f64, seed: u64) -> TwoModeSamples {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = vac.sqrt();
    let u: Vec<Vec<f64>> = (0..4).map(|_| normals(n, &mut rng)).collect();
    let (em, ep) = ((-r).exp() * s, r.exp() * s);
    let mut out = TwoModeSamples {
        signal_i: Vec::with_capacity(n),
        signal_q: Vec::with_capacity(n),
        idler_i: Vec::with_capacity(n),
        idler_q: Vec::with_capacity(n),
    };
    let mut xi = Vec::with_capacity(n);
    let mut pi = Vec::with_capacity(n);
    for k in 0..n {
        out.signal_i.push((em * u[0][k] + ep * u[1][k]) * std::f64::consts::FRAC_1_SQRT_2);
        xi.push((em * u[0][k] - ep * u[1][k]) * std::f64::consts::FRAC_1_SQRT_2);
        out.signal_q.push((ep * u[2][k] + em * u[3][k]) * std::f64::consts::FRAC_1_SQRT_2);
        pi.push((ep * u[2][k] - em * u[3][k]) * std::f64::consts::FRAC_1_SQRT_2);
    }
    let (ri, rq) = rotate(&xi, &pi, -phi0);
    out.idler_i = ri.into_iter().map(|x| x / nu).collect();
    out.idler_q = rq.into_iter().map(|x| x / nu).collect();
    out
}

/// Single-mode dataset with exact (whitened) cell moments.
pub fn single_mode_dataset(
    n_per_cell: usize,
    var_min: f64,
    var_max: f64,
    var_off: f64,
    angle: f64,
    meta: DatasetMeta,
    seed: u64,
) -> QuadratureDataset {
    let (i_on, q_on) = whitened_iq(n_per_cell, var_min, var_max, angle, seed);
    let (i_off, q_off) = whitened_iq(n_per_cell, var_off, var_off, 0.0, seed.wrapping_add(1));
    let mut samples = Vec::with_capacity(2 * n_per_cell);
    // Interleave on/off records the way a pulsed acquisition produces them.
    for k in 0..n_per_cell {
        samples.push(Sample { i_mv: i_on[k], q_mv: q_on[k], pump_state: PumpState::On, channel: Channel::Single });
        samples.push(Sample { i_mv: i_off[k], q_mv: q_off[k], pump_state: PumpState::Off, channel: Channel::Single });
    }
    QuadratureDataset { samples, meta }
}

/// Two-mode dataset: squeezed pairs (pump on) and independent vacua (pump off) on the
/// signal and idler channels.
pub fn two_mode_dataset(n: usize, r: f64, vac: f64, phi0: f64, nu: f64, meta: DatasetMeta, seed: u64) -> QuadratureDataset {
    let on = two_mode_squeezed(n, r, vac, phi0, nu, seed);
    let off = two_mode_squeezed(n, 0.0, vac, 0.0, nu, seed.wrapping_add(1));
    let mut samples = Vec::with_capacity(4 * n);
    for (set, state) in [(&on, PumpState::On), (&off, PumpState::Off)] {
        for k in 0..n {
            samples.push(Sample { i_mv: set.signal_i[k], q_mv: set.signal_q[k], pump_state: state, channel: Channel::Signal });
            samples.push(Sample { i_mv: set.idler_i[k], q_mv: set.idler_q[k], pump_state: state, channel: Channel::Idler });
        }
    }
    QuadratureDataset { samples, meta }
}

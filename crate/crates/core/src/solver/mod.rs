//! Linearized input-output propagation along the device: first moments
//! (gain, phase-sensitive gain) through the fundamental matrix and second
//! moments (squeezing, purity) through the correlation matrix.
//!
//! With c⃗ = [c_1..c_n, c_1†..c_n†] the field obeys dc⃗/dx = M c⃗ + noise,
//! M = iKH − Γ/2, and C = ⟨c⃗ c⃗ᵀ⟩ obeys dC/dx = MC + CMᵀ + [[0, Γ], [0, 0]].

mod device;
mod squeeze;
mod sweep;

pub use device::{Coupling, CouplingKind, Device, DeviceSpec};
pub use squeeze::{squeeze, squeeze_variance, SqueezeResult};
pub use sweep::{betas_for, solve_point, sweep, SweepRow, SweepSpec};

use crate::error::{Error, Result};
use crate::lossmodel::lumped_end_loss_correlation;
use crate::ode::{integrate, OdeOptions, OdeStats};
use crate::units::linear_to_db;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// A truncated set of coupled modes with position-dependent couplings.
pub trait CoupledModes: Sync {
    fn n_modes(&self) -> usize;

    /// Device length in cells.
    fn length(&self) -> f64;

    /// Fill the 2n×2n Hermitian H(x).
    fn hamiltonian(&self, x: f64, h: &mut CMatrix);

    /// Fill the n power loss rates at `x` given local photon numbers ⟨c_i†c_i⟩.
    fn loss_rates(&self, x: f64, photons: &[f64], gamma: &mut [f64]);

    /// Whether `loss_rates` reads `photons`.
    fn photon_dependent(&self) -> bool {
        false
    }

    /// Power transmission applied after the device.
    fn output_efficiency(&self) -> f64 {
        1.0
    }
}

pub fn k_matrix(n: usize) -> CMatrix {
    CMatrix::from_fn(2 * n, 2 * n, |a, b| {
        if a != b {
            ZERO
        } else if a < n {
            ONE
        } else {
            -ONE
        }
    })
}

/// Vacuum correlation matrix [[0, I], [0, 0]].
pub fn vacuum(n: usize) -> CMatrix {
    let mut c = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        c[(i, n + i)] = ONE;
    }
    c
}

/// State of a propagation at one position.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub x: f64,
    /// Fundamental matrix of the mean-field equation.
    pub fundamental: CMatrix,
    pub correlation: Option<CMatrix>,
}

struct Workspace {
    n: usize,
    h: CMatrix,
    m: CMatrix,
    gamma: Vec<f64>,
    photons: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            n,
            h: CMatrix::zeros(2 * n, 2 * n),
            m: CMatrix::zeros(2 * n, 2 * n),
            gamma: vec![0.0; n],
            photons: vec![0.0; n],
        }
    }

    /// M = iKH − Γ/2 at x.
    fn assemble<S: CoupledModes + ?Sized>(&mut self, sys: &S, x: f64, corr: Option<&[Complex64]>) {
        let n = self.n;
        sys.hamiltonian(x, &mut self.h);
        if let Some(c) = corr {
            // ⟨c_i†c_i⟩ is C[n+i][i], stored column-major.
            for i in 0..n {
                self.photons[i] = c[i * 2 * n + n + i].re.max(0.0);
            }
        }
        sys.loss_rates(x, &self.photons, &mut self.gamma);
        for b in 0..2 * n {
            for a in 0..2 * n {
                let sign = if a < n { 1.0 } else { -1.0 };
                let hv = self.h[(a, b)];
                self.m[(a, b)] = Complex64::new(-hv.im * sign, hv.re * sign);
            }
        }
        for i in 0..n {
            let d = Complex64::new(0.5 * self.gamma[i], 0.0);
            self.m[(i, i)] -= d;
            self.m[(n + i, n + i)] -= d;
        }
    }
}

/// Integrate the fundamental matrix (and optionally C from vacuum) to each
/// checkpoint. The lumped output loss is not applied here.
pub fn propagate<S: CoupledModes + ?Sized>(
    sys: &S,
    checkpoints: &[f64],
    with_correlation: bool,
    opts: &OdeOptions,
) -> Result<(Vec<Snapshot>, OdeStats)> {
    let n = sys.n_modes();
    if n == 0 {
        return Err(Error::InvalidParameter("empty mode set".into()));
    }
    let d = 2 * n;
    let block = d * d;
    let corr_on = with_correlation || sys.photon_dependent();
    let mut y0: Vec<Complex64> = CMatrix::identity(d, d).as_slice().to_vec();
    if corr_on {
        y0.extend_from_slice(vacuum(n).as_slice());
    }

    let mut ws = Workspace::new(n);
    let rhs = |x: f64, y: &[Complex64], dy: &mut [Complex64]| -> Result<()> {
        let corr = if corr_on { Some(&y[block..]) } else { None };
        ws.assemble(sys, x, corr);
        let m = &ws.m;
        // dS/dx = M S
        for col in 0..d {
            for row in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    acc += m[(row, k)] * y[col * d + k];
                }
                dy[col * d + row] = acc;
            }
        }
        if let Some(c) = corr {
            // dC/dx = MC + CMᵀ + [[0, Γ], [0, 0]]
            for col in 0..d {
                for row in 0..d {
                    let mut acc = ZERO;
                    for k in 0..d {
                        acc += m[(row, k)] * c[col * d + k] + c[k * d + row] * m[(col, k)];
                    }
                    dy[block + col * d + row] = acc;
                }
            }
            for i in 0..n {
                dy[block + (n + i) * d + i] += Complex64::new(ws.gamma[i], 0.0);
            }
        }
        Ok(())
    };

    let (states, stats) = integrate(rhs, 0.0, &y0, checkpoints, opts)?;
    let snaps = checkpoints
        .iter()
        .zip(states)
        .map(|(&x, y)| Snapshot {
            x,
            fundamental: CMatrix::from_column_slice(d, d, &y[..block]),
            correlation: corr_on.then(|| CMatrix::from_column_slice(d, d, &y[block..])),
        })
        .collect();
    Ok((snaps, stats))
}

fn end_snapshot<S: CoupledModes + ?Sized>(sys: &S, with_correlation: bool, opts: &OdeOptions) -> Result<Snapshot> {
    let (mut snaps, _) = propagate(sys, &[sys.length()], with_correlation, opts)?;
    let mut s = snaps.pop().expect("one checkpoint");
    let eta = sys.output_efficiency();
    if eta < 1.0 {
        s.fundamental *= Complex64::new(eta.sqrt(), 0.0);
        if let Some(c) = s.correlation.as_mut() {
            *c = lumped_end_loss_correlation(c, linear_to_db(eta));
        }
    }
    Ok(s)
}

/// Fundamental matrix at the output, including any lumped output loss.
pub fn fundamental_matrix<S: CoupledModes + ?Sized>(sys: &S, opts: &OdeOptions) -> Result<CMatrix> {
    Ok(end_snapshot(sys, false, opts)?.fundamental)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanResult {
    /// Complex amplitude gain ⟨c_0(z)⟩/α.
    pub g: Complex64,
    pub gain: f64,
    pub gain_db: f64,
}

/// Gain of mode 0 for input amplitude `alpha` (other modes in vacuum).
pub fn integrate_mean<S: CoupledModes + ?Sized>(sys: &S, alpha: Complex64, opts: &OdeOptions) -> Result<MeanResult> {
    if alpha == ZERO {
        return Err(Error::InvalidParameter("input amplitude must be nonzero".into()));
    }
    let s = fundamental_matrix(sys, opts)?;
    Ok(mean_from_fundamental(&s, alpha))
}

pub fn mean_from_fundamental(s: &CMatrix, alpha: Complex64) -> MeanResult {
    let n = s.nrows() / 2;
    let out = s[(0, 0)] * alpha + s[(0, n)] * alpha.conj();
    let g = out / alpha;
    let gain = g.norm_sqr();
    MeanResult {
        g,
        gain,
        gain_db: linear_to_db(gain),
    }
}

/// Phase-insensitive power gain |S_00|² of mode 0.
pub fn power_gain(s: &CMatrix) -> f64 {
    s[(0, 0)].norm_sqr()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PserResult {
    pub theta: Vec<f64>,
    pub gain: Vec<f64>,
    pub gain_max: f64,
    pub gain_min: f64,
    /// 10·log10(G_max/G_min).
    pub pser_db: f64,
}

/// Degenerate phase-sensitive gain G(θ) = |a e^{iθ} + b e^{−iθ}|² for
/// α = e^{iθ}, with extrema (|a| ± |b|)².
pub fn phase_sensitive_gain<S: CoupledModes + ?Sized>(sys: &S, thetas: &[f64], opts: &OdeOptions) -> Result<PserResult> {
    let s = fundamental_matrix(sys, opts)?;
    Ok(pser_from_fundamental(&s, thetas))
}

pub fn pser_from_fundamental(s: &CMatrix, thetas: &[f64]) -> PserResult {
    let n = s.nrows() / 2;
    let (a, b) = (s[(0, 0)], s[(0, n)]);
    let gain = thetas
        .iter()
        .map(|&t| {
            let e = Complex64::from_polar(1.0, t);
            (a * e + b * e.conj()).norm_sqr()
        })
        .collect();
    let gain_max = (a.norm() + b.norm()).powi(2);
    let gain_min = (a.norm() - b.norm()).powi(2);
    PserResult {
        theta: thetas.to_vec(),
        gain,
        gain_max,
        gain_min,
        pser_db: linear_to_db(gain_max / gain_min),
    }
}

/// Output correlation matrix from vacuum input, including lumped loss.
pub fn integrate_correlation<S: CoupledModes + ?Sized>(sys: &S, opts: &OdeOptions) -> Result<CMatrix> {
    Ok(end_snapshot(sys, true, opts)?.correlation.expect("correlation requested"))
}

/// ‖S K S† − K‖_∞ (max-abs entry).
pub fn symplectic_defect(s: &CMatrix) -> f64 {
    let k = k_matrix(s.nrows() / 2);
    (s * &k * s.adjoint() - k).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// max |⟨cc†⟩ − ⟨c†c⟩ᵀ − I|.
pub fn commutation_defect(c: &CMatrix) -> f64 {
    let n = c.nrows() / 2;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { ONE } else { ZERO };
            worst = worst.max((c[(i, n + j)] - c[(n + j, i)] - delta).norm());
        }
    }
    worst
}

/// A system with constant H and uniform loss; the analytic test bench.
#[derive(Debug, Clone)]
pub struct ConstantSystem {
    pub h: CMatrix,
    pub gamma: Vec<f64>,
    pub length: f64,
}

impl ConstantSystem {
    /// Two modes coupled only through Λ2 = [[0, λ], [λ, 0]].
    pub fn two_mode(lambda: f64, length: f64) -> Self {
        let mut h = CMatrix::zeros(4, 4);
        let l = Complex64::new(lambda, 0.0);
        h[(0, 3)] = l;
        h[(1, 2)] = l;
        h[(2, 1)] = l;
        h[(3, 0)] = l;
        ConstantSystem {
            h,
            gamma: vec![0.0; 2],
            length,
        }
    }

    /// One mode with Λ2 = [[λ]].
    pub fn single_mode(lambda: f64, length: f64) -> Self {
        let l = Complex64::new(lambda, 0.0);
        ConstantSystem {
            h: CMatrix::from_row_slice(2, 2, &[ZERO, l, l, ZERO]),
            gamma: vec![0.0],
            length,
        }
    }
}

impl CoupledModes for ConstantSystem {
    fn n_modes(&self) -> usize {
        self.gamma.len()
    }
    fn length(&self) -> f64 {
        self.length
    }
    fn hamiltonian(&self, _x: f64, h: &mut CMatrix) {
        h.copy_from(&self.h);
    }
    fn loss_rates(&self, _x: f64, _photons: &[f64], gamma: &mut [f64]) {
        gamma.copy_from_slice(&self.gamma);
    }
}

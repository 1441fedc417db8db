//! Periodic grid on the unit circle, Fourier analysis and the inertia operator
//! `A = mu - d^2/dx^2` with its two inverses.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use rand::Rng;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{MuhsError, Result};

/// Tolerance for operator identities.
pub const EPS_OP: f64 = 1e-10;
/// Tolerance for transform round trips.
pub const EPS_FFT: f64 = 1e-12;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Uniform grid `x_j = j/n` on the circle of circumference one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PeriodicGrid {
    n: usize,
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(MuhsError::InvalidGrid(format!(
                "n must be even and at least 8, got {n}"
            )));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Signed wavenumber stored at FFT index `j`; the Nyquist slot maps to `-n/2`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    fn index_of(&self, k: i64) -> Option<usize> {
        let n = self.n as i64;
        if k < -n / 2 || k >= n / 2 {
            None
        } else {
            Some(k.rem_euclid(n) as usize)
        }
    }
}

/// Real periodic field sampled on a [`PeriodicGrid`].
///
/// Fourier coefficients use the normalization `u_k = (1/n) sum_j u_j e^{-2 pi i k x_j}`
/// and are computed lazily.
#[derive(Debug, Clone)]
pub struct RealField {
    grid: PeriodicGrid,
    samples: Vec<f64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl PartialEq for RealField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.samples == other.samples
    }
}

impl RealField {
    pub fn from_samples(grid: PeriodicGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(MuhsError::GridMismatch {
                expected: grid.n(),
                actual: samples.len(),
            });
        }
        Ok(Self::raw(grid, samples))
    }

    fn raw(grid: PeriodicGrid, samples: Vec<f64>) -> Self {
        Self {
            grid,
            samples,
            coeffs: OnceLock::new(),
        }
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::raw(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn constant(grid: PeriodicGrid, c: f64) -> Self {
        Self::raw(grid, vec![c; grid.n()])
    }

    /// Builds a field from coefficients in FFT order. Only the real part of the
    /// inverse transform is kept.
    pub fn from_coeffs(grid: PeriodicGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(MuhsError::GridMismatch {
                expected: grid.n(),
                actual: coeffs.len(),
            });
        }
        Ok(Self::synthesize(grid, coeffs))
    }

    fn synthesize(grid: PeriodicGrid, mut buf: Vec<Complex64>) -> Self {
        plan(grid.n(), true).process(&mut buf);
        Self::raw(grid, buf.iter().map(|z| z.re).collect())
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Fourier coefficients in FFT order.
    pub fn coeffs(&self) -> &[Complex64] {
        self.coeffs.get_or_init(|| {
            let n = self.n();
            let mut buf: Vec<Complex64> =
                self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            plan(n, false).process(&mut buf);
            let s = 1.0 / n as f64;
            buf.iter_mut().for_each(|z| *z *= s);
            buf
        })
    }

    /// Coefficient for signed wavenumber `k` in `-n/2..n/2`; zero outside.
    pub fn coeff(&self, k: i64) -> Complex64 {
        match self.grid.index_of(k) {
            Some(j) => self.coeffs()[j],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Applies a Fourier multiplier given as a function of the signed wavenumber.
    pub fn spectral_map(&self, mult: impl Fn(i64) -> Complex64) -> Self {
        Self::synthesize(self.grid, self.multiplied(mult))
    }

    fn multiplied(&self, mult: impl Fn(i64) -> Complex64) -> Vec<Complex64> {
        self.coeffs()
            .iter()
            .enumerate()
            .map(|(j, &z)| z * mult(self.grid.wavenumber(j)))
            .collect()
    }

    /// Like [`RealField::spectral_map`] for multipliers that preserve Hermitian
    /// symmetry; the product coefficients are kept so that chained spectral
    /// operators do not pick up transform round-off.
    fn hermitian_map(&self, mult: impl Fn(i64) -> Complex64) -> Self {
        let buf = self.multiplied(mult);
        let out = Self::synthesize(self.grid, buf.clone());
        let _ = out.coeffs.set(buf);
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::raw(self.grid, self.samples.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        self.check_grid(other);
        Self::raw(
            self.grid,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn shift(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    fn check_grid(&self, other: &Self) {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |a, &v| a.max(v.abs()))
    }

    /// Discrete L2 norm `sqrt(h sum u_j^2)`.
    pub fn l2(&self) -> f64 {
        (self.grid.h() * self.samples.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Discrete L1 norm `h sum |u_j|`.
    pub fn l1(&self) -> f64 {
        self.grid.h() * self.samples.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }
}

impl Add for &RealField {
    type Output = RealField;
    fn add(self, rhs: &RealField) -> RealField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &RealField {
    type Output = RealField;
    fn sub(self, rhs: &RealField) -> RealField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

/// Pointwise product.
impl Mul for &RealField {
    type Output = RealField;
    fn mul(self, rhs: &RealField) -> RealField {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Mul<f64> for &RealField {
    type Output = RealField;
    fn mul(self, rhs: f64) -> RealField {
        self.scale(rhs)
    }
}

impl Neg for &RealField {
    type Output = RealField;
    fn neg(self) -> RealField {
        self.scale(-1.0)
    }
}

/// Selects one of the two inverses of `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseMethod {
    Spectral,
    Quadrature,
}

/// The mean `mu(u)`, i.e. the zeroth Fourier coefficient.
pub fn mean(u: &RealField) -> f64 {
    u.samples.iter().sum::<f64>() / u.n() as f64
}

/// Integral over the circle; equal to the mean since the circumference is one.
pub fn integral(u: &RealField) -> f64 {
    mean(u)
}

/// Spectral derivative of the given order. The Nyquist mode is dropped for odd orders.
pub fn derivative(u: &RealField, order: u32) -> RealField {
    let nyq = -(u.n() as i64) / 2;
    u.hermitian_map(|k| {
        if order % 2 == 1 && k == nyq {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, 2.0 * PI * k as f64).powu(order)
    })
}

pub fn apply_a(u: &RealField) -> RealField {
    u.hermitian_map(|k| {
        if k == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            let w = 2.0 * PI * k as f64;
            Complex64::new(w * w, 0.0)
        }
    })
}

pub fn apply_a_inverse(w: &RealField, method: InverseMethod) -> RealField {
    match method {
        InverseMethod::Spectral => w.hermitian_map(|k| {
            if k == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                let q = 2.0 * PI * k as f64;
                Complex64::new(1.0 / (q * q), 0.0)
            }
        }),
        InverseMethod::Quadrature => quadrature_inverse(w),
    }
}

/// Zero-mean periodic antiderivative of `w - mean(w)`.
pub fn periodic_antiderivative(w: &RealField) -> RealField {
    let nyq = -(w.n() as i64) / 2;
    w.hermitian_map(|k| {
        if k == 0 || k == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -1.0 / (2.0 * PI * k as f64))
        }
    })
}

/// Antiderivatives from the base point 0: `W1(x) = int_0^x w`, `W2(x) = int_0^x W1`,
/// split as polynomial part plus periodic remainder.
struct Antiderivatives {
    mu: f64,
    p1: RealField,
    p2: RealField,
}

impl Antiderivatives {
    fn new(w: &RealField) -> Self {
        let p1 = periodic_antiderivative(w);
        let p2 = w.hermitian_map(|k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                let q = 2.0 * PI * k as f64;
                Complex64::new(-1.0 / (q * q), 0.0)
            }
        });
        Self { mu: mean(w), p1, p2 }
    }

    fn p1_0(&self) -> f64 {
        self.p1.samples[0]
    }

    fn p2_0(&self) -> f64 {
        self.p2.samples[0]
    }

    fn w1(&self, j: usize, x: f64) -> f64 {
        self.mu * x + self.p1.samples[j] - self.p1_0()
    }

    fn w2(&self, j: usize, x: f64) -> f64 {
        self.mu * x * x / 2.0 + self.p2.samples[j] - self.p2_0() - self.p1_0() * x
    }

    fn w1_integral(&self) -> f64 {
        self.mu / 2.0 - self.p1_0()
    }

    fn w2_at_one(&self) -> f64 {
        self.mu / 2.0 - self.p1_0()
    }

    fn w3_at_one(&self) -> f64 {
        self.mu / 6.0 - self.p2_0() - self.p1_0() / 2.0
    }
}

/// `u(x) = (x^2/2 - x/2 + 13/12) mu + (x - 1/2) W2(1) - W2(x) + W3(1)`.
fn quadrature_inverse(w: &RealField) -> RealField {
    let ad = Antiderivatives::new(w);
    let w2_1 = ad.w2_at_one();
    let w3_1 = ad.w3_at_one();
    let g = w.grid;
    let samples = (0..g.n())
        .map(|j| {
            let x = g.node(j);
            (x * x / 2.0 - x / 2.0 + 13.0 / 12.0) * ad.mu + (x - 0.5) * w2_1 - ad.w2(j, x) + w3_1
        })
        .collect();
    RealField::raw(g, samples)
}

/// `A^{-1} d/dx w = (x - 1/2) int w - int_0^x w + int_0^1 int_0^x w`.
pub fn ainv_dx(w: &RealField) -> RealField {
    let ad = Antiderivatives::new(w);
    let c = ad.w1_integral();
    let g = w.grid;
    let samples = (0..g.n())
        .map(|j| {
            let x = g.node(j);
            (x - 0.5) * ad.mu - ad.w1(j, x) + c
        })
        .collect();
    RealField::raw(g, samples)
}

/// Rigid translation `x -> u(x - s)`, exact for band-limited fields.
pub fn translate(u: &RealField, s: f64) -> RealField {
    let nyq = -(u.n() as i64) / 2;
    u.hermitian_map(|k| {
        if k == nyq {
            Complex64::new((PI * u.n() as f64 * s).cos(), 0.0)
        } else {
            Complex64::from_polar(1.0, -2.0 * PI * k as f64 * s)
        }
    })
}

/// Two-thirds rule: zeroes every mode with `|k| > n/3`.
pub fn dealias(u: &RealField) -> RealField {
    let cut = u.n() as i64 / 3;
    u.hermitian_map(|k| {
        if k.abs() > cut {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

/// Evaluates the trigonometric interpolant at `x` (taken mod 1).
pub fn interpolate(u: &RealField, x: f64) -> f64 {
    interpolate_coeffs(u.coeffs(), x)
}

/// Interpolant evaluation directly from FFT-ordered coefficients.
pub fn interpolate_coeffs(c: &[Complex64], x: f64) -> f64 {
    let n = c.len();
    let half = n / 2;
    let x = x.rem_euclid(1.0);
    let step = Complex64::from_polar(1.0, 2.0 * PI * x);
    let mut z = step;
    let mut acc = 0.0;
    for (k, ck) in c.iter().enumerate().take(half).skip(1) {
        acc += (ck * z).re;
        if k % 64 == 63 {
            z = Complex64::from_polar(1.0, 2.0 * PI * x * (k + 1) as f64);
        } else {
            z *= step;
        }
    }
    c[0].re + 2.0 * acc + c[half].re * (PI * n as f64 * x).cos()
}

/// Random real trigonometric polynomial with modes up to `kmax` and amplitudes
/// decaying like `1/k`.
pub fn random_band_limited<R: Rng>(grid: PeriodicGrid, kmax: usize, rng: &mut R) -> RealField {
    let n = grid.n();
    assert!(kmax < n / 2, "kmax must stay below the Nyquist mode");
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[0] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
    for k in 1..=kmax {
        let s = 0.5 / k as f64;
        let z = Complex64::new(rng.gen_range(-1.0..1.0) * s, rng.gen_range(-1.0..1.0) * s);
        buf[k] = z;
        buf[n - k] = z.conj();
    }
    RealField::synthesize(grid, buf)
}

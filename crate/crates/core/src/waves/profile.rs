use std::f64::consts::PI;

use serde::Serialize;

use super::elliptic::incomplete_parts;
use super::quad;
use super::{reduce, wave_stats, Reduced, WaveFamily, WaveParams};
use crate::error::{MuhsError, Result};
use crate::evolution::{integrate, EvolutionConfig};
use crate::spectral::{translate, PeriodicGrid, RealField};

/// Samples of a wave profile on `nsamples` uniform positions.
///
/// For periodic waves `xs` covers `[0, period)` with the point of parameter angle zero at
/// `x = 0`; `mean` is the trapezoid integral of the samples over the sampled window.
#[derive(Debug, Clone, Serialize)]
pub struct WaveProfile {
    pub params: WaveParams,
    pub xs: Vec<f64>,
    pub phis: Vec<f64>,
    pub period: f64,
    pub mean: f64,
    pub cusp_xs: Vec<f64>,
}

/// Half a period of a bounded wave in the `mu > 0` frame, parametrized by the angle
/// `theta` with `theta = 0` at `phi = m`.
struct HalfWave {
    red: Reduced,
    family: WaveFamily,
    scale: f64,
    ratio: f64,
    s2_max: f64,
    theta_max: f64,
}

impl HalfWave {
    fn new(p: &WaveParams) -> Result<Self> {
        let red = reduce(p.c, p.m_lo, p.m_hi, p.mu)?;
        let family = red.bounded_family()?;
        let (c, m, big_m, mu) = (red.c, red.m, red.big_m, red.mu);
        let (scale, ratio, s2_max) = match family {
            WaveFamily::Smooth => ((2.0 * (c - m) / mu).sqrt(), (big_m - m) / (c - m), 1.0),
            WaveFamily::Cusped => (
                (2.0 * (c - m) / mu).sqrt(),
                (big_m - m) / (c - m),
                (c - m) / (big_m - m),
            ),
            _ => (
                2.0 * (m - c) / (2.0 * mu * (big_m - m)).sqrt(),
                -(m - c) / (big_m - m),
                1.0,
            ),
        };
        Ok(HalfWave {
            red,
            family,
            scale,
            ratio,
            s2_max,
            theta_max: s2_max.sqrt().asin(),
        })
    }

    fn sin2(&self, theta: f64) -> f64 {
        theta.sin().powi(2).min(self.s2_max)
    }

    fn phi(&self, theta: f64) -> f64 {
        let s2 = self.sin2(theta);
        let r = &self.red;
        match self.family {
            WaveFamily::Anticusped => r.m - (r.m - r.c) * s2,
            _ => r.m + (r.big_m - r.m) * s2,
        }
    }

    /// `1 - r sin^2(theta)`, written as a product near the cusp amplitude.
    fn delta(&self, theta: f64) -> f64 {
        if self.family == WaveFamily::Cusped {
            self.ratio * (self.theta_max - theta).sin() * (self.theta_max + theta).sin()
        } else {
            1.0 - self.ratio * self.sin2(theta)
        }
    }

    fn x(&self, theta: f64) -> Result<f64> {
        let s2 = self.sin2(theta);
        let inc = incomplete_parts(s2, theta.cos().powi(2), self.delta(theta), self.ratio)?;
        Ok(match self.family {
            WaveFamily::Anticusped => self.scale * (inc.f - inc.d),
            _ => self.scale * inc.e,
        })
    }

    fn dx_dtheta(&self, theta: f64) -> f64 {
        let d = self.delta(theta).max(0.0);
        match self.family {
            WaveFamily::Anticusped => self.scale * theta.cos().powi(2) / d.sqrt(),
            _ => self.scale * d.sqrt(),
        }
    }

    /// `phi_x^2 dx/dtheta`, with the cusp singularity cancelled analytically where it can be.
    fn slope2_dx(&self, theta: f64) -> f64 {
        let s2 = self.sin2(theta);
        let d = self.delta(theta).max(0.0);
        let r = &self.red;
        match self.family {
            WaveFamily::Anticusped => 4.0 * (r.m - r.c).powi(2) * s2 * d.sqrt() / self.scale,
            _ => 4.0 * (r.big_m - r.m).powi(2) * s2 * (1.0 - s2) / (self.scale * d.sqrt()),
        }
    }

    fn half(&self) -> Result<f64> {
        self.x(self.theta_max)
    }
}

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes).
struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Pchip {
    fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ds = vec![0.0; n];
        for i in 1..n - 1 {
            if del[i - 1] * del[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                ds[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
            }
        }
        ds[0] = del[0];
        ds[n - 1] = del[n - 2];
        Pchip { xs, ys, ds }
    }

    /// Value and the index of the enclosing interval.
    fn eval(&self, x: f64) -> (f64, usize) {
        let n = self.xs.len();
        let i = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * self.ys[i]
            + (t3 - 2.0 * t2 + t) * h * self.ds[i]
            + (-2.0 * t3 + 3.0 * t2) * self.ys[i + 1]
            + (t3 - t2) * h * self.ds[i + 1];
        (v, i)
    }
}

const TABLE: usize = 513;

/// Inverse of `theta -> x(theta)` on the half wave.
struct Inverse<'a> {
    wave: &'a HalfWave,
    pchip: Pchip,
    half: f64,
}

impl<'a> Inverse<'a> {
    fn new(wave: &'a HalfWave) -> Result<Self> {
        let thetas: Vec<f64> = (0..TABLE)
            .map(|i| wave.theta_max * i as f64 / (TABLE - 1) as f64)
            .collect();
        let xs = thetas.iter().map(|&t| wave.x(t)).collect::<Result<Vec<_>>>()?;
        let half = xs[TABLE - 1];
        Ok(Inverse {
            wave,
            pchip: Pchip::new(xs, thetas),
            half,
        })
    }

    fn theta(&self, x: f64) -> Result<f64> {
        let x = x.clamp(0.0, self.half);
        let (guess, i) = self.pchip.eval(x);
        let (mut lo, mut hi) = (self.pchip.ys[i], self.pchip.ys[i + 1]);
        let mut t = guess.clamp(lo, hi);
        for _ in 0..100 {
            let f = self.wave.x(t)? - x;
            if f.abs() <= 4.0 * f64::EPSILON * self.half {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let d = self.wave.dx_dtheta(t);
            let newton = t - f / d;
            t = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 1e-16 * self.wave.theta_max {
                break;
            }
        }
        Ok(t)
    }
}

/// Samples one period of a bounded periodic wave at `nsamples` uniform positions,
/// reflecting the half wave evenly about its extrema.
pub fn profile(params: &WaveParams, nsamples: usize) -> Result<WaveProfile> {
    if nsamples < 4 {
        return Err(MuhsError::InvalidParams(format!(
            "need at least 4 samples, got {nsamples}"
        )));
    }
    let wave = HalfWave::new(params)?;
    let inv = Inverse::new(&wave)?;
    let half = inv.half;
    let period = 2.0 * half;
    let h = period / nsamples as f64;
    let mut xs = Vec::with_capacity(nsamples);
    let mut phis = Vec::with_capacity(nsamples);
    for j in 0..nsamples {
        let x = j as f64 * h;
        let local = if x <= half { x } else { period - x };
        xs.push(x);
        phis.push(wave.red.flip * wave.phi(inv.theta(local)?));
    }
    let mean = phis.iter().sum::<f64>() * h;
    let cusp_xs = match wave.family {
        WaveFamily::Smooth => Vec::new(),
        _ => vec![half],
    };
    Ok(WaveProfile {
        params: *params,
        xs,
        phis,
        period,
        mean,
        cusp_xs,
    })
}

const SOLITARY_FLOOR: f64 = 1e-10;

/// The solitary wave of speed `c` for frozen `mu` of opposite sign, from
/// `sqrt(2/(-mu)) (sqrt(c - phi) - sqrt(c) artanh sqrt((c - phi)/c)) = -|x|`, on the
/// window where `|phi| >= 1e-10 |c|`. The crest (or trough) sits at `x = 0`.
pub fn solitary_profile(c: f64, mu: f64, nsamples: usize) -> Result<WaveProfile> {
    if !(c.is_finite() && mu.is_finite()) || c == 0.0 || mu == 0.0 || c.signum() == mu.signum() {
        return Err(MuhsError::InvalidParams(format!(
            "solitary waves need c and mu of opposite signs, got c = {c}, mu = {mu}"
        )));
    }
    if nsamples < 3 {
        return Err(MuhsError::InvalidParams(format!(
            "need at least 3 samples, got {nsamples}"
        )));
    }
    let flip = if mu < 0.0 { 1.0 } else { -1.0 };
    let (cr, mur) = (flip * c, flip * mu);
    let amp = (2.0 * cr / -mur).sqrt();
    let dist = |s: f64| amp * (s.atanh() - s);
    let s_max = (1.0 - SOLITARY_FLOOR).sqrt();
    let reach = dist(s_max);
    let h = 2.0 * reach / (nsamples - 1) as f64;
    let mut xs = Vec::with_capacity(nsamples);
    let mut phis = Vec::with_capacity(nsamples);
    for j in 0..nsamples {
        let x = -reach + j as f64 * h;
        let target = x.abs().min(reach);
        let (mut lo, mut hi) = (0.0, s_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if dist(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        xs.push(x);
        phis.push(flip * cr * (1.0 - s * s));
    }
    let mean = h * (phis.iter().sum::<f64>() - 0.5 * (phis[0] + phis[nsamples - 1]));
    let family = if mu < 0.0 {
        WaveFamily::SolitaryCusped
    } else {
        WaveFamily::SolitaryAnticusped
    };
    Ok(WaveProfile {
        params: WaveParams {
            c,
            m_lo: 0.0,
            m_hi: 0.0,
            mu,
            family,
            a_coef: 0.0,
            b_coef: 0.0,
        },
        xs,
        phis,
        period: 2.0 * reach,
        mean,
        cusp_xs: vec![0.0],
    })
}

const WEAK_PANELS: usize = 48;

/// Largest `|int (phi_x^2 + 4 mu phi - a) psi - int (phi - c)^2 psi''|` over one period
/// for `psi = cos(2 pi k x / P)`, `k = 0..=test_modes` (sine modes vanish by the even
/// reflection). Integrals run in the angle variable on each half wave, so `phi` is never
/// differentiated across a cusp.
pub fn weak_residual(profile: &WaveProfile, test_modes: usize) -> Result<f64> {
    let wave = HalfWave::new(&profile.params)?;
    let period = 2.0 * wave.half()?;
    let r = &wave.red;
    let a = 2.0 * r.mu * (r.m + r.big_m);
    // theta = theta_max (1 - u^2) cancels the inverse square root at the cusp
    let samples = quad::nodes(0.0, 1.0, WEAK_PANELS)
        .into_iter()
        .map(|(u, w)| {
            let theta = wave.theta_max * (1.0 - u * u);
            let jac = 2.0 * wave.theta_max * u * w;
            Ok((
                wave.x(theta)?,
                wave.phi(theta),
                wave.dx_dtheta(theta) * jac,
                wave.slope2_dx(theta) * jac,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for k in 0..=test_modes {
        let omega = 2.0 * PI * k as f64 / period;
        let total: f64 = samples
            .iter()
            .map(|&(x, phi, dx, slope2)| {
                let bulk = 4.0 * r.mu * phi - a + omega * omega * (phi - r.c).powi(2);
                (omega * x).cos() * (slope2 + bulk * dx)
            })
            .sum();
        worst = worst.max((2.0 * total).abs());
    }
    Ok(worst)
}

/// Least-squares slope of `log |c - phi|` against `log |x - x_cusp|` over the 32 samples
/// on each side of the first cusp.
pub fn cusp_exponent(profile: &WaveProfile) -> Result<f64> {
    let Some(&xc) = profile.cusp_xs.first() else {
        return Err(MuhsError::Precondition("profile has no cusp".into()));
    };
    let n = profile.xs.len();
    let h = profile.xs[1] - profile.xs[0];
    let jc = (xc - profile.xs[0]) / h;
    let jr = jc.round();
    if (jc - jr).abs() > 1e-6 || n < 66 {
        return Err(MuhsError::Precondition(
            "cusp must sit on a sample with 32 samples on each side".into(),
        ));
    }
    let jc = jr as i64;
    let c = profile.params.c;
    let mut pts = Vec::new();
    for off in 1..=32i64 {
        for j in [jc - off, jc + off] {
            let j = j.rem_euclid(n as i64) as usize;
            let y = (c - profile.phis[j]).abs();
            if y > 0.0 {
                pts.push(((off as f64 * h).ln(), y.ln()));
            }
        }
    }
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / k, sy / k);
    let (num, den) = pts.iter().fold((0.0, 0.0), |a, p| {
        (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2))
    });
    Ok(num / den)
}

/// Result of transporting a sampled wave with the evolution solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeCheck {
    /// `min_s |u(t_end) - phi(. - s)| / |phi|` in the discrete L2 norm.
    pub error: f64,
    pub shift: f64,
    /// `c t_end mod 1`.
    pub expected_shift: f64,
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Evolves a smooth period-one wave with `cfg` and measures how far the result is from
/// a rigid translate of the initial profile.
pub fn shape_preservation(params: &WaveParams, cfg: &EvolutionConfig) -> Result<ShapeCheck> {
    if params.family != WaveFamily::Smooth {
        return Err(MuhsError::Precondition(format!(
            "shape check needs a smooth wave, got {}",
            params.family.name()
        )));
    }
    let period = wave_stats(params.c, params.m_lo, params.m_hi, params.mu)?.period;
    if (period - 1.0).abs() > 1e-9 {
        return Err(MuhsError::Precondition(format!(
            "shape check needs period one, got {period}"
        )));
    }
    let expected_shift = (params.c * cfg.t_end).rem_euclid(1.0);
    if cfg.t_end == 0.0 {
        return Ok(ShapeCheck {
            error: 0.0,
            shift: 0.0,
            expected_shift,
        });
    }
    let grid = PeriodicGrid::new(cfg.n)?;
    let prof = profile(params, cfg.n)?;
    let phi = RealField::from_samples(grid, prof.phis)?;
    let traj = integrate(&phi, cfg)?;
    if !traj.is_completed() {
        return Err(MuhsError::Numerical(format!(
            "wave transport stopped early at t = {:.6e}",
            traj.t_final()
        )));
    }
    let u = &traj.last().u;
    let dist = |s: f64| (u - &translate(&phi, s)).l2();
    let h = grid.h();
    let coarse = (0..cfg.n)
        .map(|j| j as f64 * h)
        .min_by(|a, b| dist(*a).total_cmp(&dist(*b)))
        .expect("nonempty grid");
    let (mut lo, mut hi) = (coarse - h, coarse + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (dist(x1), dist(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = dist(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = dist(x2);
        }
    }
    let shift = (0.5 * (lo + hi)).rem_euclid(1.0);
    let error = dist(shift) / phi.l2();
    if circular_gap(shift, expected_shift) > 1e-3 {
        return Err(MuhsError::Numerical(format!(
            "best shift {shift:.6} differs from c t = {expected_shift:.6}"
        )));
    }
    Ok(ShapeCheck {
        error,
        shift,
        expected_shift,
    })
}

/// `shape_preservation` with default stepping on `grid_n` points.
pub fn shape_preservation_error(params: &WaveParams, grid_n: usize, t_end: f64) -> Result<f64> {
    shape_preservation(params, &EvolutionConfig::new(grid_n, t_end)).map(|s| s.error)
}

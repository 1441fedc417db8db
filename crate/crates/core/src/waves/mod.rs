//! Traveling waves `u = phi(x - c t)`: classification, period and mean-integral in
//! closed form, the mean constraint, period-one solutions and profiles.

pub mod elliptic;
mod profile;
mod quad;

use serde::Serialize;

use crate::error::{MuhsError, Result};
use elliptic::{complete_d, ellip_e, ellip_k, incomplete_parts};

pub use profile::{
    cusp_exponent, profile, shape_preservation, shape_preservation_error, solitary_profile,
    weak_residual, ShapeCheck, WaveProfile,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WaveFamily {
    Smooth,
    Cusped,
    Anticusped,
    SolitaryAnticusped,
    /// Mirror image of `SolitaryAnticusped` for negative `mu`.
    SolitaryCusped,
}

impl WaveFamily {
    /// Label after `(mu, phi, c) -> (-mu, -phi, -c)`: cusps pointing up turn into cusps
    /// pointing down.
    pub fn mirrored(self) -> Self {
        match self {
            WaveFamily::Smooth => WaveFamily::Smooth,
            WaveFamily::Cusped => WaveFamily::Anticusped,
            WaveFamily::Anticusped => WaveFamily::Cusped,
            WaveFamily::SolitaryAnticusped => WaveFamily::SolitaryCusped,
            WaveFamily::SolitaryCusped => WaveFamily::SolitaryAnticusped,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WaveFamily::Smooth => "Smooth",
            WaveFamily::Cusped => "Cusped",
            WaveFamily::Anticusped => "Anticusped",
            WaveFamily::SolitaryAnticusped => "SolitaryAnticusped",
            WaveFamily::SolitaryCusped => "SolitaryCusped",
        }
    }
}

/// A bounded wave of `-u_txx = -2 mu u_x + 2 u_x u_xx + u u_xxx` with `mu` frozen.
///
/// `phi_x^2 (c - phi) = -2 mu phi^2 + a phi + b = 2 mu (M - phi)(phi - m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveParams {
    pub c: f64,
    pub m_lo: f64,
    pub m_hi: f64,
    pub mu: f64,
    pub family: WaveFamily,
    pub a_coef: f64,
    pub b_coef: f64,
}

impl WaveParams {
    pub fn new(c: f64, m_lo: f64, m_hi: f64, mu: f64) -> Result<Self> {
        let family = classify_params(c, m_lo, m_hi, mu)?.ok_or_else(|| {
            MuhsError::InvalidParams(format!(
                "no bounded wave for c = {c}, m = {m_lo}, M = {m_hi}, mu = {mu}"
            ))
        })?;
        Ok(WaveParams {
            c,
            m_lo,
            m_hi,
            mu,
            family,
            a_coef: 2.0 * mu * (m_lo + m_hi),
            b_coef: -2.0 * mu * m_lo * m_hi,
        })
    }
}

/// Period and integral of `phi` over one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveStats {
    pub period: f64,
    pub mean: f64,
}

/// Parameters mapped to `mu > 0`; `flip = -1` when the mirror symmetry was applied.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Reduced {
    pub c: f64,
    pub m: f64,
    pub big_m: f64,
    pub mu: f64,
    pub flip: f64,
}

pub(crate) fn reduce(c: f64, m: f64, big_m: f64, mu: f64) -> Result<Reduced> {
    if ![c, m, big_m, mu].iter().all(|v| v.is_finite()) {
        return Err(MuhsError::InvalidParams("non-finite wave parameter".into()));
    }
    if mu == 0.0 {
        return Err(MuhsError::InvalidParams("mu must be nonzero".into()));
    }
    if m > big_m {
        return Err(MuhsError::InvalidParams(format!("m = {m} exceeds M = {big_m}")));
    }
    Ok(if mu > 0.0 {
        Reduced { c, m, big_m, mu, flip: 1.0 }
    } else {
        Reduced { c: -c, m: -big_m, big_m: -m, mu: -mu, flip: -1.0 }
    })
}

impl Reduced {
    /// Family for `mu > 0`.
    pub fn family(&self) -> Option<WaveFamily> {
        let (c, m, big_m) = (self.c, self.m, self.big_m);
        if m < big_m && big_m < c {
            Some(WaveFamily::Smooth)
        } else if m < c && c < big_m {
            Some(WaveFamily::Cusped)
        } else if c < m && m < big_m {
            Some(WaveFamily::Anticusped)
        } else if c < m && m == big_m {
            Some(WaveFamily::SolitaryAnticusped)
        } else {
            None
        }
    }

    fn bounded_family(&self) -> Result<WaveFamily> {
        match self.family() {
            Some(f @ (WaveFamily::Smooth | WaveFamily::Cusped | WaveFamily::Anticusped)) => Ok(f),
            other => Err(MuhsError::InvalidParams(format!(
                "periodic wave needed, parameters give {}",
                other.map_or("Unbounded", |f| f.name())
            ))),
        }
    }
}

/// Family of the wave with extremal parameters `m <= M`, or `None` when unbounded.
pub fn classify_params(c: f64, m_lo: f64, m_hi: f64, mu: f64) -> Result<Option<WaveFamily>> {
    let r = reduce(c, m_lo, m_hi, mu)?;
    Ok(r.family().map(|f| if r.flip < 0.0 { f.mirrored() } else { f }))
}

/// Elliptic factors standing in for `E` and `K` in the closed forms: complete for
/// smooth waves, incomplete at the cusp amplitude for cusped ones.
fn smooth_or_cusped_factors(r: &Reduced, family: WaveFamily) -> Result<(f64, f64)> {
    let ratio = (r.big_m - r.m) / (r.c - r.m);
    match family {
        WaveFamily::Smooth => Ok((ellip_e(ratio)?, ellip_k(ratio)?)),
        WaveFamily::Cusped => {
            let span = r.big_m - r.m;
            let inc = incomplete_parts((r.c - r.m) / span, (r.big_m - r.c) / span, 0.0, ratio)?;
            Ok((inc.e, inc.f))
        }
        _ => unreachable!("smooth or cusped only"),
    }
}

fn stats_reduced(r: &Reduced) -> Result<WaveStats> {
    let family = r.bounded_family()?;
    let (c, m, big_m, mu) = (r.c, r.m, r.big_m, r.mu);
    match family {
        WaveFamily::Smooth | WaveFamily::Cusped => {
            let scale = (2.0 * (c - m) / mu).sqrt();
            let (e, k) = smooth_or_cusped_factors(r, family)?;
            Ok(WaveStats {
                period: 2.0 * scale * e,
                mean: 2.0 / 3.0 * scale * ((2.0 * (m + big_m) - c) * e + (c - big_m) * k),
            })
        }
        _ => {
            // phi = m - (m - c) sin^2(theta), crest m at theta = 0, trough c at pi/2
            let scale = 2.0 * (m - c) / (2.0 * mu * (big_m - m)).sqrt();
            let ratio = -(m - c) / (big_m - m);
            let (k, e, d) = (ellip_k(ratio)?, ellip_e(ratio)?, complete_d(ratio)?);
            let cos2 = k - d;
            let sin4 = (2.0 * d + k - 2.0 * e) / (3.0 * ratio);
            Ok(WaveStats {
                period: 2.0 * scale * cos2,
                mean: 2.0 * scale * (m * cos2 - (m - c) * (d - sin4)),
            })
        }
    }
}

/// Period and mean-integral (integral over one period) of a bounded periodic wave.
pub fn wave_stats(c: f64, m_lo: f64, m_hi: f64, mu: f64) -> Result<WaveStats> {
    let r = reduce(c, m_lo, m_hi, mu)?;
    let s = stats_reduced(&r)?;
    Ok(WaveStats {
        period: s.period,
        mean: r.flip * s.mean,
    })
}

/// The `mu > 0` with `mean(phi_{m,M,mu}) = mu`, namely `mean(phi_{m,M,1})^{2/3}`.
pub fn mu_constraint(c: f64, m_lo: f64, m_hi: f64) -> Result<f64> {
    let q = wave_stats(c, m_lo, m_hi, 1.0)?.mean;
    if !(q > 0.0) {
        return Err(MuhsError::NonPositiveMean { mean: q });
    }
    Ok(q.cbrt().powi(2))
}

/// Period of the wave with mean `mu` fixed by the constraint. Smooth and cusped
/// parameters use the closed formula; anticusped ones go through `mu_constraint`.
pub fn muhs_period(c: f64, m_lo: f64, m_hi: f64) -> Result<f64> {
    let r = reduce(c, m_lo, m_hi, 1.0)?;
    let family = r.bounded_family()?;
    match family {
        WaveFamily::Smooth | WaveFamily::Cusped => {
            let (e, k) = smooth_or_cusped_factors(&r, family)?;
            let root = (c - m_lo).sqrt();
            let q = root * ((2.0 * (m_lo + m_hi) - c) * e + (c - m_hi) * k);
            if !(q > 0.0) {
                return Err(MuhsError::NonPositiveMean {
                    mean: 2.0 / 3.0 * std::f64::consts::SQRT_2 * q,
                });
            }
            Ok(2.0 * 3f64.cbrt() * root * e / q.cbrt())
        }
        _ => {
            let mu = mu_constraint(c, m_lo, m_hi)?;
            Ok(wave_stats(c, m_lo, m_hi, mu)?.period)
        }
    }
}

const PROBES: usize = 64;
const PERIOD_TOL: f64 = 1e-10;

/// A wave of period one and mean `mu` for speed `c`, with the trough `m_anchor` held
/// fixed and `M` found by scanning and bisection. Negative `c` is handled by mirroring
/// a solution for `-c` with anchor `-m_anchor`.
pub fn solve_period_one(c: f64, family: WaveFamily, m_anchor: f64) -> Result<WaveParams> {
    if c == 0.0 || !c.is_finite() || !m_anchor.is_finite() {
        return Err(MuhsError::InvalidParams("speed must be finite and nonzero".into()));
    }
    if c < 0.0 {
        let w = solve_period_one(-c, family, -m_anchor)?;
        return WaveParams::new(c, -w.m_hi, -w.m_lo, -w.mu);
    }
    let m = m_anchor;
    let probes: Vec<f64> = match family {
        WaveFamily::Smooth => {
            if !(0.0 < m && m < c) {
                return Err(MuhsError::InvalidParams(format!(
                    "smooth anchor needs 0 < m < c, got m = {m}, c = {c}"
                )));
            }
            // logistic spacing clusters probes geometrically at both ends of (m, c)
            (0..PROBES)
                .map(|i| {
                    let z = -27.0 + 54.0 * i as f64 / (PROBES - 1) as f64;
                    m + (c - m) / (1.0 + (-z).exp())
                })
                .filter(|&big_m| m < big_m && big_m < c)
                .collect()
        }
        WaveFamily::Cusped => {
            if !(m < c) {
                return Err(MuhsError::InvalidParams(format!(
                    "cusped anchor needs m < c, got m = {m}, c = {c}"
                )));
            }
            (0..PROBES)
                .map(|i| c + (c - m) * 10f64.powf(-12.0 + 20.0 * i as f64 / (PROBES - 1) as f64))
                .collect()
        }
        other => {
            return Err(MuhsError::InvalidParams(format!(
                "period-one search supports Smooth and Cusped, got {}",
                other.name()
            )))
        }
    };
    let excess = |big_m: f64| muhs_period(c, m, big_m).map(|p| p - 1.0).ok();
    let values: Vec<Option<f64>> = probes.iter().map(|&p| excess(p)).collect();
    let bracket = (1..probes.len()).find_map(|i| match (values[i - 1], values[i]) {
        (Some(a), Some(b)) if a.signum() != b.signum() || a == 0.0 || b == 0.0 => {
            Some((probes[i - 1], a, probes[i], b))
        }
        _ => None,
    });
    let Some((mut lo, mut f_lo, mut hi, _)) = bracket else {
        return Err(MuhsError::NoBracket {
            lo: probes[0],
            hi: probes[probes.len() - 1],
            probes: probes.len(),
        });
    };
    let mut best = if f_lo.abs() <= PERIOD_TOL { lo } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        if f_lo.abs() <= PERIOD_TOL {
            best = lo;
            break;
        }
        let mid = 0.5 * (lo + hi);
        best = mid;
        if mid <= lo || mid >= hi {
            break;
        }
        let f = excess(mid).ok_or_else(|| {
            MuhsError::Numerical(format!("period undefined at M = {mid} inside bracket"))
        })?;
        if f.abs() <= PERIOD_TOL {
            break;
        }
        if f.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
        }
    }
    let residual = muhs_period(c, m, best)? - 1.0;
    if residual.abs() >= PERIOD_TOL {
        return Err(MuhsError::Numerical(format!(
            "bisection stalled with period - 1 = {residual:.3e}"
        )));
    }
    let mu = mu_constraint(c, m, best)?;
    WaveParams::new(c, m, best, mu)
}

//! Legendre elliptic integrals in the parameter convention
//! `F(phi | r) = int_0^phi (1 - r sin^2)^{-1/2}`, evaluated through Carlson's
//! symmetric forms `R_F` and `R_D` by duplication.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{MuhsError, Result};

const ERRTOL: f64 = 1e-3;
const ROUND_SLACK: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EllipticKind {
    /// Incomplete integral of the first kind `F(phi | r)`.
    F,
    /// Incomplete integral of the second kind `E(phi | r)`.
    EIncomplete,
    /// `K(r) = F(pi/2 | r)`; `phi` is ignored.
    K,
    /// `E(r) = E(pi/2 | r)`; `phi` is ignored.
    EComplete,
}

/// Carlson's `R_F(x, y, z)`; at most one argument may vanish.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 || z < 0.0 || [x + y, x + z, y + z].iter().any(|&s| s <= 0.0) {
        return Err(MuhsError::DomainError(format!("R_F({x}, {y}, {z})")));
    }
    let (mut x, mut y, mut z) = (x, y, z);
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        let ave = (x + y + z) / 3.0;
        let (dx, dy, dz) = ((ave - x) / ave, (ave - y) / ave, (ave - z) / ave);
        if dx.abs().max(dy.abs()).max(dz.abs()) <= ERRTOL {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            let series =
                1.0 + (e2 / 24.0 - 0.1 - 3.0 / 44.0 * e3) * e2 + e3 / 14.0;
            return Ok(series / ave.sqrt());
        }
    }
}

/// Carlson's `R_D(x, y, z)`; needs `z > 0` and `x + y > 0`.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 || z <= 0.0 || x + y <= 0.0 {
        return Err(MuhsError::DomainError(format!("R_D({x}, {y}, {z})")));
    }
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 6.0;
    const C3: f64 = 9.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 9.0 / 88.0;
    const C6: f64 = 9.0 / 52.0;
    let (mut x, mut y, mut z) = (x, y, z);
    let (mut sum, mut fac) = (0.0, 1.0);
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (z + lam));
        fac *= 0.25;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        let ave = 0.2 * (x + y + 3.0 * z);
        let (dx, dy, dz) = ((ave - x) / ave, (ave - y) / ave, (ave - z) / ave);
        if dx.abs().max(dy.abs()).max(dz.abs()) <= ERRTOL {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - 6.0 * eb;
            let ee = ed + ec + ec;
            let series = 1.0
                + ed * (-C1 + C5 * ed - C6 * dz * ee)
                + dz * (C2 * ee + dz * (-C3 * ec + dz * C4 * ea));
            return Ok(3.0 * sum + fac * series / (ave * ave.sqrt()));
        }
    }
}

/// `F`, `E` and `D = (F - E)/r = (s^3/3) R_D` at the amplitude with `sin^2 = s2`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Incomplete {
    pub f: f64,
    pub e: f64,
    pub d: f64,
}

/// Taking `sin^2` directly lets callers hit the singular endpoint `r s2 = 1` exactly.
pub(crate) fn incomplete_from_sin2(s2: f64, r: f64) -> Result<Incomplete> {
    incomplete_parts(s2, 1.0 - s2, 1.0 - r * s2, r)
}

/// Same with `cos^2` and `1 - r sin^2` supplied by the caller. `R_F` has an infinite
/// slope in its vanishing argument, so near a cusp the last one must come from a
/// cancellation-free expression.
pub(crate) fn incomplete_parts(s2: f64, c2: f64, delta: f64, r: f64) -> Result<Incomplete> {
    if !(0.0..=1.0).contains(&s2) {
        return Err(MuhsError::DomainError(format!("sin^2 = {s2} outside [0, 1]")));
    }
    let mut delta = delta;
    if delta < 0.0 {
        if delta < -ROUND_SLACK {
            return Err(MuhsError::DomainError(format!(
                "r sin^2 = {} exceeds 1",
                r * s2
            )));
        }
        delta = 0.0;
    }
    if s2 == 0.0 {
        return Ok(Incomplete { f: 0.0, e: 0.0, d: 0.0 });
    }
    let s = s2.sqrt();
    let c2 = c2.max(0.0);
    if c2 == 0.0 && delta == 0.0 {
        return Err(MuhsError::DomainError("F(pi/2 | 1) diverges".into()));
    }
    let f = s * carlson_rf(c2, delta, 1.0)?;
    let d = s * s2 / 3.0 * carlson_rd(c2, delta, 1.0)?;
    Ok(Incomplete { f, e: f - r * d, d })
}

fn incomplete(phi: f64, r: f64) -> Result<(f64, f64)> {
    if !phi.is_finite() || phi.abs() > FRAC_PI_2 + 1e-15 {
        return Err(MuhsError::DomainError(format!(
            "amplitude {phi} outside [-pi/2, pi/2]"
        )));
    }
    let s2 = phi.sin().powi(2).min(1.0);
    let v = incomplete_from_sin2(s2, r)?;
    Ok((v.f.copysign(phi), v.e.copysign(phi)))
}

/// `F(phi | r)`.
pub fn ellip_f(phi: f64, r: f64) -> Result<f64> {
    incomplete(phi, r).map(|p| p.0)
}

/// `E(phi | r)`.
pub fn ellip_e_inc(phi: f64, r: f64) -> Result<f64> {
    incomplete(phi, r).map(|p| p.1)
}

/// `K(r)`, finite for `r < 1`.
pub fn ellip_k(r: f64) -> Result<f64> {
    if !(r < 1.0) {
        return Err(MuhsError::DomainError(format!("K({r}) needs r < 1")));
    }
    carlson_rf(0.0, 1.0 - r, 1.0)
}

/// `E(r)`, defined for `r <= 1`.
pub fn ellip_e(r: f64) -> Result<f64> {
    if r > 1.0 || r.is_nan() {
        return Err(MuhsError::DomainError(format!("E({r}) needs r <= 1")));
    }
    if r == 1.0 {
        return Ok(1.0);
    }
    let k = carlson_rf(0.0, 1.0 - r, 1.0)?;
    if r == 0.0 {
        return Ok(k);
    }
    Ok(k - r / 3.0 * carlson_rd(0.0, 1.0 - r, 1.0)?)
}

/// `(K - E)/r = R_D(0, 1 - r, 1)/3`, free of cancellation for small `r`.
pub(crate) fn complete_d(r: f64) -> Result<f64> {
    if !(r < 1.0) {
        return Err(MuhsError::DomainError(format!("D({r}) needs r < 1")));
    }
    Ok(carlson_rd(0.0, 1.0 - r, 1.0)? / 3.0)
}

pub fn elliptic(kind: EllipticKind, phi: f64, r: f64) -> Result<f64> {
    match kind {
        EllipticKind::F => ellip_f(phi, r),
        EllipticKind::EIncomplete => ellip_e_inc(phi, r),
        EllipticKind::K => ellip_k(r),
        EllipticKind::EComplete => ellip_e(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn complete_values() {
        assert!((ellip_k(0.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(ellip_e(1.0).unwrap(), 1.0);
        assert!((ellip_e(0.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((ellip_k(0.5).unwrap() - 1.854_074_677_301_372).abs() < 1e-14);
        assert!((ellip_e(0.5).unwrap() - 1.350_643_881_047_675_5).abs() < 1e-14);
        assert!((ellip_k(-1.0).unwrap() - 1.311_028_777_146_06).abs() < 1e-13);
        assert!((ellip_e(-1.0).unwrap() - 1.910_098_894_513_856).abs() < 1e-13);
        let r = -0.37;
        let d = complete_d(r).unwrap();
        assert!((d - (ellip_k(r).unwrap() - ellip_e(r).unwrap()) / r).abs() < 1e-14);
        assert!(ellip_k(1.0).is_err());
        assert!(ellip_e(1.5).is_err());
    }

    #[test]
    fn incomplete_reaches_complete() {
        for r in [-2.0, -0.3, 0.0, 0.2, 0.5, 0.9] {
            let f = ellip_f(PI / 2.0, r).unwrap();
            let e = ellip_e_inc(PI / 2.0, r).unwrap();
            assert!((f - ellip_k(r).unwrap()).abs() < 1e-12);
            assert!((e - ellip_e(r).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_simpson_on_smooth_range() {
        for (phi, r) in [(0.3, 0.4), (1.2, -1.5), (0.9, 0.95), (-0.7, 0.3)] {
            let f = simpson(|t| 1.0 / (1.0 - r * t.sin().powi(2)).sqrt(), 0.0, phi, 2000);
            let e = simpson(|t| (1.0 - r * t.sin().powi(2)).sqrt(), 0.0, phi, 2000);
            assert!((ellip_f(phi, r).unwrap() - f).abs() < 1e-12);
            assert!((ellip_e_inc(phi, r).unwrap() - e).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_endpoint_is_finite() {
        let r = 4.0;
        let phi = (0.5f64).asin();
        let e = ellip_e_inc(phi, r).unwrap();
        let f = ellip_f(phi, r).unwrap();
        // substitution sin t = sin(phi) sin(w) removes the endpoint singularity
        let fs = simpson(|w| 0.5 / (1.0 - 0.25 * w.sin().powi(2)).sqrt(), 0.0, PI / 2.0, 2000);
        let es = simpson(
            |w| 0.5 * w.cos().powi(2) / (1.0 - 0.25 * w.sin().powi(2)).sqrt(),
            0.0,
            PI / 2.0,
            2000,
        );
        assert!((f - fs).abs() < 1e-12, "{f} {fs}");
        assert!((e - es).abs() < 1e-12, "{e} {es}");
        assert!(ellip_f(0.6, r).is_err());
        assert_eq!(elliptic(EllipticKind::K, 0.0, 0.5).unwrap(), ellip_k(0.5).unwrap());
    }
}

//! The right-invariant metric `<u, v> = mu(u) mu(v) + int u_x v_x` at the identity:
//! Christoffel map, coadjoint action and curvature.
//!
//! Products are taken pointwise, so inputs should be band-limited to `|k| < n/4` for
//! every quadrature below to be exact.

use serde::Serialize;

use crate::error::{MuhsError, Result};
use crate::spectral::{ainv_dx, apply_a, apply_a_inverse, derivative, mean, InverseMethod, RealField};

fn pointwise(like: &RealField, f: impl Fn(usize) -> f64) -> RealField {
    RealField::from_samples(like.grid(), (0..like.n()).map(f).collect()).expect("same grid")
}

pub fn metric_inner(u: &RealField, v: &RealField) -> f64 {
    let (ux, vx) = (derivative(u, 1), derivative(v, 1));
    mean(u) * mean(v) + mean(&(&ux * &vx))
}

pub fn metric_norm2(u: &RealField) -> f64 {
    metric_inner(u, u)
}

/// `Gamma(u, v) = -A^{-1} d/dx (mu(u) v + mu(v) u + u_x v_x / 2)`.
pub fn christoffel(u: &RealField, v: &RealField) -> RealField {
    let (mu_u, mu_v) = (mean(u), mean(v));
    let (ux, vx) = (derivative(u, 1), derivative(v, 1));
    let w = pointwise(u, |j| {
        mu_u * v.samples()[j] + mu_v * u.samples()[j] + 0.5 * ux.samples()[j] * vx.samples()[j]
    });
    -&ainv_dx(&w)
}

/// `ad*_v(u) = A^{-1}(2 v_x Au + v (Au)_x)`.
pub fn coadjoint(v: &RealField, u: &RealField) -> RealField {
    let m = apply_a(u);
    let mx = derivative(&m, 1);
    let vx = derivative(v, 1);
    let w = pointwise(u, |j| {
        2.0 * vx.samples()[j] * m.samples()[j] + v.samples()[j] * mx.samples()[j]
    });
    apply_a_inverse(&w, InverseMethod::Spectral)
}

/// `<R(u, v) v, u> = <G(u,v), G(u,v)> - <G(u,u), G(v,v)> - 3 mu(u_x v)^2`.
pub fn curvature_quadratic(u: &RealField, v: &RealField) -> f64 {
    let guv = christoffel(u, v);
    let guu = christoffel(u, u);
    let gvv = christoffel(v, v);
    let cross = mean(&(&derivative(u, 1) * v));
    metric_norm2(&guv) - metric_inner(&guu, &gvv) - 3.0 * cross * cross
}

/// The same quantity expanded into means of products of `u`, `v` and their derivatives.
pub fn curvature_expanded(u: &RealField, v: &RealField) -> f64 {
    let (ux, vx) = (derivative(u, 1), derivative(v, 1));
    let (mu, mv) = (mean(u), mean(v));
    let m = |f: &dyn Fn(usize) -> f64| (0..u.n()).map(f).sum::<f64>() / u.n() as f64;
    let (us, vs, uxs, vxs) = (u.samples(), v.samples(), ux.samples(), vx.samples());
    let v2 = m(&|j| vs[j] * vs[j]);
    let u2 = m(&|j| us[j] * us[j]);
    let vx2 = m(&|j| vxs[j] * vxs[j]);
    let ux2 = m(&|j| uxs[j] * uxs[j]);
    let uv = m(&|j| us[j] * vs[j]);
    let uxvx = m(&|j| uxs[j] * vxs[j]);
    let twist_v = m(&|j| (vs[j] * uxs[j] - us[j] * vxs[j]) * vxs[j]);
    let twist_u = m(&|j| (us[j] * vxs[j] - vs[j] * uxs[j]) * uxs[j]);
    let cross = m(&|j| uxs[j] * vs[j]);
    mu * mu * (v2 + vx2) + mv * mv * (u2 + ux2) + mu * twist_v + mv * twist_u
        - 2.0 * mu * mv * (uv + uxvx)
        - 0.25 * uxvx * uxvx
        + 0.25 * ux2 * vx2
        - 3.0 * cross * cross
}

/// Gram determinant below which a pair is treated as spanning no plane, relative to
/// `|u|^2 |v|^2`.
pub const DEGENERATE_GRAM: f64 = 1e-12;

fn gram_det(u: &RealField, v: &RealField) -> Result<f64> {
    let (uu, vv, uv) = (metric_norm2(u), metric_norm2(v), metric_inner(u, v));
    let det = uu * vv - uv * uv;
    if !(det > DEGENERATE_GRAM * uu * vv) {
        return Err(MuhsError::DegeneratePlane { det });
    }
    Ok(det)
}

/// Sectional curvature of the plane spanned by `u` and `v`.
pub fn sectional(u: &RealField, v: &RealField) -> Result<f64> {
    let det = gram_det(u, v)?;
    Ok(curvature_quadratic(u, v) / det)
}

/// A metric-orthonormal basis of a plane whose second vector has zero mean.
#[derive(Debug, Clone)]
pub struct TangentPair {
    pub u: RealField,
    pub v: RealField,
    pub gram: [[f64; 2]; 2],
}

#[derive(Serialize)]
struct GramView {
    gram: [[f64; 2]; 2],
}

impl TangentPair {
    pub fn gram_json(&self) -> String {
        serde_json::to_string(&GramView { gram: self.gram }).expect("plain numbers")
    }
}

/// Orthonormalizes `(u, v)` with the zero-mean combination `mu(v) u - mu(u) v` (or `v`
/// when both means vanish) as the second vector.
pub fn orthonormal_pair(u: &RealField, v: &RealField) -> Result<TangentPair> {
    gram_det(u, v)?;
    let (mu, mv) = (mean(u), mean(v));
    let mut w = if mu == 0.0 && mv == 0.0 {
        v.clone()
    } else {
        &u.scale(mv) - &v.scale(mu)
    };
    // remove round-off in the mean
    w = w.shift(-mean(&w));
    let nw = metric_norm2(&w).sqrt();
    if !(nw > 0.0) {
        return Err(MuhsError::DegeneratePlane { det: 0.0 });
    }
    let mut e2 = w.scale(1.0 / nw);
    if metric_inner(&e2, v) < 0.0 {
        e2 = -&e2;
    }
    let pick = |a: &RealField| {
        let r = a - &e2.scale(metric_inner(a, &e2));
        let n = metric_norm2(&r).sqrt();
        (r, n / metric_norm2(a).sqrt())
    };
    let (ru, su) = pick(u);
    let (rv, sv) = pick(v);
    let (r, _) = if su >= sv { (ru, su) } else { (rv, sv) };
    let e1 = r.scale(1.0 / metric_norm2(&r).sqrt());
    let gram = [
        [metric_norm2(&e1), metric_inner(&e1, &e2)],
        [metric_inner(&e2, &e1), metric_norm2(&e2)],
    ];
    Ok(TangentPair { u: e1, v: e2, gram })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::rhs;
    use crate::spectral::{random_band_limited, PeriodicGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::new(64).unwrap()
    }

    #[test]
    fn metric_examples() {
        let g = grid();
        let one = RealField::constant(g, 1.0);
        let s = RealField::from_fn(g, |x| (2.0 * PI * x).sin());
        let c = RealField::from_fn(g, |x| (2.0 * PI * x).cos());
        assert!((metric_inner(&one, &one) - 1.0).abs() < 1e-15);
        assert!(metric_inner(&one, &s).abs() < 1e-15);
        assert!((metric_inner(&c, &c) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn christoffel_properties() {
        let g = grid();
        let one = RealField::constant(g, 1.0);
        assert!(christoffel(&one, &one).max_abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_band_limited(g, 8, &mut rng);
        let v = random_band_limited(g, 8, &mut rng);
        assert!((&christoffel(&u, &v) - &christoffel(&v, &u)).max_abs() < 1e-12);
        // Gamma(u, v) = ((uv)_x - ad*_v u - ad*_u v) / 2
        let alt = (&(&derivative(&(&u * &v), 1) - &coadjoint(&v, &u)) - &coadjoint(&u, &v)).scale(0.5);
        assert!((&christoffel(&u, &v) - &alt).max_abs() < 1e-10);
    }

    #[test]
    fn coadjoint_properties() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = random_band_limited(g, 8, &mut rng);
        let v = random_band_limited(g, 8, &mut rng);
        let w = random_band_limited(g, 8, &mut rng);
        let lhs = metric_inner(&coadjoint(&v, &u), &w);
        let bracket = &(&derivative(&v, 1) * &w) - &(&v * &derivative(&w, 1));
        let rhs_ = metric_inner(&u, &bracket);
        assert!((lhs - rhs_).abs() < 1e-9 * lhs.abs().max(1.0));
        let c = RealField::constant(g, 2.5);
        assert!((&coadjoint(&c, &u) - &derivative(&u, 1).scale(2.5)).max_abs() < 1e-11);
        assert!((&rhs(&u, 0.0) + &coadjoint(&u, &u)).max_abs() < 1e-10);
    }

    #[test]
    fn curvature_formulas_agree() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let u = random_band_limited(g, 8, &mut rng);
            let v = random_band_limited(g, 8, &mut rng);
            let a = curvature_quadratic(&u, &v);
            let b = curvature_expanded(&u, &v);
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{a} {b}");
        }
        let u = random_band_limited(g, 8, &mut rng);
        assert!(curvature_quadratic(&u, &u).abs() < 1e-10);
    }

    #[test]
    fn vertical_and_horizontal_planes() {
        let g = grid();
        let one = RealField::constant(g, 1.0);
        for n in 1..=5 {
            let k = 2.0 * PI * n as f64;
            let v = RealField::from_fn(g, |x| 2f64.sqrt() * (k * x).sin() / k);
            assert!((sectional(&one, &v).unwrap() - 1.0 / (k * k)).abs() < 1e-12);
        }
        let v = RealField::from_fn(g, |x| (2.0 * PI * x).sin() + 0.3 * (6.0 * PI * x).cos());
        let int_v2 = mean(&(&v * &v));
        let int_vx2 = mean(&derivative(&v, 1).map(|d| d * d));
        assert!((sectional(&one, &v).unwrap() - int_v2 / int_vx2).abs() < 1e-12);
        let bound = 0.25 * (1.0 - 3.0 / (PI * PI));
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let u = random_band_limited(g, 8, &mut rng);
            let w = random_band_limited(g, 8, &mut rng);
            let (u, w) = (u.shift(-mean(&u)), w.shift(-mean(&w)));
            let p = orthonormal_pair(&u, &w).unwrap();
            let k = sectional(&p.u, &p.v).unwrap();
            let cross = mean(&(&derivative(&p.u, 1) * &p.v));
            assert!((k - (0.25 - 3.0 * cross * cross)).abs() < 1e-9);
            assert!(k >= bound - 1e-9);
        }
    }

    #[test]
    fn orthonormalization() {
        let g = grid();
        let one = RealField::constant(g, 1.0);
        let s = RealField::from_fn(g, |x| (2.0 * PI * x).sin());
        let p = orthonormal_pair(&one, &one.zip_map(&s, |a, b| a + b)).unwrap();
        assert!((&p.u - &one).max_abs() < 1e-12);
        let want = s.scale(1.0 / metric_norm2(&s).sqrt());
        assert!((&p.v - &want).max_abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = random_band_limited(g, 8, &mut rng);
        let v = random_band_limited(g, 8, &mut rng);
        let q = orthonormal_pair(&u, &v).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((q.gram[i][j] - id).abs() < 1e-12);
            }
        }
        assert!(mean(&q.v).abs() < 1e-14);
        let before = sectional(&u, &v).unwrap();
        assert!((sectional(&q.u, &q.v).unwrap() - before).abs() < 1e-9);
        let sum = &u + &v;
        assert!((sectional(&sum, &v).unwrap() - before).abs() < 1e-9);
        assert!(matches!(
            sectional(&u, &u.scale(2.0)),
            Err(MuhsError::DegeneratePlane { .. })
        ));
        assert!(q.gram_json().contains("gram"));
    }
}

//! Bihamiltonian pair, the ladder of conserved functionals and the Virasoro-side
//! structures.

use crate::error::{MuhsError, Result};
use crate::evolution::rhs;
use crate::spectral::{
    apply_a, apply_a_inverse, dealias, derivative, integral, mean, periodic_antiderivative,
    InverseMethod, RealField,
};

/// Relative floor used for `m > 0`: the minimum must exceed this times the maximum.
pub const POSITIVITY_FLOOR: f64 = 1e-8;

/// Index of a conserved functional `H_n`, `n` in `-3..=2`. `H_{-3}` has a gradient only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FunctionalId(i32);

impl FunctionalId {
    pub const ALL: [FunctionalId; 6] = [
        FunctionalId(-3),
        FunctionalId(-2),
        FunctionalId(-1),
        FunctionalId(0),
        FunctionalId(1),
        FunctionalId(2),
    ];

    pub fn new(index: i32) -> Result<Self> {
        if (-3..=2).contains(&index) {
            Ok(Self(index))
        } else {
            Err(MuhsError::InvalidParams(format!(
                "functional index {index} outside -3..=2"
            )))
        }
    }

    pub fn index(self) -> i32 {
        self.0
    }

    fn needs_positive_momentum(self) -> bool {
        self.0 < 0
    }
}

/// A point `(m, a)` of the dual of the Virasoro algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct VirasoroPoint {
    pub m: RealField,
    pub a: f64,
}

/// `m = A u = mu(u) - u_xx`.
pub fn momentum(u: &RealField) -> RealField {
    apply_a(u)
}

/// Fails unless `min m > POSITIVITY_FLOOR * max m` with `max m > 0`.
pub fn check_positive(m: &RealField) -> Result<()> {
    let (lo, hi) = (m.min(), m.max());
    if hi > 0.0 && lo > POSITIVITY_FLOOR * hi {
        Ok(())
    } else {
        Err(MuhsError::NonPositiveMomentum { min: lo, max: hi })
    }
}

/// `B1 f = -(m f_x + (m f)_x)`.
pub fn b1(m: &RealField, f: &RealField) -> RealField {
    let p1 = dealias(&(m * &derivative(f, 1)));
    let p2 = derivative(&dealias(&(m * f)), 1);
    -&(&p1 + &p2)
}

/// `B2 f = f_xxx`.
pub fn b2(f: &RealField) -> RealField {
    derivative(f, 3)
}

pub fn functional_value(id: FunctionalId, u: &RealField) -> Result<f64> {
    let m = momentum(u);
    if id.needs_positive_momentum() {
        check_positive(&m)?;
    }
    let v = match id.index() {
        -2 => {
            let mx = derivative(&m, 1);
            -integral(&mx.zip_map(&m, |d, m| d * d / m.powf(2.5))) / 16.0
        }
        -1 => integral(&m.map(f64::sqrt)),
        0 => integral(&m),
        1 => 0.5 * integral(&(u * &m)),
        2 => {
            let mu = mean(u);
            let ux = derivative(u, 1);
            integral(&u.zip_map(&ux, |u, d| mu * u * u + 0.5 * u * d * d))
        }
        _ => {
            return Err(MuhsError::InvalidParams(
                "H_{-3} is available through its gradient only".into(),
            ))
        }
    };
    Ok(v)
}

/// Variational derivative `delta H / delta m`.
pub fn gradient(id: FunctionalId, u: &RealField) -> Result<RealField> {
    let m = momentum(u);
    if id.needs_positive_momentum() {
        check_positive(&m)?;
    }
    Ok(match id.index() {
        -3 => {
            let d1 = derivative(&m, 1);
            let d2 = derivative(&m, 2);
            let d3 = derivative(&m, 3);
            let d4 = derivative(&m, 4);
            let s = m.samples();
            let samples = (0..m.n())
                .map(|j| {
                    let (m, a, b, c, d) = (s[j], d1.samples()[j], d2.samples()[j], d3.samples()[j], d4.samples()[j]);
                    1155.0 * a.powi(4) / (1024.0 * m.powf(6.5))
                        - 231.0 * a * a * b / (128.0 * m.powf(5.5))
                        + 21.0 * b * b / (64.0 * m.powf(4.5))
                        + 7.0 * a * c / (16.0 * m.powf(4.5))
                        - d / (16.0 * m.powf(3.5))
                })
                .collect();
            RealField::from_samples(m.grid(), samples)?
        }
        -2 => {
            let d1 = derivative(&m, 1);
            let d2 = derivative(&m, 2);
            let t = d2.zip_map(&m, |b, m| b / (8.0 * m.powf(2.5)));
            let s = d1.zip_map(&m, |a, m| 5.0 * a * a / (32.0 * m.powf(3.5)));
            &t - &s
        }
        -1 => m.map(|m| 0.5 / m.sqrt()),
        0 => RealField::constant(u.grid(), 1.0),
        1 => u.clone(),
        _ => {
            let mu = mean(u);
            let mu2 = mean(&(u * u));
            let ux = derivative(u, 1);
            let uxx = derivative(u, 2);
            let s: Vec<f64> = (0..u.n())
                .map(|j| {
                    let (v, a, b) = (u.samples()[j], ux.samples()[j], uxx.samples()[j]);
                    mu2 + 2.0 * mu * v - 0.5 * a * a - v * b
                })
                .collect();
            apply_a_inverse(&RealField::from_samples(u.grid(), s)?, InverseMethod::Spectral)
        }
    })
}

/// One step down the ladder: `-(1/(2 sqrt m)) P` with `P` the zero-mean periodic
/// antiderivative of `f_xxx / sqrt m`.
pub fn lower(f: &RealField, m: &RealField) -> Result<RealField> {
    check_positive(m)?;
    let sq = m.map(f64::sqrt);
    let g = derivative(f, 3).zip_map(&sq, |a, s| a / s);
    let mu = mean(&g);
    let tol = 1e-8 * g.max_abs().max(1.0);
    if mu.abs() > tol {
        return Err(MuhsError::NonPeriodicAntiderivative { mean: mu, tol });
    }
    let p = periodic_antiderivative(&g);
    Ok(p.zip_map(&sq, |p, s| -p / (2.0 * s)))
}

/// `H_{-n} = (1/(3/2 - n)) int m delta H_{-n}/delta m` for `n` in `1..=3`.
pub fn hn_from_gradient(n: u32, u: &RealField) -> Result<f64> {
    if !(1..=3).contains(&n) {
        return Err(MuhsError::InvalidParams(format!("n = {n} outside 1..=3")));
    }
    let g = gradient(FunctionalId(-(n as i32)), u)?;
    let m = momentum(u);
    Ok(integral(&(&m * &g)) / (1.5 - n as f64))
}

/// Commuting flow `m_t = B1 delta H / delta m`.
pub fn flow_field(id: FunctionalId, u: &RealField) -> Result<RealField> {
    let g = gradient(id, u)?;
    Ok(b1(&momentum(u), &g))
}

/// Sup-norm distances `(|B1 u - B2 dH2|, |B1 u - (-2 m u_x - m_x u)|)`.
pub fn bihamiltonian_residual(u: &RealField) -> (f64, f64) {
    let m = momentum(u);
    let first = b1(&m, u);
    let second = b2(&gradient(FunctionalId(2), u).expect("H_2 gradient needs no positivity"));
    let ux = derivative(u, 1);
    let mx = derivative(&m, 1);
    let direct = RealField::from_samples(
        u.grid(),
        (0..u.n())
            .map(|j| -2.0 * m.samples()[j] * ux.samples()[j] - mx.samples()[j] * u.samples()[j])
            .collect(),
    )
    .expect("same grid");
    ((&first - &second).max_abs(), (&first - &direct).max_abs())
}

/// Coadjoint action of `(v, b)` on `(m, a)`: `(m_x v + 2 m v_x + a v_xxx, 0)`.
pub fn virasoro_coadjoint(v: &RealField, _b: f64, p: &VirasoroPoint) -> VirasoroPoint {
    let mx = derivative(&p.m, 1);
    let vx = derivative(v, 1);
    let vxxx = derivative(v, 3);
    let s = (0..v.n())
        .map(|j| {
            mx.samples()[j] * v.samples()[j]
                + 2.0 * p.m.samples()[j] * vx.samples()[j]
                + p.a * vxxx.samples()[j]
        })
        .collect();
    VirasoroPoint {
        m: RealField::from_samples(v.grid(), s).expect("same grid"),
        a: 0.0,
    }
}

/// Flow of the frozen bracket at `p0`: `-m0_x h - 2 m0 h_x - a0 h_xxx`.
pub fn frozen_flow(h: &RealField, p0: &VirasoroPoint) -> RealField {
    let mx = derivative(&p0.m, 1);
    let hx = derivative(h, 1);
    let hxxx = derivative(h, 3);
    let s = (0..h.n())
        .map(|j| {
            -mx.samples()[j] * h.samples()[j]
                - 2.0 * p0.m.samples()[j] * hx.samples()[j]
                - p0.a * hxxx.samples()[j]
        })
        .collect();
    RealField::from_samples(h.grid(), s).expect("same grid")
}

/// The three evaluations of `m_t` for the equation with the `k` term.
#[derive(Debug, Clone)]
pub struct VirasoroRoutes {
    pub evolution: RealField,
    pub lie_poisson: RealField,
    pub frozen: RealField,
}

pub fn virasoro_routes(u: &RealField, k: f64) -> VirasoroRoutes {
    let evolution = apply_a(&rhs(u, k));

    let ut = u.shift(-k);
    let mt = momentum(&ut);
    let lp = virasoro_coadjoint(&ut, 0.0, &VirasoroPoint { m: mt, a: -k });
    let lie_poisson = -&lp.m;

    let h = &gradient(FunctionalId(2), &ut).expect("H_2 gradient needs no positivity")
        + &ut.scale(k);
    let origin = VirasoroPoint {
        m: RealField::constant(u.grid(), 0.0),
        a: -1.0,
    };
    let frozen = frozen_flow(&h, &origin);
    VirasoroRoutes {
        evolution,
        lie_poisson,
        frozen,
    }
}

/// Largest pairwise sup-distance between the three evaluations of `m_t`.
pub fn virasoro_equivalence_residual(u: &RealField, k: f64) -> f64 {
    let r = virasoro_routes(u, k);
    let d1 = (&r.evolution - &r.lie_poisson).max_abs();
    let d2 = (&r.evolution - &r.frozen).max_abs();
    let d3 = (&r.lie_poisson - &r.frozen).max_abs();
    d1.max(d2).max(d3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_band_limited, PeriodicGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn g(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(n).unwrap()
    }

    fn id(i: i32) -> FunctionalId {
        FunctionalId::new(i).unwrap()
    }

    fn cos_field(n: usize, a: f64, amp: f64) -> RealField {
        RealField::from_fn(g(n), |x| a + amp * (2.0 * PI * x).cos())
    }

    #[test]
    fn momentum_examples() {
        let u = cos_field(64, 0.7, 1.0);
        let want = cos_field(64, 0.7, 4.0 * PI * PI);
        assert!((&momentum(&u) - &want).max_abs() < 1e-11);
    }

    #[test]
    fn b1_examples() {
        let grid = g(64);
        let one = RealField::constant(grid, 1.0);
        let s = RealField::from_fn(grid, |x| (2.0 * PI * x).sin());
        let want = RealField::from_fn(grid, |x| -4.0 * PI * (2.0 * PI * x).cos());
        assert!((&b1(&one, &s) - &want).max_abs() < 1e-12);
        let m = cos_field(64, 2.0, 0.5);
        assert!((&b1(&m, &one) + &derivative(&m, 1)).max_abs() < 1e-12);
    }

    #[test]
    fn b2_examples() {
        let grid = g(64);
        let s = RealField::from_fn(grid, |x| (2.0 * PI * x).sin());
        let want = RealField::from_fn(grid, |x| -8.0 * PI.powi(3) * (2.0 * PI * x).cos());
        assert!((&b2(&s) - &want).max_abs() < 1e-11 * want.max_abs() * 64.0);
        let u = cos_field(64, 0.3, 0.2);
        assert!((&b2(&u) + &derivative(&momentum(&u), 1)).max_abs() < 1e-10);
    }

    #[test]
    fn constant_functionals() {
        let c = 2.5;
        let u = RealField::constant(g(32), c);
        let v = |i| functional_value(id(i), &u).unwrap();
        assert!((v(-2)).abs() < 1e-15);
        assert!((v(-1) - c.sqrt()).abs() < 1e-14);
        assert!((v(0) - c).abs() < 1e-14);
        assert!((v(1) - c * c / 2.0).abs() < 1e-13);
        assert!((v(2) - c.powi(3)).abs() < 1e-12);
        assert!(functional_value(id(-3), &u).is_err());
    }

    #[test]
    fn negative_functionals_need_positive_momentum() {
        let u = cos_field(64, 0.2, 1.0);
        assert!(matches!(
            functional_value(id(-1), &u),
            Err(MuhsError::NonPositiveMomentum { .. })
        ));
        assert!(gradient(id(-2), &u).is_err());
        assert!(functional_value(id(1), &u).is_ok());
    }

    #[test]
    fn h1_matches_energy_identity() {
        let u = RealField::from_fn(g(64), |x| 1.0 + 0.1 * (2.0 * PI * x).sin());
        let ux = derivative(&u, 1);
        let oracle = 0.5 * (mean(&u).powi(2) + integral(&(&ux * &ux)));
        assert!((functional_value(id(1), &u).unwrap() - oracle).abs() < 1e-13);
    }

    #[test]
    fn simple_gradients() {
        let u = RealField::constant(g(32), 4.0);
        assert!((&gradient(id(-1), &u).unwrap().shift(-0.25)).max_abs() < 1e-15);
        assert!((&gradient(id(0), &u).unwrap().shift(-1.0)).max_abs() < 1e-15);
    }

    #[test]
    fn lower_of_constant_momentum_vanishes() {
        let grid = g(64);
        let m = RealField::constant(grid, 3.0);
        let f = cos_field(64, 0.0, 1.0).map(|v| v * v);
        let r = lower(&RealField::constant(grid, 1.0), &m).unwrap();
        assert!(r.max_abs() < 1e-15);
        assert!(lower(&f, &m).is_ok());
    }

    #[test]
    fn lower_rejects_nonperiodic_input() {
        let grid = g(64);
        let m = cos_field(64, 1.0, 0.5);
        let f = RealField::from_fn(grid, |x| (2.0 * PI * x).sin());
        assert!(matches!(
            lower(&f, &m),
            Err(MuhsError::NonPeriodicAntiderivative { .. })
        ));
    }

    #[test]
    fn flow_table() {
        let grid = g(128);
        let u = apply_a_inverse(&cos_field(128, 1.0, 0.2), InverseMethod::Spectral);
        let m = momentum(&u);
        assert!(flow_field(id(-1), &u).unwrap().max_abs() < 1e-9);
        let f0 = flow_field(id(0), &u).unwrap();
        assert!((&f0 + &derivative(&m, 1)).max_abs() < 1e-12);
        let fm2 = flow_field(id(-2), &u).unwrap();
        let want = b2(&gradient(id(-1), &u).unwrap());
        assert!((&fm2 - &want).max_abs() < 1e-7 * want.max_abs().max(1.0));
        let _ = grid;
    }

    #[test]
    fn bihamiltonian_residual_examples() {
        let (a, b) = bihamiltonian_residual(&RealField::constant(g(64), 0.8));
        assert!(a < 1e-12 && b < 1e-12);
        let (a, b) = bihamiltonian_residual(&cos_field(256, 1.0, 0.1));
        assert!(a < 1e-7 && b < 1e-7, "{a} {b}");
        let u = RealField::from_fn(g(256), |x| {
            0.5 + 0.05 * ((2.0 * PI * x).sin() + (4.0 * PI * x).cos())
        });
        let (a, b) = bihamiltonian_residual(&u);
        assert!(a < 1e-7 && b < 1e-7, "{a} {b}");
    }

    #[test]
    fn coadjoint_examples() {
        let grid = g(64);
        let one = RealField::constant(grid, 1.0);
        let m = cos_field(64, 1.0, 0.3);
        let p = VirasoroPoint { m: m.clone(), a: 2.0 };
        let r = virasoro_coadjoint(&one, 5.0, &p);
        assert!((&r.m - &derivative(&m, 1)).max_abs() < 1e-13);
        assert_eq!(r.a, 0.0);
        let s = RealField::from_fn(grid, |x| (2.0 * PI * x).sin());
        let p = VirasoroPoint {
            m: RealField::constant(grid, 0.0),
            a: 1.0,
        };
        let want = RealField::from_fn(grid, |x| -8.0 * PI.powi(3) * (2.0 * PI * x).cos());
        assert!((&virasoro_coadjoint(&s, 0.0, &p).m - &want).max_abs() < 1e-11 * want.max_abs() * 64.0);
        assert_eq!(
            virasoro_coadjoint(&s, 0.0, &p),
            virasoro_coadjoint(&s, 9.0, &p)
        );
    }

    #[test]
    fn frozen_flow_examples() {
        let grid = g(64);
        let s = RealField::from_fn(grid, |x| (2.0 * PI * x).sin());
        let p = VirasoroPoint {
            m: RealField::constant(grid, 0.0),
            a: 1.0,
        };
        let want = RealField::from_fn(grid, |x| 8.0 * PI.powi(3) * (2.0 * PI * x).cos());
        assert!((&frozen_flow(&s, &p) - &want).max_abs() < 1e-11 * want.max_abs() * 64.0);
        let h = RealField::constant(grid, 3.0);
        assert!(frozen_flow(&h, &p).max_abs() < 1e-12);
    }

    #[test]
    fn virasoro_three_routes_agree() {
        for k in [0.0, 0.5] {
            let c = RealField::constant(g(64), 1.3);
            assert!(virasoro_equivalence_residual(&c, k) < 1e-10);
            let u = cos_field(128, 1.0, 0.1);
            let r = virasoro_equivalence_residual(&u, k);
            assert!(r < 1e-7, "k = {k}: {r}");
        }
    }

    #[test]
    fn skew_symmetry() {
        let grid = g(128);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let f = random_band_limited(grid, 12, &mut rng);
            let gg = random_band_limited(grid, 12, &mut rng);
            let m = random_band_limited(grid, 12, &mut rng);
            let l = integral(&(&f * &b1(&m, &gg)));
            let r = integral(&(&gg * &b1(&m, &f)));
            assert!((l + r).abs() < 1e-10);
            let l = integral(&(&f * &b2(&gg)));
            let r = integral(&(&gg * &b2(&f)));
            assert!((l + r).abs() < 1e-10 * (1.0 + l.abs()));
        }
    }
}

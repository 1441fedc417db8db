//! Seeded property checks behind `muhs selftest`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cli::init::{random_spec_text, round_trips};
use crate::evolution::{integrate, rhs, EvolutionConfig};
use crate::geometry::{coadjoint, curvature_expanded, curvature_quadratic};
use crate::hierarchy::{bihamiltonian_residual, virasoro_equivalence_residual};
use crate::spectral::{
    apply_a, apply_a_inverse, random_band_limited, InverseMethod, PeriodicGrid, RealField,
};
use crate::waves::elliptic::{ellip_e, ellip_k};
use crate::waves::{mu_constraint, muhs_period, wave_stats};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &'static str, value: f64, tol: f64) -> Self {
        Self { name, value, tol, pass: value <= tol }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<28} {:.3e} <= {:.0e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tol
        )
    }
}

fn rel(a: &RealField, b: &RealField) -> f64 {
    (a - b).max_abs() / b.max_abs().max(1e-300)
}

pub fn run(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = PeriodicGrid::new(128).expect("valid size");
    let mut out = Vec::new();

    let (mut round, mut methods, mut curv, mut coad) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let u = random_band_limited(g, 16, &mut rng);
        let v = random_band_limited(g, 16, &mut rng);
        let s = apply_a_inverse(&u, InverseMethod::Spectral);
        let q = apply_a_inverse(&u, InverseMethod::Quadrature);
        round = round.max(rel(&apply_a(&s), &u));
        methods = methods.max(rel(&q, &s));
        let (a, b) = (curvature_quadratic(&u, &v), curvature_expanded(&u, &v));
        curv = curv.max((a - b).abs() / a.abs().max(1.0));
        coad = coad.max((&rhs(&u, 0.0) + &coadjoint(&u, &u)).max_abs() / u.max_abs());
    }
    out.push(Check::new("inverse_round_trip", round, 1e-10));
    out.push(Check::new("inverse_methods_agree", methods, 1e-10));
    out.push(Check::new("curvature_two_formulas", curv, 1e-10));
    out.push(Check::new("euler_equals_coadjoint", coad, 1e-9));

    let gh = PeriodicGrid::new(256).expect("valid size");
    let m = RealField::from_fn(gh, |x| 1.0 + 0.3 * (2.0 * PI * x).cos());
    let (r1, r2) = bihamiltonian_residual(&m);
    out.push(Check::new("bihamiltonian_pair", r1.max(r2), 1e-7));
    let mv = RealField::from_fn(g, |x| 1.0 + 0.3 * (2.0 * PI * x).cos());
    let vir = [0.0, 0.5]
        .iter()
        .map(|&k| virasoro_equivalence_residual(&mv, k))
        .fold(0.0, f64::max);
    out.push(Check::new("virasoro_three_routes", vir, 1e-7));

    let mut grammar = 0.0;
    for _ in 0..100 {
        let text = random_spec_text(&mut rng);
        if !matches!(round_trips(&text), Ok(true)) {
            grammar += 1.0;
        }
    }
    out.push(Check::new("init_grammar_round_trip", grammar, 0.0));

    // Legendre's relation E K' + E' K - K K' = pi/2
    let r: f64 = 0.3;
    let leg = match (ellip_k(r), ellip_e(r), ellip_k(1.0 - r), ellip_e(1.0 - r)) {
        (Ok(k), Ok(e), Ok(kp), Ok(ep)) => (e * kp + ep * k - k * kp - PI / 2.0).abs(),
        _ => f64::INFINITY,
    };
    out.push(Check::new("legendre_relation", leg, 1e-13));

    let (c, lo, hi) = (1.0, 0.3, 0.8);
    let waves = match (mu_constraint(c, lo, hi), muhs_period(c, lo, hi)) {
        (Ok(mu), Ok(p)) => match wave_stats(c, lo, hi, mu) {
            Ok(s) => (s.period - p).abs().max((s.mean - mu).abs()),
            Err(_) => f64::INFINITY,
        },
        _ => f64::INFINITY,
    };
    out.push(Check::new("wave_constraint_routes", waves, 1e-10));

    let gs = PeriodicGrid::new(64).expect("valid size");
    let u0 = RealField::from_fn(gs, |x| 1.0 + 0.3 * (2.0 * PI * x).cos());
    let drift = match integrate(&u0, &EvolutionConfig::new(64, 0.1)) {
        Ok(t) if t.is_completed() => t.drift(|d| d.mu).max(t.drift(|d| d.h1) / t.diagnostics[0].h1),
        _ => f64::INFINITY,
    };
    out.push(Check::new("short_run_conservation", drift, 1e-7));
    out
}

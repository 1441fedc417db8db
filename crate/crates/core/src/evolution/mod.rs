//! Time integration of the evolution equation, optionally with the Virasoro `k`
//! term, plus blow-up and global-existence classification, the Lagrangian flow map
//! and the Hill spectrum.

mod classify;
mod flow;
mod hill;

pub use classify::{classify_initial, hs_blowup_time, Verdict, VerdictTag};
pub use flow::{flow_map, local_conservation_residual, FlowMap};
pub use hill::{hill_spectrum, isospectrality_drift};

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{MuhsError, Result};
use crate::hierarchy::{functional_value, FunctionalId};
use crate::spectral::{
    ainv_dx, apply_a, dealias, derivative, mean, translate, PeriodicGrid, RealField,
};

/// `u_t = -u u_x - A^{-1} d/dx (2 mu(u) u - 2 k u + u_x^2 / 2)`.
pub fn rhs(u: &RealField, k: f64) -> RealField {
    let mu = mean(u);
    let ux = derivative(u, 1);
    let w = u.zip_map(&ux, |v, d| 2.0 * mu * v - 2.0 * k * v + 0.5 * d * d);
    let transport = u.zip_map(&ux, |v, d| -v * d);
    &transport - &ainv_dx(&w)
}

/// The constant `r0 = -2 mu^2 - mu(u_x^2) / 2` of the integrated form.
pub fn r0(u: &RealField) -> f64 {
    let mu = mean(u);
    let ux = derivative(u, 1);
    -2.0 * mu * mu - 0.5 * mean(&(&ux * &ux))
}

/// `max |d/dx rhs(u, 0) - (2 mu u - u u_xx - u_x^2 / 2 + r0)|`.
pub fn integrated_form_residual(u: &RealField) -> f64 {
    let mu = mean(u);
    let r = r0(u);
    let ux = derivative(u, 1);
    let uxx = derivative(u, 2);
    let lhs = derivative(&rhs(u, 0.0), 1);
    (0..u.n())
        .map(|j| {
            let (v, a, b) = (u.samples()[j], ux.samples()[j], uxx.samples()[j]);
            let int = 2.0 * mu * v - v * b - 0.5 * a * a + r;
            (lhs.samples()[j] - int).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionConfig {
    pub n: usize,
    pub t_end: f64,
    pub cfl: f64,
    pub dt_min: f64,
    pub k: f64,
    pub dealias: bool,
    pub blowup_slope_threshold: f64,
    /// Fraction of the non-mean spectral energy allowed in the band `n/6 < |k| <= n/3`
    /// before the solution counts as under-resolved.
    pub tail_tolerance: f64,
    pub max_snapshots: usize,
    /// Integrate `u - mu(u0)` in the frame moving with speed `mu(u0)`, where it solves
    /// the same equation with `k - mu(u0)` in place of `k`. Results are reported in
    /// the lab frame.
    pub comoving: bool,
}

impl EvolutionConfig {
    pub fn new(n: usize, t_end: f64) -> Self {
        Self {
            n,
            t_end,
            cfl: 0.3,
            dt_min: 1e-9,
            k: 0.0,
            dealias: true,
            blowup_slope_threshold: 1e4,
            tail_tolerance: 1e-6,
            max_snapshots: 512,
            comoving: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        PeriodicGrid::new(self.n)?;
        let bad = |what: &str| Err(MuhsError::InvalidParams(what.to_string()));
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be finite and non-negative");
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl must lie in (0, 1]");
        }
        if !(self.dt_min > 0.0) {
            return bad("dt_min must be positive");
        }
        if !self.k.is_finite() {
            return bad("k must be finite");
        }
        if !(self.blowup_slope_threshold > 0.0) {
            return bad("blow-up slope threshold must be positive");
        }
        if self.max_snapshots < 2 {
            return bad("at least two snapshots are required");
        }
        Ok(())
    }
}

/// Per-step record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub mu: f64,
    pub h1: f64,
    pub h0: f64,
    pub h2: f64,
    /// `H_{-1}`, present only while `m = Au` stays positive.
    pub hm1: Option<f64>,
    pub r0: f64,
    pub min_ux: f64,
    pub max_abs_u: f64,
    /// Step that produced this sample; zero for the initial state.
    pub dt: f64,
}

impl Diagnostics {
    pub fn of(t: f64, dt: f64, u: &RealField) -> Self {
        let ux = derivative(u, 1);
        let val = |i| functional_value(FunctionalId::new(i).expect("valid index"), u);
        Self {
            t,
            mu: mean(u),
            h1: val(1).expect("H_1 is unconditional"),
            h0: val(0).expect("H_0 is unconditional"),
            h2: val(2).expect("H_2 is unconditional"),
            hm1: val(-1).ok(),
            r0: r0(u),
            min_ux: ux.min(),
            max_abs_u: u.max_abs(),
            dt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlowupReason {
    SlopeThreshold,
    StepCollapse,
    Underresolved,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Outcome {
    Completed,
    NumericalBlowup { t_est: f64, reason: BlowupReason },
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    /// Index of the accepted step that produced this state.
    pub step: usize,
    pub u: RealField,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: EvolutionConfig,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<Diagnostics>,
    pub steps: Vec<f64>,
    pub outcome: Outcome,
    /// Speed of the integration frame; zero unless `config.comoving`.
    pub frame_speed: f64,
}

impl Trajectory {
    pub fn initial(&self) -> &RealField {
        &self.snapshots[0].u
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory is never empty")
    }

    pub fn t_final(&self) -> f64 {
        self.diagnostics.last().map(|d| d.t).unwrap_or(0.0)
    }

    pub fn is_completed(&self) -> bool {
        self.outcome == Outcome::Completed
    }

    /// Largest deviation of a diagnostic from its initial value.
    pub fn drift(&self, f: impl Fn(&Diagnostics) -> f64) -> f64 {
        let d0 = f(&self.diagnostics[0]);
        self.diagnostics
            .iter()
            .map(|d| (f(d) - d0).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn velocity(u: &RealField, k: f64, dealiased: bool) -> RealField {
    let r = rhs(u, k);
    if dealiased {
        dealias(&r)
    } else {
        r
    }
}

pub(crate) fn rk4_step(u: &RealField, dt: f64, k: f64, dealiased: bool) -> RealField {
    let f = |v: &RealField| velocity(v, k, dealiased);
    let k1 = f(u);
    let k2 = f(&u.zip_map(&k1, |a, b| a + 0.5 * dt * b));
    let k3 = f(&u.zip_map(&k2, |a, b| a + 0.5 * dt * b));
    let k4 = f(&u.zip_map(&k3, |a, b| a + dt * b));
    let s = (0..u.n())
        .map(|j| {
            u.samples()[j]
                + dt / 6.0
                    * (k1.samples()[j]
                        + 2.0 * k2.samples()[j]
                        + 2.0 * k3.samples()[j]
                        + k4.samples()[j])
        })
        .collect();
    RealField::from_samples(u.grid(), s).expect("same grid")
}

/// Share of the non-mean spectral energy carried by `n/6 < |k| <= n/3`.
pub fn tail_fraction(u: &RealField) -> f64 {
    let n = u.n() as i64;
    let (mut band, mut total) = (0.0, 0.0);
    for (j, z) in u.coeffs().iter().enumerate() {
        let k = u.grid().wavenumber(j).abs();
        if k == 0 {
            continue;
        }
        let e = z.norm_sqr();
        total += e;
        if 6 * k > n && 3 * k <= n {
            band += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        band / total
    }
}

/// Zero of the least-squares line through `(t, -1/min u_x)`.
fn riccati_extrapolation(window: &VecDeque<(f64, f64)>, t_now: f64) -> f64 {
    let pts: Vec<(f64, f64)> = window
        .iter()
        .filter(|(_, s)| *s < 0.0)
        .map(|&(t, s)| (t, -1.0 / s))
        .collect();
    if pts.len() < 2 {
        return t_now;
    }
    let nn = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / nn;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / nn;
    let stt: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    if stt <= 0.0 {
        return t_now;
    }
    let slope = sty / stt;
    if slope >= 0.0 {
        return t_now;
    }
    (tm - ym / slope).max(t_now)
}

const RICCATI_WINDOW: usize = 20;

/// Classical RK4 from `u0` to `cfg.t_end`, stopping early on numerical blow-up.
pub fn integrate(u0: &RealField, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if u0.n() != cfg.n {
        return Err(MuhsError::GridMismatch {
            expected: cfg.n,
            actual: u0.n(),
        });
    }
    if !u0.is_finite() {
        return Err(MuhsError::InvalidParams("initial data is not finite".into()));
    }
    let h = u0.grid().h();
    let slots = cfg.max_snapshots - 1;
    let target = |i: usize| cfg.t_end * i as f64 / slots as f64;

    let c = if cfg.comoving { mean(u0) } else { 0.0 };
    let k = cfg.k - c;
    let lab = |w: &RealField, t: f64| {
        if c == 0.0 {
            w.clone()
        } else {
            translate(w, c * t).shift(c)
        }
    };
    let mut u = u0.shift(-c);
    let mut t = 0.0;
    let mut next = 1usize;
    let mut snapshots = vec![Snapshot {
        t,
        step: 0,
        u: u0.clone(),
    }];
    let mut diagnostics = vec![Diagnostics::of(0.0, 0.0, u0)];
    let mut steps = Vec::new();
    let mut window = VecDeque::with_capacity(RICCATI_WINDOW + 1);
    window.push_back((0.0, diagnostics[0].min_ux));
    let mut outcome = Outcome::Completed;

    while cfg.t_end > 0.0 && next <= slots {
        let ux_max = derivative(&u, 1).max_abs();
        let mut dt = cfg.cfl * h / (u.max_abs() + 1.0);
        if ux_max > 0.0 {
            dt = dt.min(cfg.cfl / ux_max);
        }
        if dt < cfg.dt_min {
            outcome = Outcome::NumericalBlowup {
                t_est: riccati_extrapolation(&window, t),
                reason: BlowupReason::StepCollapse,
            };
            break;
        }
        let goal = target(next);
        let hits = goal - t <= dt * (1.0 + 1e-9);
        if hits {
            dt = goal - t;
        }
        let v = rk4_step(&u, dt, k, cfg.dealias);
        if !v.is_finite() {
            outcome = Outcome::NumericalBlowup {
                t_est: t,
                reason: BlowupReason::NonFinite,
            };
            break;
        }
        u = v;
        t = if hits { goal } else { t + dt };
        steps.push(dt);
        let d = Diagnostics::of(t, dt, &u.shift(c));
        window.push_back((t, d.min_ux));
        if window.len() > RICCATI_WINDOW {
            window.pop_front();
        }
        let min_ux = d.min_ux;
        diagnostics.push(d);
        if hits {
            snapshots.push(Snapshot {
                t,
                step: steps.len(),
                u: lab(&u, t),
            });
            next += 1;
        }
        let reason = if min_ux.abs() > cfg.blowup_slope_threshold {
            Some(BlowupReason::SlopeThreshold)
        } else if tail_fraction(&u) > cfg.tail_tolerance {
            Some(BlowupReason::Underresolved)
        } else {
            None
        };
        if let Some(reason) = reason {
            outcome = Outcome::NumericalBlowup {
                t_est: riccati_extrapolation(&window, t),
                reason,
            };
            break;
        }
    }

    if let Outcome::NumericalBlowup { reason, .. } = outcome {
        log::info!("numerical blow-up ({reason:?}) at t = {t:.6e}");
        if snapshots.last().map(|s| s.step) != Some(steps.len()) {
            if snapshots.len() == cfg.max_snapshots {
                snapshots.pop();
            }
            snapshots.push(Snapshot {
                t,
                step: steps.len(),
                u: lab(&u, t),
            });
        }
    }
    Ok(Trajectory {
        config: cfg.clone(),
        snapshots,
        diagnostics,
        steps,
        outcome,
        frame_speed: c,
    })
}

/// `(max |u_x|, |Au|_{L1})`.
pub fn uxinf_l1_bound_check(u: &RealField) -> (f64, f64) {
    (derivative(u, 1).max_abs(), apply_a(u).l1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random_band_limited;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn g(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(n).unwrap()
    }

    #[test]
    fn constants_are_steady() {
        let u = RealField::constant(g(32), 2.0);
        assert!(rhs(&u, 0.0).max_abs() < 1e-13);
        assert!(rhs(&u, 0.7).max_abs() < 1e-13);
        assert!(integrated_form_residual(&u) < 1e-12);
    }

    #[test]
    fn rhs_has_zero_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in [0.0, 0.4] {
            let u = random_band_limited(g(128), 10, &mut rng);
            assert!(mean(&rhs(&u, k)).abs() < 1e-12);
        }
    }

    #[test]
    fn rhs_on_cosine_matches_momentum_equation() {
        let grid = g(128);
        let u = RealField::from_fn(grid, |x| (2.0 * PI * x).cos());
        let ux = derivative(&u, 1);
        let uxx = derivative(&u, 2);
        let uxxx = derivative(&u, 3);
        let want = RealField::from_samples(
            grid,
            (0..128)
                .map(|j| {
                    2.0 * ux.samples()[j] * uxx.samples()[j] + u.samples()[j] * uxxx.samples()[j]
                })
                .collect(),
        )
        .unwrap();
        let got = apply_a(&rhs(&u, 0.0));
        assert!((&got - &want).max_abs() < 1e-9 * want.max_abs());
    }

    #[test]
    fn integrated_form_examples() {
        let u = RealField::from_fn(g(128), |x| (2.0 * PI * x).cos());
        assert!(integrated_form_residual(&u) < 1e-8);
        let u = RealField::from_fn(g(128), |x| 0.5 + 0.2 * (4.0 * PI * x).sin());
        assert!(integrated_form_residual(&u) < 1e-8);
    }

    #[test]
    fn steady_state_trajectory() {
        let u0 = RealField::constant(g(32), 2.0);
        let tr = integrate(&u0, &EvolutionConfig::new(32, 1.0)).unwrap();
        assert!(tr.is_completed());
        assert!((tr.t_final() - 1.0).abs() < 1e-15);
        for s in &tr.snapshots {
            assert!((&s.u.shift(-2.0)).max_abs() < 1e-12);
        }
        assert!(tr.snapshots.len() <= 512);
        assert!(tr.snapshots.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn comoving_frame_matches_lab_frame() {
        let grid = g(64);
        let u0 = RealField::from_fn(grid, |x| 10.0 + 0.2 * (2.0 * PI * x).cos());
        let mut cfg = EvolutionConfig::new(64, 0.05);
        cfg.max_snapshots = 3;
        let lab = integrate(&u0, &cfg).unwrap();
        cfg.comoving = true;
        let mov = integrate(&u0, &cfg).unwrap();
        assert!((mov.frame_speed - 10.0).abs() < 1e-14);
        assert!(mov.steps.len() * 5 < lab.steps.len());
        for (a, b) in lab.snapshots.iter().zip(&mov.snapshots) {
            assert_eq!(a.t, b.t);
            let d = (&a.u - &b.u).max_abs();
            assert!(d < 1e-8, "{d}");
        }
    }

    #[test]
    fn zero_horizon_is_trivial() {
        let u0 = RealField::from_fn(g(32), |x| (2.0 * PI * x).sin());
        let tr = integrate(&u0, &EvolutionConfig::new(32, 0.0)).unwrap();
        assert!(tr.is_completed());
        assert_eq!(tr.snapshots.len(), 1);
        assert!(tr.steps.is_empty());
    }

    #[test]
    fn config_validation() {
        let u0 = RealField::constant(g(32), 1.0);
        let mut cfg = EvolutionConfig::new(32, 1.0);
        cfg.cfl = 1.5;
        assert!(integrate(&u0, &cfg).is_err());
        assert!(integrate(&u0, &EvolutionConfig::new(64, 1.0)).is_err());
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let grid = g(64);
        let u0 = RealField::from_fn(grid, |x| 1.0 + 0.2 * (2.0 * PI * x).cos());
        let t_end = 0.05;
        let run = |steps: usize| {
            let dt = t_end / steps as f64;
            let mut u = u0.clone();
            for _ in 0..steps {
                u = rk4_step(&u, dt, 0.0, true);
            }
            u
        };
        let reference = run(400);
        let e1 = (&run(10) - &reference).max_abs();
        let e2 = (&run(20) - &reference).max_abs();
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn bound_check_examples() {
        let (a, b) = uxinf_l1_bound_check(&RealField::constant(g(32), -3.0));
        assert!(a < 1e-13 && (b - 3.0).abs() < 1e-13);
        let (a, b) = uxinf_l1_bound_check(&RealField::from_fn(g(256), |x| (2.0 * PI * x).cos()));
        assert!((a - 2.0 * PI).abs() < 1e-10);
        assert!((b - 8.0 * PI).abs() < 100.0 / (256.0 * 256.0));
    }

    #[test]
    fn tail_fraction_detects_high_modes() {
        let grid = g(64);
        let smooth = RealField::from_fn(grid, |x| (2.0 * PI * x).cos());
        assert!(tail_fraction(&smooth) < 1e-20);
        let rough = RealField::from_fn(grid, |x| (2.0 * PI * 15.0 * x).cos());
        assert!((tail_fraction(&rough) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn riccati_line_zero() {
        let w: VecDeque<(f64, f64)> = (0..5)
            .map(|i| {
                let t = 0.1 * i as f64;
                (t, -1.0 / (0.5 * (1.0 - t)))
            })
            .collect();
        assert!((riccati_extrapolation(&w, 0.4) - 1.0).abs() < 1e-12);
    }
}

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::{velocity, Trajectory};
use crate::error::{MuhsError, Result};
use crate::spectral::{apply_a, interpolate_coeffs, RealField};

/// Particle positions `eta(t, x_j)` (not reduced mod 1) and their derivatives.
#[derive(Debug, Clone)]
pub struct FlowMap {
    pub times: Vec<f64>,
    pub eta: Vec<Vec<f64>>,
    pub eta_x: Vec<Vec<f64>>,
}

/// Value and derivative of the trigonometric interpolant at `x`.
fn value_and_slope(c: &[Complex64], x: f64) -> (f64, f64) {
    let n = c.len();
    let half = n / 2;
    let x = x.rem_euclid(1.0);
    let step = Complex64::from_polar(1.0, 2.0 * PI * x);
    let mut z = step;
    let (mut v, mut d) = (0.0, 0.0);
    for k in 1..half {
        let w = c[k] * z;
        v += w.re;
        d -= 2.0 * PI * k as f64 * w.im;
        if k % 64 == 63 {
            z = Complex64::from_polar(1.0, 2.0 * PI * x * (k + 1) as f64);
        } else {
            z *= step;
        }
    }
    (
        c[0].re + 2.0 * v + c[half].re * (PI * n as f64 * x).cos(),
        2.0 * d,
    )
}

struct State {
    u: RealField,
    eta: Vec<f64>,
    eta_x: Vec<f64>,
}

fn tendency(s: &State, k: f64, dealiased: bool) -> (RealField, Vec<f64>, Vec<f64>) {
    let du = velocity(&s.u, k, dealiased);
    let c = s.u.coeffs();
    let mut de = Vec::with_capacity(s.eta.len());
    let mut dex = Vec::with_capacity(s.eta.len());
    for (e, ex) in s.eta.iter().zip(&s.eta_x) {
        let (v, d) = value_and_slope(c, *e);
        de.push(v);
        dex.push(d * ex);
    }
    (du, de, dex)
}

fn axpy(s: &State, dt: f64, t: &(RealField, Vec<f64>, Vec<f64>)) -> State {
    State {
        u: s.u.zip_map(&t.0, |a, b| a + dt * b),
        eta: s.eta.iter().zip(&t.1).map(|(a, b)| a + dt * b).collect(),
        eta_x: s.eta_x.iter().zip(&t.2).map(|(a, b)| a + dt * b).collect(),
    }
}

fn combine(a: &[f64], k: [&[f64]; 4], dt: f64) -> Vec<f64> {
    (0..a.len())
        .map(|j| a[j] + dt / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]))
        .collect()
}

fn check(eta: &[f64], eta_x: &[f64], t: f64) -> Result<()> {
    let monotone = eta.windows(2).all(|w| w[1] > w[0]) && eta[eta.len() - 1] < eta[0] + 1.0;
    if !monotone || eta_x.iter().any(|&d| !(d > 0.0)) {
        return Err(MuhsError::DiffeomorphismLost { t });
    }
    Ok(())
}

/// Integrates `eta_t = u(t, eta)` and `(eta_x)_t = u_x(t, eta) eta_x` together with
/// `u`, replaying the recorded step sequence of the trajectory (in its frame).
pub fn flow_map(traj: &Trajectory) -> Result<FlowMap> {
    let cfg = &traj.config;
    let grid = traj.initial().grid();
    let c = traj.frame_speed;
    let k = cfg.k - c;
    let mut s = State {
        u: traj.initial().shift(-c),
        eta: grid.nodes(),
        eta_x: vec![1.0; grid.n()],
    };
    let mut fm = FlowMap {
        times: vec![traj.snapshots[0].t],
        eta: vec![s.eta.clone()],
        eta_x: vec![s.eta_x.clone()],
    };
    let mut next = 1;
    let mut t = 0.0;
    for (i, &dt) in traj.steps.iter().enumerate() {
        let k1 = tendency(&s, k, cfg.dealias);
        let k2 = tendency(&axpy(&s, 0.5 * dt, &k1), k, cfg.dealias);
        let k3 = tendency(&axpy(&s, 0.5 * dt, &k2), k, cfg.dealias);
        let k4 = tendency(&axpy(&s, dt, &k3), k, cfg.dealias);
        let u = combine(
            s.u.samples(),
            [k1.0.samples(), k2.0.samples(), k3.0.samples(), k4.0.samples()],
            dt,
        );
        s = State {
            u: RealField::from_samples(grid, u)?,
            eta: combine(&s.eta, [&k1.1, &k2.1, &k3.1, &k4.1], dt),
            eta_x: combine(&s.eta_x, [&k1.2, &k2.2, &k3.2, &k4.2], dt),
        };
        t += dt;
        check(&s.eta, &s.eta_x, t)?;
        if next < traj.snapshots.len() && traj.snapshots[next].step == i + 1 {
            let ts = traj.snapshots[next].t;
            fm.times.push(ts);
            fm.eta.push(s.eta.iter().map(|e| e + c * ts).collect());
            fm.eta_x.push(s.eta_x.clone());
            next += 1;
        }
    }
    Ok(fm)
}

/// `max |Au(t, eta) (eta_x)^2 - Au0|` over stored times and nodes.
pub fn local_conservation_residual(traj: &Trajectory, fm: &FlowMap) -> Result<f64> {
    if fm.times.len() != traj.snapshots.len() {
        return Err(MuhsError::Precondition(format!(
            "flow map has {} times, trajectory {}",
            fm.times.len(),
            traj.snapshots.len()
        )));
    }
    let m0 = apply_a(traj.initial());
    let mut worst: f64 = 0.0;
    for (i, snap) in traj.snapshots.iter().enumerate() {
        let m = apply_a(&snap.u);
        let c = m.coeffs();
        for j in 0..m0.n() {
            let v = interpolate_coeffs(c, fm.eta[i][j]) * fm.eta_x[i][j].powi(2);
            worst = worst.max((v - m0.samples()[j]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{integrate, EvolutionConfig};
    use crate::spectral::PeriodicGrid;

    #[test]
    fn slope_matches_spectral_derivative() {
        let g = PeriodicGrid::new(32).unwrap();
        let u = RealField::from_fn(g, |x| (2.0 * PI * x).sin() + 0.3 * (6.0 * PI * x).cos());
        let (v, d) = value_and_slope(u.coeffs(), 0.137);
        let x: f64 = 0.137;
        assert!((v - ((2.0 * PI * x).sin() + 0.3 * (6.0 * PI * x).cos())).abs() < 1e-13);
        let want = 2.0 * PI * (2.0 * PI * x).cos() - 0.3 * 6.0 * PI * (6.0 * PI * x).sin();
        assert!((d - want).abs() < 1e-12);
    }

    #[test]
    fn rigid_rotation() {
        let g = PeriodicGrid::new(32).unwrap();
        let c = 0.7;
        let tr = integrate(&RealField::constant(g, c), &EvolutionConfig::new(32, 0.5)).unwrap();
        let fm = flow_map(&tr).unwrap();
        for (i, t) in fm.times.iter().enumerate() {
            for j in 0..32 {
                assert!((fm.eta[i][j] - g.node(j) - c * t).abs() < 1e-12);
                assert!((fm.eta_x[i][j] - 1.0).abs() < 1e-12);
            }
        }
        assert!(local_conservation_residual(&tr, &fm).unwrap() < 1e-12);
    }

    #[test]
    fn comoving_replay_matches_lab_replay() {
        let g = PeriodicGrid::new(64).unwrap();
        let u0 = RealField::from_fn(g, |x| 2.0 + 0.05 * (2.0 * PI * x).cos());
        let mut cfg = EvolutionConfig::new(64, 0.05);
        cfg.max_snapshots = 3;
        let a = integrate(&u0, &cfg).unwrap();
        cfg.comoving = true;
        let b = integrate(&u0, &cfg).unwrap();
        let fa = flow_map(&a).unwrap();
        let fb = flow_map(&b).unwrap();
        for (x, y) in fa.eta.last().unwrap().iter().zip(fb.eta.last().unwrap()) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!(local_conservation_residual(&b, &fb).unwrap() < 1e-8);
    }

    #[test]
    fn zero_field_is_identity() {
        let g = PeriodicGrid::new(16).unwrap();
        let tr = integrate(&RealField::constant(g, 0.0), &EvolutionConfig::new(16, 0.3)).unwrap();
        let fm = flow_map(&tr).unwrap();
        assert_eq!(fm.eta.last().unwrap(), &g.nodes());
    }

    #[test]
    fn generic_run_stays_a_diffeomorphism() {
        let g = PeriodicGrid::new(64).unwrap();
        let u0 = RealField::from_fn(g, |x| 0.5 + 0.3 * (2.0 * PI * x).sin());
        let tr = integrate(&u0, &EvolutionConfig::new(64, 0.1)).unwrap();
        let fm = flow_map(&tr).unwrap();
        assert_eq!(fm.times.len(), tr.snapshots.len());
        for (e, ex) in fm.eta.iter().zip(&fm.eta_x) {
            assert!(e.windows(2).all(|w| w[1] > w[0]));
            assert!(ex.iter().all(|&d| d > 0.0));
        }
    }
}

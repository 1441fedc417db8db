#![allow(dead_code)]

use std::f64::consts::PI;

/// Tanh-sinh quadrature of `f` over `[a, b]`. The integrand receives the point and its
/// distances to both ends, computed without cancellation, so `1/sqrt` endpoint
/// singularities are resolved to full precision.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let eval = |t: f64| {
        let s = 0.5 * PI * t.sinh();
        let w = 0.5 * PI * t.cosh() / s.cosh().powi(2);
        // 1 + tanh(s) and 1 - tanh(s)
        let dl = 2.0 / (1.0 + (-2.0 * s).exp());
        let dr = 2.0 / (1.0 + (2.0 * s).exp());
        let (l, r) = (half * dl, half * dr);
        if l == 0.0 || r == 0.0 || w == 0.0 {
            return 0.0;
        }
        let x = if l < r { a + l } else { b - r };
        w * f(x, l, r)
    };
    let t_max = 3.5;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut prev = half * h * sum;
    for _ in 0..8 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            sum += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        let cur = half * h * sum;
        if (cur - prev).abs() <= 1e-15 * cur.abs() {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Period and integral over one period of the bounded wave with
/// `phi_x^2 (c - phi) = 2 mu (M - phi)(phi - m)`, `mu > 0`, by quadrature of
/// `dx = dphi / |phi_x|` over the range of `phi` on half a period.
pub fn wave_oracle(c: f64, m: f64, big_m: f64, mu: f64) -> (f64, f64) {
    let integrate = |g: &dyn Fn(f64) -> f64| -> f64 {
        if big_m < c {
            // smooth: phi runs from m to M
            tanh_sinh(
                |phi, l, r| g(phi) * ((c - phi) / (2.0 * mu * l * r)).sqrt(),
                m,
                big_m,
            )
        } else if m < c {
            // cusped: phi runs from m up to the cusp at c
            tanh_sinh(
                |phi, l, r| g(phi) * (r / (2.0 * mu * (big_m - phi) * l)).sqrt(),
                m,
                c,
            )
        } else {
            // anticusped: phi runs from the cusp at c up to m
            tanh_sinh(
                |phi, l, r| g(phi) * (l / (2.0 * mu * (big_m - phi) * r)).sqrt(),
                c,
                m,
            )
        }
    };
    (2.0 * integrate(&|_| 1.0), 2.0 * integrate(&|phi| phi))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

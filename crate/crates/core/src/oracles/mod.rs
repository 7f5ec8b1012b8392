//! Numerical checks of the calculus lemmas behind the decay estimates, and
//! the log-log power-law fit used by every rate experiment.

mod fit;
mod ode;

pub use fit::{fit_power_law, DecayFit};
pub use ode::{gronwall_ode, gronwall_unforced, GronwallReport};

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::{self, PI};
use crate::quadrature::{integrate, QuadResult, Tolerance};
use crate::math::golden_min;

/// `∫₀^{2π} |cos θ|^k e^{-t cos²θ} dθ` by adaptive Gauss–Kronrod, to
/// `1e-10` relative.
///
/// The integrand is symmetric under `θ ↦ π - θ` and `θ ↦ θ + π`, so the
/// quadrature runs on `[0, π/2]`, where the mass concentrates in a layer of
/// width `t^{-1/2}` at `π/2`.
pub fn angular_integral(k: u32, t: f64) -> QuadResult {
    assert!(t >= 0.0, "angular_integral needs t >= 0");
    let f = |theta: f64| {
        let c = math::cos(theta).abs();
        math::powi(c, k as i32) * math::exp(-t * c * c)
    };
    let mut breaks = Vec::new();
    if t > 1.0 {
        let w = 1.0 / math::sqrt(t);
        for m in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            let b = 0.5 * PI - m * w;
            if b > 0.0 {
                breaks.push(b);
            }
        }
    }
    let r = integrate(f, 0.0, 0.5 * PI, &breaks, Tolerance { abs: 0.0, rel: 1e-11, max_panels: 4000 });
    QuadResult {
        value: 4.0 * r.value,
        error: 4.0 * r.error,
        ..r
    }
}

/// Laplace-method constant `c_k = 2Γ((k+1)/2)` for the large-`t` behaviour
/// `angular_integral(k, t) ≈ c_k t^{-(k+1)/2}`.
pub fn angular_constant(k: u32) -> f64 {
    2.0 * math::tgamma(0.5 * (k as f64 + 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseBound {
    pub k: u32,
    pub t_max: f64,
    /// `sup (t+1)^{k/2} A^k e^{-A² t}` over `[0,1] × [0, t_max]`.
    pub constant: f64,
    pub argmax_t: f64,
    pub argmax_a: f64,
}

/// Estimates the best constant in `|e^{-A²t} A^k| ≤ C_k/(t+1)^{k/2}` for
/// `|A| ≤ 1`, `t ∈ [0, t_max]`.
pub fn pointwise_bound_constant(k: u32, t_max: f64) -> PointwiseBound {
    assert!(k >= 1 && t_max >= 0.0);
    let kf = k as f64;
    let g = |a: f64, t: f64| math::powf(t + 1.0, 0.5 * kf) * math::powi(a, k as i32) * math::exp(-a * a * t);
    let inner = |t: f64| -> (f64, f64) {
        // A^k e^{-A²t} is unimodal on [0, 1] with its peak at
        // min(1, sqrt(k/(2t))); scan then refine around the best sample.
        let samples = 64;
        let (mut best_a, mut best) = (1.0, g(1.0, t));
        for j in 0..samples {
            let a = j as f64 / samples as f64;
            let v = g(a, t);
            if v > best {
                best = v;
                best_a = a;
            }
        }
        let lo = (best_a - 1.0 / samples as f64).max(0.0);
        let hi = (best_a + 1.0 / samples as f64).min(1.0);
        let (a, v) = golden_min(|a| -g(a, t), lo, hi, 100);
        if -v > best {
            (a, -v)
        } else {
            (best_a, best)
        }
    };
    let ts = time_grid(t_max, 240);
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    let mut best_idx = 0;
    for (i, &t) in ts.iter().enumerate() {
        let (a, v) = inner(t);
        if v > best.2 {
            best = (t, a, v);
            best_idx = i;
        }
    }
    let (lo, hi) = bracket(&ts, best_idx);
    if hi > lo {
        let (t, v) = golden_min(|t| -inner(t).1, lo, hi, 100);
        if -v > best.2 {
            best = (t, inner(t).0, -v);
        }
    }
    PointwiseBound {
        k,
        t_max,
        constant: best.2,
        argmax_t: best.0,
        argmax_a: best.1,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionBound {
    pub delta: f64,
    pub eta: f64,
    pub t_max: f64,
    /// `sup_{t ≤ t_max} (t+1)^δ ∫₀^t (t-s+1)^{-δ} (s+1)^{-1-η} ds`.
    pub sup_ratio: f64,
    pub argmax_t: f64,
}

/// `∫₀^t (t-s+1)^{-δ} (s+1)^{-1-η} ds`, with dyadic breakpoints toward both
/// ends where the integrand varies on unit scale.
pub fn convolution_integral(delta: f64, eta: f64, t: f64) -> QuadResult {
    if t <= 0.0 {
        return QuadResult { value: 0.0, error: 0.0, panels: 0, converged: true };
    }
    let f = |s: f64| math::powf(t - s + 1.0, -delta) * math::powf(s + 1.0, -1.0 - eta);
    let mut breaks = Vec::new();
    let mut h = 1.0;
    while h < 0.5 * t {
        breaks.push(h);
        breaks.push(t - h);
        h *= 2.0;
    }
    breaks.push(0.5 * t);
    integrate(f, 0.0, t, &breaks, Tolerance { abs: 0.0, rel: 1e-11, max_panels: 4000 })
}

pub fn convolution_bound(delta: f64, eta: f64, t_max: f64) -> ConvolutionBound {
    assert!(delta > 0.0 && eta > 0.0 && t_max >= 0.0);
    let ratio = |t: f64| math::powf(t + 1.0, delta) * convolution_integral(delta, eta, t).value;
    let ts = time_grid(t_max, 160);
    let mut best = (0.0, 0.0);
    let mut best_idx = 0;
    for (i, &t) in ts.iter().enumerate() {
        let v = ratio(t);
        if v > best.1 {
            best = (t, v);
            best_idx = i;
        }
    }
    let (lo, hi) = bracket(&ts, best_idx);
    if hi > lo {
        let (t, v) = golden_min(|t| -ratio(t), lo, hi, 60);
        if -v > best.1 {
            best = (t, -v);
        }
    }
    ConvolutionBound {
        delta,
        eta,
        t_max,
        sup_ratio: best.1,
        argmax_t: best.0,
    }
}

/// `0` followed by log-spaced times from `1e-3` to `t_max`.
fn time_grid(t_max: f64, n: usize) -> Vec<f64> {
    let mut ts = alloc::vec![0.0];
    if t_max > 1e-3 {
        ts.extend(math::geomspace(1e-3, t_max, n));
    } else if t_max > 0.0 {
        ts.push(t_max);
    }
    ts
}

fn bracket(ts: &[f64], i: usize) -> (f64, f64) {
    let lo = if i == 0 { ts[0] } else { ts[i - 1] };
    let hi = if i + 1 < ts.len() { ts[i + 1] } else { ts[i] };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angular_integral_at_zero_time() {
        assert!((angular_integral(0, 0.0).value - 2.0 * PI).abs() < 1e-12);
        assert!((angular_integral(2, 0.0).value - PI).abs() < 1e-12);
    }

    #[test]
    fn angular_integral_matches_bessel_closed_form() {
        // ∫₀^{2π} e^{-t cos²θ} dθ = 2π e^{-t/2} I₀(t/2); I₀ by its power series.
        for t in [0.5, 3.0, 20.0] {
            let x: f64 = t / 2.0;
            let mut term = 1.0;
            let mut i0 = 1.0;
            for m in 1..200 {
                term *= (x / 2.0) * (x / 2.0) / (m as f64 * m as f64);
                i0 += term;
            }
            let exact = 2.0 * PI * (-x).exp() * i0;
            let v = angular_integral(0, t).value;
            assert!((v - exact).abs() < 1e-10 * exact, "t = {t}: {v} vs {exact}");
        }
    }

    #[test]
    fn angular_integral_laplace_limit() {
        for k in 0..3u32 {
            for t in [1e2, 1e4, 1e6] {
                let v = angular_integral(k, t).value * t.powf(0.5 * (k as f64 + 1.0));
                let c = angular_constant(k);
                assert!((v / c - 1.0).abs() < 0.05, "k = {k}, t = {t}: {v} vs {c}");
            }
        }
        assert!((angular_constant(0) - 2.0 * PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn angular_integral_decreases_in_t_and_k() {
        let ts = [0.0, 0.1, 1.0, 10.0, 100.0, 1e3];
        for k in 0..4u32 {
            for w in ts.windows(2) {
                assert!(angular_integral(k, w[1]).value < angular_integral(k, w[0]).value);
            }
        }
        for &t in &ts {
            for k in 0..3u32 {
                assert!(angular_integral(k + 1, t).value <= angular_integral(k, t).value);
            }
        }
    }

    /// Closed-form inner maximum, dense outer grid.
    fn pointwise_oracle(k: u32, t_max: f64) -> f64 {
        let kf = k as f64;
        let mut best: f64 = 0.0;
        let n = 200_000;
        for i in 0..=n {
            let t = t_max * (i as f64 / n as f64).powi(3);
            let a = (kf / (2.0 * t)).sqrt().min(1.0);
            let v = (t + 1.0).powf(0.5 * kf) * a.powi(k as i32) * (-a * a * t).exp();
            best = best.max(v);
        }
        best
    }

    #[test]
    fn pointwise_constants_match_grid_oracle() {
        for k in 1..=4u32 {
            let est = pointwise_bound_constant(k, 1e3);
            let oracle = pointwise_oracle(k, 1e3);
            assert!((est.constant / oracle - 1.0).abs() < 1e-6, "k = {k}: {} vs {oracle}", est.constant);
        }
        // Boundary value at t = 0: A = 1 gives exactly 1.
        assert!((pointwise_bound_constant(2, 0.0).constant - 1.0).abs() < 1e-12);
        assert!((pointwise_bound_constant(1, 1e4).constant - 1.0).abs() < 0.02);
    }

    #[test]
    fn pointwise_constant_saturates() {
        let a = pointwise_bound_constant(2, 1e3).constant;
        let b = pointwise_bound_constant(2, 1e6).constant;
        assert!((a / b - 1.0).abs() < 0.01);
    }

    #[test]
    fn convolution_integral_closed_form_for_delta_one() {
        // δ = 1, η = 1: partial fractions give
        // ∫₀^t ds/((t-s+1)(s+1)²) = [2 ln(t+1)/(t+2) + t/(t+1)] / (t+2).
        for t in [0.5, 10.0, 1e3, 1e6] {
            let exact = (2.0 * (t + 1.0f64).ln() / (t + 2.0) + t / (t + 1.0)) / (t + 2.0);
            let v = convolution_integral(1.0, 1.0, t).value;
            assert!((v - exact).abs() < 1e-10 * exact, "t = {t}: {v} vs {exact}");
        }
    }

    #[test]
    fn convolution_bound_examples() {
        assert_eq!(convolution_integral(0.25, 0.25, 0.0).value, 0.0);
        let b = convolution_bound(1.0, 0.5, 1e4);
        assert!(b.sup_ratio.is_finite() && b.sup_ratio > 0.0);
        let small = convolution_bound(0.25, 0.25, 1e3).sup_ratio;
        let large = convolution_bound(0.25, 0.25, 1e4).sup_ratio;
        assert!(small <= large);
        // Slow approach toward 1/η: about 8% apart over this decade.
        assert!((large / small - 1.0) > 0.05 && large < 4.0);
    }
}

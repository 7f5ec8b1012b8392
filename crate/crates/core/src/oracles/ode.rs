use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    pub f0: f64,
    pub a: f64,
    pub t_max: f64,
    /// Accepted `(t, f(t))` pairs.
    pub trajectory: Vec<(f64, f64)>,
    /// `sup_t f(t) (t+1)^{5/2} / (f0 + A)`; 0 when `f0 + A = 0`.
    pub sup_ratio: f64,
    pub argmax_t: f64,
    /// `sup_t f(t) (t+1)^2 / (f0 + A)`, the rate the forced solution
    /// actually attains.
    pub sup_ratio_quadratic: f64,
}

/// Integrates the worst case of the differential inequality,
/// `f' = -f/√(t+1) + A/(t+1)^{5/2}`, with an embedded Dormand–Prince 5(4)
/// pair at relative tolerance `1e-12`.
pub fn gronwall_ode(f0: f64, a: f64, t_max: f64) -> GronwallReport {
    assert!(f0 >= 0.0 && a >= 0.0 && t_max >= 0.0);
    let rhs = |t: f64, f: f64| -f / math::sqrt(t + 1.0) + a * math::powf(t + 1.0, -2.5);
    let trajectory = dopri5(rhs, f0, t_max, 1e-12, 1e-300);
    let norm = f0 + a;
    let (mut sup_ratio, mut argmax_t, mut sup_q) = (0.0, 0.0, 0.0);
    if norm > 0.0 {
        for &(t, f) in &trajectory {
            let r = f * math::powf(t + 1.0, 2.5) / norm;
            if r > sup_ratio {
                sup_ratio = r;
                argmax_t = t;
            }
            sup_q = f64::max(sup_q, f * (t + 1.0) * (t + 1.0) / norm);
        }
    }
    GronwallReport {
        f0,
        a,
        t_max,
        trajectory,
        sup_ratio,
        argmax_t,
        sup_ratio_quadratic: sup_q,
    }
}

/// Closed form of the unforced (`A = 0`) solution.
pub fn gronwall_unforced(f0: f64, t: f64) -> f64 {
    f0 * math::exp(2.0 - 2.0 * math::sqrt(t + 1.0))
}

fn dopri5(f: impl Fn(f64, f64) -> f64, y0: f64, t_end: f64, rtol: f64, atol: f64) -> Vec<(f64, f64)> {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut out = alloc::vec![(0.0, y0)];
    let (mut t, mut y) = (0.0, y0);
    let mut h = 1e-3f64.min(t_end);
    while t < t_end && h > 0.0 {
        if t + h > t_end {
            h = t_end - t;
        }
        let mut k = [0.0f64; 7];
        for s in 0..7 {
            let ys = y + h * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
            k[s] = f(t + C[s] * h, ys);
        }
        let y5 = y + h * (0..7).map(|j| B5[j] * k[j]).sum::<f64>();
        let y4 = y + h * (0..7).map(|j| B4[j] * k[j]).sum::<f64>();
        let scale = atol + rtol * y.abs().max(y5.abs());
        let err = (y5 - y4).abs() / scale;
        if err <= 1.0 {
            t += h;
            y = y5;
            out.push((t, y));
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * math::powf(err, -0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unforced_solution_matches_closed_form() {
        let r = gronwall_ode(2.0, 0.0, 1e3);
        for &(t, f) in &r.trajectory {
            let exact = gronwall_unforced(2.0, t);
            assert!((f - exact).abs() <= 1e-8 * exact.max(1e-300), "t = {t}: {f} vs {exact}");
        }
        // sup of e^{2-2√(t+1)} (t+1)^{5/2} sits at √(t+1) = 5/2.
        let expected = (-3.0f64).exp() * 6.25f64.powf(2.5);
        assert!((r.sup_ratio - expected).abs() < 1e-3 * expected);
        assert!((r.argmax_t - 5.25).abs() < 0.5);
    }

    #[test]
    fn zero_data_stays_zero() {
        let r = gronwall_ode(0.0, 0.0, 100.0);
        assert!(r.trajectory.iter().all(|&(_, f)| f == 0.0));
        assert_eq!(r.sup_ratio, 0.0);
    }

    #[test]
    fn forced_solution_decays_like_inverse_square() {
        // f ≈ A/(t+1)² once the exponential transient is gone, so the
        // (t+1)^{5/2} ratio keeps growing like √t while the quadratic one
        // saturates.
        let r3 = gronwall_ode(1.0, 1.0, 1e3);
        let r4 = gronwall_ode(1.0, 1.0, 1e4);
        let growth = r4.sup_ratio / r3.sup_ratio;
        assert!(growth > 2.5 && growth < 3.5, "growth {growth}");
        let qs = (r3.sup_ratio_quadratic, r4.sup_ratio_quadratic);
        assert!((qs.1 / qs.0 - 1.0).abs() < 0.02, "{qs:?}");
        let &(t, f) = r4.trajectory.last().unwrap();
        assert!((f * (t + 1.0).powi(2) - 1.0).abs() < 0.05);
    }
}

//! Gauss–Legendre rules and globally adaptive Gauss–Kronrod (7/15) integration.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = math::cos(math::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integrates `f` over `[a, b]` with a fixed Gauss–Legendre rule on
/// `panels` equal subintervals.
pub fn gauss_legendre_panels(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rule: &(Vec<f64>, Vec<f64>),
    panels: usize,
) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let part: f64 = rule
            .0
            .iter()
            .zip(&rule.1)
            .map(|(x, w)| w * f(mid + 0.5 * h * x))
            .sum();
        total += 0.5 * h * part;
    }
    total
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One G7/K15 panel: Kronrod estimate and `|K15 - G7|`.
pub fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-9,
            max_panels: 4000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            ..Default::default()
        }
    }
}

/// Globally adaptive integration over `[a, b]` split first at the given
/// interior breakpoints. The panel with the largest error estimate is
/// bisected until `error ≤ max(abs, rel·|value|)`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, breakpoints: &[f64], tol: Tolerance) -> QuadResult {
    let mut cuts: Vec<f64> = Vec::with_capacity(breakpoints.len() + 2);
    cuts.push(a);
    cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();

    // (lo, hi, value, error)
    let mut panels: Vec<(f64, f64, f64, f64)> = cuts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();

    loop {
        let value: f64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target {
            return QuadResult { value, error, panels: panels.len(), converged: true };
        }
        if panels.len() >= tol.max_panels {
            return QuadResult { value, error, panels: panels.len(), converged: false };
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, _, _) = panels[worst];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return QuadResult { value, error, panels: panels.len(), converged: false };
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels[worst] = (lo, mid, v1, e1);
        panels.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 8, 16, 33] {
            let rule = gauss_legendre(n);
            assert!((rule.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            let deg = 2 * n - 1;
            let v = gauss_legendre_panels(|x| x.powi(deg as i32 - 1), -1.0, 1.0, &rule, 1);
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((v - exact).abs() < 1e-13, "n = {n}: {v} vs {exact}");
        }
    }

    #[test]
    fn adaptive_handles_narrow_peak() {
        // Dyadic breakpoints at the peak scale, as the callers place them.
        let t = 1e6;
        let breaks: Vec<f64> = (0..12).flat_map(|m| [1.0 - 1e-3 * 2f64.powi(m), 1.0 + 1e-3 * 2f64.powi(m)]).collect();
        let r = integrate(|x: f64| (-(x - 1.0).powi(2) * t).exp(), 0.0, 3.0, &breaks, Tolerance::default());
        let exact = (core::f64::consts::PI / t).sqrt();
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn reports_non_convergence() {
        let r = integrate(|x: f64| 1.0 / x.abs().sqrt(), -1.0, 1.0, &[], Tolerance { abs: 0.0, rel: 1e-15, max_panels: 20 });
        assert!(!r.converged);
    }
}

//! Stratified steady states `Ω(v) = K v + ω(v)` of the vertical coordinate.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, PI};

/// Highest derivative order exposed by profile evaluators.
pub const MAX_DERIVATIVE_ORDER: usize = 21;

/// The bounded part `ω` of a stratified profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Omega {
    Zero,
    /// `mean + Σ_{n≥1} cos[n-1]·cos(n v) + sin[n-1]·sin(n v)`.
    Trig {
        #[serde(default)]
        mean: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    /// `Σ_j coeffs[j] v^j`. Not periodic in general; useful for exercising
    /// the periodicity check.
    Polynomial { coeffs: Vec<f64> },
}

impl Omega {
    pub fn sine(amplitude: f64) -> Self {
        Omega::Trig {
            mean: 0.0,
            cos: Vec::new(),
            sin: alloc::vec![amplitude],
        }
    }

    /// Spectral interpolant of uniform periodic samples `v_j = -π + 2πj/M`.
    /// Coefficients below `1e-13` of the largest are treated as rounding
    /// noise, since high-order derivatives amplify them by `n^order`.
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        let m = values.len();
        if m < 4 || !m.is_multiple_of(2) {
            return Err(Error::config("profile samples need an even count of at least 4"));
        }
        let half = m / 2;
        let mut mean = 0.0;
        let mut cos = alloc::vec![0.0; half];
        let mut sin = alloc::vec![0.0; half];
        for (j, v) in values.iter().enumerate() {
            let y = -PI + math::TWO_PI * j as f64 / m as f64;
            mean += v;
            for n in 1..=half {
                let a = n as f64 * y;
                cos[n - 1] += v * math::cos(a);
                sin[n - 1] += v * math::sin(a);
            }
        }
        mean /= m as f64;
        for n in 1..=half {
            let scale = if n == half { 1.0 / m as f64 } else { 2.0 / m as f64 };
            cos[n - 1] *= scale;
            sin[n - 1] *= if n == half { 0.0 } else { 2.0 / m as f64 };
        }
        let peak = cos.iter().chain(&sin).map(|c| c.abs()).fold(0.0, f64::max);
        for c in cos.iter_mut().chain(sin.iter_mut()) {
            if c.abs() < 1e-13 * peak {
                *c = 0.0;
            }
        }
        Ok(Omega::Trig { mean, cos, sin })
    }

    /// `ω^{(order)}(v)`.
    pub fn derivative(&self, order: usize, v: f64) -> f64 {
        match self {
            Omega::Zero => 0.0,
            Omega::Trig { mean, cos, sin } => {
                let shift = order as f64 * 0.5 * PI;
                let mut acc = if order == 0 { *mean } else { 0.0 };
                for (idx, a) in cos.iter().enumerate() {
                    if *a != 0.0 {
                        let n = (idx + 1) as f64;
                        acc += a * math::powi(n, order as i32) * math::cos(n * v + shift);
                    }
                }
                for (idx, b) in sin.iter().enumerate() {
                    if *b != 0.0 {
                        let n = (idx + 1) as f64;
                        acc += b * math::powi(n, order as i32) * math::sin(n * v + shift);
                    }
                }
                acc
            }
            Omega::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(order)
                .map(|(j, c)| {
                    let falling: f64 = ((j - order + 1)..=j).map(|x| x as f64).product();
                    c * falling * math::powi(v, (j - order) as i32)
                })
                .sum(),
        }
    }
}

/// Steady state `Ω(v) = K v + ω(v)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratifiedProfile {
    pub slope: f64,
    #[serde(default = "zero_omega")]
    pub omega: Omega,
}

fn zero_omega() -> Omega {
    Omega::Zero
}

impl StratifiedProfile {
    pub fn linear(slope: f64) -> Self {
        StratifiedProfile { slope, omega: Omega::Zero }
    }

    pub fn new(slope: f64, omega: Omega) -> Self {
        StratifiedProfile { slope, omega }
    }

    /// `Ω^{(order)}(v)`; order 0 is the profile itself.
    pub fn derivative(&self, order: usize, v: f64) -> f64 {
        match order {
            0 => self.slope * v + self.omega.derivative(0, v),
            1 => self.slope + self.omega.derivative(1, v),
            _ => self.omega.derivative(order, v),
        }
    }

    pub fn is_linear(&self) -> bool {
        match &self.omega {
            Omega::Zero => true,
            Omega::Trig { cos, sin, .. } => cos.iter().chain(sin).all(|c| *c == 0.0),
            Omega::Polynomial { coeffs } => coeffs.iter().skip(2).all(|c| *c == 0.0),
        }
    }

    /// `Ω'(v) - K`: the part of the forcing that is not a Fourier multiplier.
    pub fn variable_slope(&self, v: f64) -> f64 {
        self.derivative(1, v) - self.slope
    }
}

/// Samples `g` on `[-π, π]` (both endpoints) and refines the extremum by
/// golden-section search on the bracketing cells.
pub(crate) fn grid_extremum(g: impl Fn(f64) -> f64, samples: usize, maximize: bool) -> (f64, f64) {
    let sign = if maximize { -1.0 } else { 1.0 };
    let h = math::TWO_PI / samples as f64;
    let (mut best_j, mut best) = (0usize, f64::INFINITY);
    for j in 0..=samples {
        let v = sign * g(-PI + j as f64 * h);
        if v < best {
            best = v;
            best_j = j;
        }
    }
    let lo = (-PI + (best_j as f64 - 1.0) * h).max(-PI);
    let hi = (-PI + (best_j as f64 + 1.0) * h).min(PI);
    let (x, v) = math::golden_min(|y| sign * g(y), lo, hi, 80);
    if v < best {
        (x, sign * v)
    } else {
        (-PI + best_j as f64 * h, sign * best)
    }
}

//! Sobolev norms and the sup-norm of spectral gradients.

use serde::{Deserialize, Serialize};

use crate::fft::FftPlan;
use crate::field::SpectralField;
use crate::grid::norm_sq;
use crate::math;
use crate::multiplier::FourierMultiplier;

/// Nonnegative Sobolev index `s`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub const L2: SobolevIndex = SobolevIndex(0.0);

    pub fn new(s: f64) -> Option<Self> {
        (s.is_finite() && s >= 0.0).then_some(SobolevIndex(s))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<u32> for SobolevIndex {
    fn from(s: u32) -> Self {
        SobolevIndex(s as f64)
    }
}

/// Squared `H^s` weight `(1 + |k|²)^s`.
#[inline]
pub fn sobolev_weight(k: [i64; 3], s: f64) -> f64 {
    math::powf(1.0 + norm_sq(k), s)
}

/// `‖f‖²_{H^s} = (2π)^d Σ_k (1+|k|²)^s |f̂(k)|²`.
pub fn sobolev_norm_sq(f: &SpectralField, s: SobolevIndex) -> f64 {
    let g = f.grid();
    let sum: f64 = if s.0 == 0.0 {
        f.coeffs().iter().map(|c| c.norm_sqr()).sum()
    } else {
        f.coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| sobolev_weight(g.wavevector(i), s.0) * c.norm_sqr())
            .sum()
    };
    g.volume() * sum
}

pub fn sobolev_norm(f: &SpectralField, s: SobolevIndex) -> f64 {
    math::sqrt(sobolev_norm_sq(f, s))
}

/// `max_x |∇f(x)|` over the grid, with the gradient taken spectrally.
pub fn grad_linf(plan: &FftPlan, f: &SpectralField) -> f64 {
    let g = f.grid();
    let parts: alloc::vec::Vec<alloc::vec::Vec<f64>> = (0..g.dim())
        .map(|a| {
            let d = FourierMultiplier::derivative(a).apply(f).expect("derivative symbol is finite");
            plan.inverse(&d)
        })
        .collect();
    (0..g.len())
        .map(|i| math::sqrt(parts.iter().map(|p| p[i] * p[i]).sum()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::math::PI;

    fn plan() -> FftPlan {
        FftPlan::new(Grid::two_d(16).unwrap())
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let f = SpectralField::zeros(Grid::two_d(8).unwrap());
        for s in [0, 1, 5, 20] {
            assert_eq!(sobolev_norm(&f, s.into()), 0.0);
        }
    }

    #[test]
    fn sine_norms() {
        let f = plan().project(|x| x[0].sin());
        let l2 = (2.0 * PI * PI).sqrt();
        assert!((sobolev_norm(&f, SobolevIndex::L2) - l2).abs() < 1e-12 * l2);
        assert!((sobolev_norm(&f, 1.into()) - 2f64.sqrt() * l2).abs() < 1e-12 * l2);
    }

    #[test]
    fn norm_is_monotone_in_s() {
        let f = plan().project(|x| (x[0] + 3.0 * x[1]).cos() + 0.1 * (5.0 * x[0]).sin() + 2.0);
        let mut prev = 0.0;
        for s in [0.0, 0.5, 1.0, 2.5, 4.0, 10.0] {
            let v = sobolev_norm(&f, SobolevIndex::new(s).unwrap());
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn gradient_sup_norms() {
        let p = plan();
        assert_eq!(grad_linf(&p, &p.project(|_| 4.0)), 0.0);
        assert!((grad_linf(&p, &p.project(|x| x[0].sin())) - 1.0).abs() < 1e-13);
        assert!((grad_linf(&p, &p.project(|x| (2.0 * x[1]).sin())) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn negative_index_is_rejected() {
        assert!(SobolevIndex::new(-1.0).is_none());
        assert!(SobolevIndex::new(f64::NAN).is_none());
    }
}

//! `L²` norms of `e^{R₁²t}ρ₀` on `ℝ²` by polar quadrature in frequency:
//! `‖ρ(t)‖² = ∫₀^{2π}∫₀^{R} e^{-2cos²θ t} w(θ, r)² |ρ̂₀(r, θ)|² r dr dθ`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, PI, TWO_PI};
use crate::quadrature::{gauss_legendre, gauss_legendre_panels, integrate, Tolerance};

type Profile = dyn Fn(f64, f64) -> Complex64 + Send + Sync;

const RADIAL_PANELS: usize = 4;
const REQUIRED_REL_ERROR: f64 = 1e-6;
const TAIL_FRACTION: f64 = 1e-10;

/// Initial data `ρ̂₀(r, θ)` in polar frequency coordinates, with the radial
/// cutoff and quadrature orders.
#[derive(Clone)]
pub struct RadialAngularSpec {
    profile: Arc<Profile>,
    r_max: f64,
    n_r: usize,
    n_theta: usize,
}

impl core::fmt::Debug for RadialAngularSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("RadialAngularSpec")
            .field("r_max", &self.r_max)
            .field("n_r", &self.n_r)
            .field("n_theta", &self.n_theta)
            .finish_non_exhaustive()
    }
}

impl RadialAngularSpec {
    /// Validates the cutoff: the mass on `[R, 2R]` must be below `1e-10` of
    /// the mass on `[0, R]`.
    pub fn new(
        profile: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
        r_max: f64,
        n_r: usize,
        n_theta: usize,
    ) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::Config(alloc::format!("radial cutoff must be positive, got {r_max}")));
        }
        if n_r < 4 || n_theta < 1 {
            return Err(Error::Config(alloc::format!(
                "quadrature orders too small: n_r = {n_r} (need >= 4), n_theta = {n_theta} (need >= 1)"
            )));
        }
        let spec = RadialAngularSpec {
            profile: Arc::new(profile),
            r_max,
            n_r,
            n_theta,
        };
        let mass = spec.mass(0.0, r_max);
        let tail = spec.mass(r_max, 2.0 * r_max);
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Precondition(alloc::format!("profile mass must be positive and finite, got {mass}")));
        }
        if tail > TAIL_FRACTION * mass {
            return Err(Error::Precondition(alloc::format!(
                "profile tail beyond r = {r_max} carries {:.3e} of the mass (limit {TAIL_FRACTION:e})",
                tail / mass
            )));
        }
        Ok(spec)
    }

    /// Radial profile `f(r)`.
    pub fn radial(profile: impl Fn(f64) -> f64 + Send + Sync + 'static, r_max: f64) -> Result<Self> {
        Self::new(move |r, _| Complex64::new(profile(r), 0.0), r_max, 64, 16)
    }

    /// `e^{-r²/(2σ²)}`, cut off at `10σ`.
    pub fn radial_gaussian(sigma: f64) -> Result<Self> {
        let inv = 0.5 / (sigma * sigma);
        Self::radial(move |r| math::exp(-inv * r * r), 10.0 * sigma)
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Coarse `∫∫ |ρ̂₀|² r dr dθ` over `a ≤ r ≤ b`, used for the tail check.
    fn mass(&self, a: f64, b: f64) -> f64 {
        let rule = gauss_legendre(self.n_r);
        let m = 4 * self.n_theta.max(16);
        let h = TWO_PI / m as f64;
        (0..m)
            .map(|j| {
                let th = (j as f64 + 0.5) * h;
                h * gauss_legendre_panels(|r| (self.profile)(r, th).norm_sqr() * r, a, b, &rule, RADIAL_PANELS)
            })
            .sum()
    }
}

/// Angular/radial weight applied before taking the norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "order", rename_all = "snake_case")]
pub enum Weight {
    Identity,
    /// `R₁`, symbol `|cos θ|` in modulus.
    R1,
    /// `R₁²`, symbol `cos²θ` in modulus.
    R1Squared,
    /// `Λ^j`, symbol `r^j`.
    Lambda(f64),
}

impl Weight {
    fn angular_sq(self, theta: f64) -> f64 {
        let c = math::cos(theta);
        match self {
            Weight::Identity | Weight::Lambda(_) => 1.0,
            Weight::R1 => c * c,
            Weight::R1Squared => c * c * c * c,
        }
    }

    fn radial_sq(self, r: f64) -> f64 {
        match self {
            Weight::Lambda(j) => math::powf(r, 2.0 * j),
            _ => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WholeSpaceNorm {
    pub t: f64,
    pub norm: f64,
    /// Estimated error on `norm` from comparing two radial orders plus the
    /// adaptive angular estimate.
    pub error: f64,
    pub panels: usize,
}

/// `‖w(D) e^{R₁²t} ρ₀‖_{L²(ℝ²)}`.
pub fn whole_space_norm(spec: &RadialAngularSpec, t: f64, weight: Weight) -> Result<WholeSpaceNorm> {
    if !(t >= 0.0) {
        return Err(Error::Domain(alloc::format!("time must be nonnegative, got {t}")));
    }
    let breaks = angular_breakpoints(t, spec.n_theta);
    let tol = Tolerance { abs: 0.0, rel: 1e-11, max_panels: 8000 };
    let run = |n_r: usize| {
        let rule = gauss_legendre(n_r);
        let radial = |th: f64| {
            gauss_legendre_panels(
                |r| weight.radial_sq(r) * (spec.profile)(r, th).norm_sqr() * r,
                0.0,
                spec.r_max,
                &rule,
                RADIAL_PANELS,
            )
        };
        integrate(
            |th| {
                let c = math::cos(th);
                math::exp(-2.0 * c * c * t) * weight.angular_sq(th) * radial(th)
            },
            0.0,
            TWO_PI,
            &breaks,
            tol,
        )
    };
    let fine = run(spec.n_r);
    let coarse = run(spec.n_r.div_ceil(2).max(2));
    let sq = fine.value.max(0.0);
    let sq_err = fine.error + (fine.value - coarse.value).abs();
    let norm = math::sqrt(sq);
    // d√x = dx / (2√x)
    let error = if norm > 0.0 { 0.5 * sq_err / norm } else { math::sqrt(sq_err) };
    if !fine.converged || error > REQUIRED_REL_ERROR * norm {
        return Err(Error::Quadrature { value: norm, error });
    }
    Ok(WholeSpaceNorm { t, norm, error, panels: fine.panels })
}

/// Quadrant boundaries, a uniform split into `n_theta` panels, and dyadic
/// layers of width `m/√(2t)` around `π/2` and `3π/2`.
fn angular_breakpoints(t: f64, n_theta: usize) -> Vec<f64> {
    let mut b: Vec<f64> = (1..n_theta).map(|j| TWO_PI * j as f64 / n_theta as f64).collect();
    b.extend([0.5 * PI, PI, 1.5 * PI]);
    if t > 0.5 {
        let w = 1.0 / math::sqrt(2.0 * t);
        for centre in [0.5 * PI, 1.5 * PI] {
            let mut m = 1.0;
            while m * w < 0.5 * PI {
                b.push(centre - m * w);
                b.push(centre + m * w);
                m *= 2.0;
            }
        }
    }
    b
}

/// `‖e^{R₁²t}f‖/‖f‖` for radial `f`. The radial integral factors out, so
/// the ratio is `√((1/2π)∫ e^{-2cos²θ t} dθ)` whatever the profile.
pub fn sharpness_radial(spec: &RadialAngularSpec, t: f64) -> Result<f64> {
    let n0 = whole_space_norm(spec, 0.0, Weight::Identity)?;
    let nt = whole_space_norm(spec, t, Weight::Identity)?;
    Ok(nt.norm / n0.norm)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentratedSharpness {
    pub t: f64,
    /// `‖e^{R₁²t}f_t‖_{L²}` for the unit-mass family.
    pub value: f64,
    /// `e^{-t/(t+1)²}`, the pointwise floor on the angular support.
    pub support_bound: f64,
}

/// Unit-mass data whose angular profile is the indicator of
/// `|θ - π/2| ≤ 1/(t+1)`, rescaled. Its squared norm after time `t` is the
/// average of `e^{-2cos²θ t}` over the support.
pub fn sharpness_concentrated(t: f64) -> Result<ConcentratedSharpness> {
    if !(t >= 0.0) {
        return Err(Error::Domain(alloc::format!("time must be nonnegative, got {t}")));
    }
    let half = 1.0 / (t + 1.0);
    let r = integrate(
        |th| {
            let c = math::cos(th);
            math::exp(-2.0 * c * c * t)
        },
        0.5 * PI - half,
        0.5 * PI + half,
        &[],
        Tolerance { abs: 0.0, rel: 1e-13, max_panels: 1000 },
    );
    Ok(ConcentratedSharpness {
        t,
        value: math::sqrt(r.value / (2.0 * half)),
        support_bound: math::exp(-t * half * half),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_identity_weight_is_the_initial_norm() {
        // |ρ̂₀|² = e^{-r²} and ∫∫ e^{-r²} r dr dθ = π.
        let spec = RadialAngularSpec::radial_gaussian(1.0).unwrap();
        let n = whole_space_norm(&spec, 0.0, Weight::Identity).unwrap();
        assert!((n.norm - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lambda_weight_adds_radial_moment() {
        // ∫ r² e^{-r²} r dr = 1/2, times 2π.
        let spec = RadialAngularSpec::radial_gaussian(1.0).unwrap();
        let n = whole_space_norm(&spec, 0.0, Weight::Lambda(1.0)).unwrap();
        assert!((n.norm - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_heavy_tails_and_bad_orders() {
        assert!(matches!(
            RadialAngularSpec::radial(|r| 1.0 / (1.0 + r * r), 10.0),
            Err(Error::Precondition(_))
        ));
        assert!(RadialAngularSpec::new(|_, _| Complex64::new(1.0, 0.0), 1.0, 2, 4).is_err());
        let spec = RadialAngularSpec::radial_gaussian(1.0).unwrap();
        assert!(whole_space_norm(&spec, -1.0, Weight::R1).is_err());
    }

    #[test]
    fn weights_are_ordered() {
        let spec = RadialAngularSpec::radial_gaussian(1.0).unwrap();
        for t in [0.0, 1.0, 1e3] {
            let a = whole_space_norm(&spec, t, Weight::Identity).unwrap().norm;
            let b = whole_space_norm(&spec, t, Weight::R1).unwrap().norm;
            let c = whole_space_norm(&spec, t, Weight::R1Squared).unwrap().norm;
            assert!(c <= b && b <= a);
        }
    }

    #[test]
    fn concentrated_family_examples() {
        let s0 = sharpness_concentrated(0.0).unwrap();
        assert!((s0.value - 1.0).abs() < 1e-14);
        let s = sharpness_concentrated(1e6).unwrap();
        assert!(s.value > 0.9 && s.value <= 1.0);
        for t in [1.0, 10.0, 100.0] {
            let s = sharpness_concentrated(t).unwrap();
            assert!(s.value >= s.support_bound && s.value * s.value >= (-2.0f64).exp());
        }
    }
}

//! Stationary solutions, the linear-stability quadratic form and the
//! admissibility conditions for stratified profiles.

mod profile;

pub use profile::{Omega, StratifiedProfile, MAX_DERIVATIVE_ORDER};

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::fft::FftPlan;
use crate::field::SpectralField;
use crate::grid::norm_sq;
use crate::math::{self, PI};
use crate::multiplier::FourierMultiplier;
use crate::velocity::{velocity, velocity_symbols};

/// Samples used for grid-verified profile witnesses.
pub const PROFILE_SAMPLES: usize = 4096;

/// `‖u·∇ρ‖_{L²}` with `u` the velocity of `ρ`, evaluated pseudo-spectrally on
/// the grid. Zero exactly when `ρ` is a steady state of the unperturbed
/// equation.
pub fn stationarity_residual(plan: &FftPlan, rho: &SpectralField) -> f64 {
    let g = rho.grid();
    let u = velocity(rho);
    let mut adv = alloc::vec![0.0; g.len()];
    for (a, ua) in u.iter().enumerate() {
        let d = FourierMultiplier::derivative(a).apply(rho).expect("finite symbol");
        let (up, dp) = plan.inverse_pair(ua, &d);
        for ((acc, x), y) in adv.iter_mut().zip(&up).zip(&dp) {
            *acc += x * y;
        }
    }
    let cell = math::powi(g.spacing(), g.dim() as i32);
    math::sqrt(cell * adv.iter().map(|v| v * v).sum::<f64>())
}

/// Both sides of `∫ u_vert ρ = ∫ |u|²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyIdentity {
    pub lhs: f64,
    pub rhs: f64,
}

impl EnergyIdentity {
    pub fn defect(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

pub fn energy_identity_check(rho: &SpectralField) -> EnergyIdentity {
    let u = velocity(rho);
    let lhs = u.last().unwrap().inner(rho);
    let rhs = u.iter().map(|c| c.l2_norm_sq()).sum();
    EnergyIdentity { lhs, rhs }
}

/// Which lower bound applies to the quadratic form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormBound {
    /// `Ω' ≥ K`, `Ω''' ≤ 0`: `Q ≥ K ‖R₁g‖²`.
    Monotone,
    /// `Ω' ≥ K`, `‖Ω'''₊‖_∞ < 2π²K`: `Q ≥ (K - ‖Ω'''₊‖_∞/(2π²)) ‖Rg‖²`.
    ThirdDerivative,
    /// Neither hypothesis set holds; the second bound is still evaluated.
    HypothesesUnmet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormReport {
    /// `Q[g] = ∫ Ω'(v) (𝒫g) g` with `𝒫` the symbol `|k_h|²/|k|²`.
    pub q: f64,
    pub r1_norm_sq: f64,
    pub r_norm_sq: f64,
    /// `K = min Ω'` on the grid.
    pub slope_floor: f64,
    pub third_positive_sup: f64,
    pub bound: FormBound,
    pub lower_bound: f64,
    pub margin: f64,
}

/// Evaluates the linear-stability form of `profile` on `g`.
///
/// The product `Ω'·(𝒫g)·g` is summed on the grid, which is exact when the
/// grid resolves the sum of the bandwidths of `ω'` and twice that of `g`.
pub fn quadratic_form(plan: &FftPlan, profile: &StratifiedProfile, g: &SpectralField) -> FormReport {
    let grid = g.grid();
    let vertical = grid.vertical_axis();
    let pg = crate::multiplier::apply_real_table(velocity_symbols(grid).last().unwrap(), g);
    let (pg_phys, g_phys) = plan.inverse_pair(&pg, g);
    let n = grid.n();
    let slope_at: Vec<f64> = (0..n).map(|j| profile.derivative(1, grid.coordinate(j))).collect();
    let mut q = 0.0;
    for i in 0..grid.len() {
        let v = grid.unflatten(i)[vertical];
        q += slope_at[v] * pg_phys[i] * g_phys[i];
    }
    q *= math::powi(grid.spacing(), grid.dim() as i32);

    let mut r1 = 0.0;
    let mut r = 0.0;
    for (i, c) in g.coeffs().iter().enumerate().skip(1) {
        if grid.touches_nyquist(i) {
            continue;
        }
        let k = grid.wavevector(i);
        let h: f64 = (0..vertical).map(|a| (k[a] * k[a]) as f64).sum();
        let p = h / norm_sq(k);
        r1 += p * c.norm_sqr();
        r += p * p * c.norm_sqr();
    }
    r1 *= grid.volume();
    r *= grid.volume();

    let (_, slope_floor) = profile::grid_extremum(|y| profile.derivative(1, y), PROFILE_SAMPLES, false);
    let third = third_positive_sup(profile);
    let bound = if slope_floor > 0.0 && third <= 0.0 {
        FormBound::Monotone
    } else if slope_floor > 0.0 && third < 2.0 * PI * PI * slope_floor {
        FormBound::ThirdDerivative
    } else {
        FormBound::HypothesesUnmet
    };
    let lower_bound = match bound {
        FormBound::Monotone => slope_floor * r1,
        _ => (slope_floor - third / (2.0 * PI * PI)) * r,
    };
    FormReport {
        q,
        r1_norm_sq: r1,
        r_norm_sq: r,
        slope_floor,
        third_positive_sup: third,
        bound,
        lower_bound,
        margin: q - lower_bound,
    }
}

fn third_positive_sup(profile: &StratifiedProfile) -> f64 {
    let (_, m) = profile::grid_extremum(|y| profile.derivative(3, y), PROFILE_SAMPLES, true);
    m.max(0.0)
}

/// Witnesses for the admissibility conditions of a stratified profile:
/// (A) `ω` periodic, (B) `Ω' ≥ c > 0`, (C) `‖Ω'''₊‖_∞ < cπ²/2`,
/// (D) `ω ∈ W^{21,∞}` (finite grid sup-norms of all derivatives).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub periodic: bool,
    pub periodicity_defect: f64,
    pub monotone: bool,
    pub slope_floor: f64,
    pub third_derivative: bool,
    pub third_positive_sup: f64,
    pub third_threshold: f64,
    pub smooth: bool,
    pub derivative_sup_norms: Vec<f64>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.periodic && self.monotone && self.third_derivative && self.smooth
    }
}

pub fn profile_conditions(profile: &StratifiedProfile) -> ConditionReport {
    let omega = &profile.omega;
    let periodicity_defect = (0..=MAX_DERIVATIVE_ORDER)
        .map(|m| {
            let (a, b) = (omega.derivative(m, -PI), omega.derivative(m, PI));
            (a - b).abs() / (1.0 + a.abs().max(b.abs()))
        })
        .fold(0.0, f64::max);
    let (_, slope_floor) = profile::grid_extremum(|y| profile.derivative(1, y), PROFILE_SAMPLES, false);
    let third = third_positive_sup(profile);
    let third_threshold = slope_floor * PI * PI / 2.0;
    let derivative_sup_norms: Vec<f64> = (0..=MAX_DERIVATIVE_ORDER)
        .map(|m| {
            (0..=PROFILE_SAMPLES)
                .map(|j| omega.derivative(m, -PI + math::TWO_PI * j as f64 / PROFILE_SAMPLES as f64).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    ConditionReport {
        periodic: periodicity_defect <= 1e-10,
        periodicity_defect,
        monotone: slope_floor > 0.0,
        slope_floor,
        third_derivative: third < third_threshold,
        third_positive_sup: third,
        third_threshold,
        smooth: derivative_sup_norms.iter().all(|v| v.is_finite()),
        derivative_sup_norms,
    }
}

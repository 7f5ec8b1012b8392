//! Dealiased pseudo-spectral integration of the perturbation equation
//! `∂ₜρ + u·∇ρ = -Ω'(vert)·u_vert` on `𝕋²` and `𝕋³`.
//!
//! The constant-slope part `-K u_vert` is a Fourier multiplier and is
//! integrated exactly by an integrating factor (Lawson's fourth-order
//! Runge–Kutta). The remainder `-(Ω' - K)u_vert - u·∇ρ` is formed on the
//! grid and truncated by the configured dealias rule.

mod config;
mod diagnostics;

pub use config::{DealiasRule, DtPolicy, InitialPerturbation, ModeSpec, SimConfig};
pub use diagnostics::{DiagnosticsRecord, EnergyLedger};

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::math;
use crate::stability::StratifiedProfile;
use crate::velocity::velocity_symbols;

/// Solver state. The velocity is always re-derived from `ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub step: u64,
    rho: SpectralField,
    u: Vec<SpectralField>,
}

impl SimState {
    pub fn new(t: f64, step: u64, rho: SpectralField) -> Self {
        let u = crate::velocity::velocity(&rho);
        SimState { t, step, rho, u }
    }

    pub fn rho(&self) -> &SpectralField {
        &self.rho
    }

    pub fn velocity(&self) -> &[SpectralField] {
        &self.u
    }

    pub fn into_rho(self) -> SpectralField {
        self.rho
    }
}

/// Exact linear factors `e^{L h/2}` and `e^{L h}` for one step size.
#[derive(Clone, Debug)]
pub struct LinearFactors {
    h: f64,
    half: Vec<f64>,
    full: Vec<f64>,
}

/// Which parts of the explicit term to include.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Parts {
    pub advection: bool,
    pub slope: bool,
}

/// Reason a run stopped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    BlowUp { t: f64, max_coeff: f64 },
    Failed { message: alloc::string::String },
}

/// Records emitted by a run, its final state, and why it ended. A run that
/// fails keeps the records produced before the failure.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub records: Vec<DiagnosticsRecord>,
    pub state: SimState,
    pub termination: Termination,
    pub error: Option<Error>,
}

/// Precomputed tables for one configuration.
#[derive(Debug)]
pub struct Simulation {
    config: SimConfig,
    plan: FftPlan,
    grid: Grid,
    vel: Vec<Vec<f64>>,
    /// `-K · û_vert symbol`, the exactly integrated linear symbol.
    linear: Vec<f64>,
    /// `k_a` per mode and axis, zero on Nyquist planes.
    wavenumbers: Vec<Vec<f64>>,
    /// `ω'(vert)` at every grid point.
    variable_slope: Vec<f64>,
    has_variable_slope: bool,
    retained: Vec<bool>,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        let grid = config.grid()?;
        Self::with_plan(config, FftPlan::new(grid))
    }

    pub fn with_plan(config: SimConfig, plan: FftPlan) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        if plan.grid() != grid {
            return Err(Error::Config("FFT plan grid does not match the configuration".into()));
        }
        let vel = velocity_symbols(grid);
        let k = config.profile.slope;
        let linear = vel[grid.dim() - 1].iter().map(|s| -k * s).collect();
        let va = grid.vertical_axis();
        let column: Vec<f64> = (0..grid.n()).map(|j| config.profile.variable_slope(grid.coordinate(j))).collect();
        let variable_slope: Vec<f64> = (0..grid.len()).map(|i| column[grid.unflatten(i)[va]]).collect();
        let wavenumbers = (0..grid.dim())
            .map(|a| {
                (0..grid.len())
                    .map(|i| if grid.touches_nyquist(i) { 0.0 } else { grid.wavevector(i)[a] as f64 })
                    .collect()
            })
            .collect();
        let has_variable_slope = variable_slope.iter().any(|v| *v != 0.0);
        let retained = (0..grid.len())
            .map(|i| match config.dealias {
                DealiasRule::TwoThirds => grid.is_retained(i),
                DealiasRule::None => !grid.touches_nyquist(i),
            })
            .collect();
        Ok(Simulation {
            config,
            plan,
            grid,
            vel,
            linear,
            wavenumbers,
            variable_slope,
            has_variable_slope,
            retained,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn plan(&self) -> &FftPlan {
        &self.plan
    }

    pub fn profile(&self) -> &StratifiedProfile {
        &self.config.profile
    }

    pub fn initial_state(&self) -> Result<SimState> {
        Ok(SimState::new(0.0, 0, self.config.initial_field()?))
    }

    pub fn linear_factors(&self, h: f64) -> LinearFactors {
        LinearFactors {
            h,
            half: self.linear.iter().map(|l| math::exp(0.5 * h * l)).collect(),
            full: self.linear.iter().map(|l| math::exp(h * l)).collect(),
        }
    }

    fn parts(&self) -> Parts {
        Parts { advection: self.config.nonlinear, slope: self.has_variable_slope }
    }

    fn truncate(&self, f: &mut SpectralField) {
        for (c, keep) in f.coeffs_mut().iter_mut().zip(&self.retained) {
            if !keep {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        f.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    }

    /// Explicit part `-(Ω' - K)u_vert - u·∇ρ` (the selected pieces of it),
    /// dealiased, and the grid maximum of `|u|` when it was formed.
    pub(crate) fn explicit(&self, rho: &SpectralField, parts: Parts) -> (SpectralField, f64) {
        let g = self.grid;
        let dim = g.dim();
        let v = dim - 1;
        if !parts.advection && !parts.slope {
            return (SpectralField::zeros(g), 0.0);
        }
        let mut acc = alloc::vec![0.0; g.len()];
        let mut speed_sq = alloc::vec![0.0; g.len()];
        let table = |a: usize| crate::multiplier::apply_real_table(&self.vel[a], rho);
        if parts.advection {
            for a in 0..dim {
                let ua = table(a);
                let mut da = rho.clone();
                for (c, k) in da.coeffs_mut().iter_mut().zip(&self.wavenumbers[a]) {
                    *c = Complex64::new(-c.im * k, c.re * k);
                }
                let (up, dp) = self.plan.inverse_pair(&ua, &da);
                for i in 0..g.len() {
                    acc[i] -= up[i] * dp[i];
                    speed_sq[i] += up[i] * up[i];
                }
                if a == v && parts.slope {
                    self.add_slope(&mut acc, &up);
                }
            }
        } else {
            let uv = self.plan.inverse(&table(v));
            for i in 0..g.len() {
                speed_sq[i] = uv[i] * uv[i];
            }
            self.add_slope(&mut acc, &uv);
        }
        let umax = math::sqrt(speed_sq.iter().copied().fold(0.0, f64::max));
        let mut out = self.plan.forward(&acc).expect("grid-sized array");
        self.truncate(&mut out);
        (out, umax)
    }

    fn add_slope(&self, acc: &mut [f64], uv: &[f64]) {
        for ((a, w), u) in acc.iter_mut().zip(&self.variable_slope).zip(uv) {
            *a -= w * u;
        }
    }

    /// Full spectral right-hand side `-Ω'(vert)u_vert - u·∇ρ` (advection
    /// omitted when the nonlinearity is disabled).
    pub fn rhs(&self, rho: &SpectralField) -> SpectralField {
        let (mut out, _) = self.explicit(rho, self.parts());
        for ((c, r), l) in out.coeffs_mut().iter_mut().zip(rho.coeffs()).zip(&self.linear) {
            *c += r * l;
        }
        out.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        out
    }

    /// Grid maximum of `|u|` for the state.
    pub fn max_speed(&self, state: &SimState) -> f64 {
        let u = state.velocity();
        let g = self.grid;
        let mut speed_sq = alloc::vec![0.0; g.len()];
        let mut a = 0;
        while a < u.len() {
            let (p, q) = if a + 1 < u.len() {
                self.plan.inverse_pair(&u[a], &u[a + 1])
            } else {
                (self.plan.inverse(&u[a]), alloc::vec![0.0; g.len()])
            };
            for i in 0..g.len() {
                speed_sq[i] += p[i] * p[i] + q[i] * q[i];
            }
            a += 2;
        }
        math::sqrt(speed_sq.into_iter().fold(0.0, f64::max))
    }

    /// Step size chosen by the configured policy for this state.
    pub fn choose_dt(&self, state: &SimState) -> f64 {
        match self.config.dt {
            DtPolicy::Fixed { dt } => dt,
            DtPolicy::Cfl { safety } => safety * self.grid.spacing() / f64::max(1.0, self.max_speed(state)),
        }
    }

    /// One Lawson RK4 step of size `dt` (negative `dt` steps backwards).
    pub fn step(&self, state: &SimState, dt: f64) -> Result<SimState> {
        self.step_with(state, &self.linear_factors(dt))
    }

    #[allow(clippy::needless_range_loop)]
    pub fn step_with(&self, state: &SimState, f: &LinearFactors) -> Result<SimState> {
        let h = f.h;
        let parts = self.parts();
        let rho = &state.rho;
        let (k1, umax) = self.explicit(rho, parts);
        if parts.advection {
            let courant = umax * h.abs() / self.grid.spacing();
            if courant > self.config.cfl_limit {
                return Err(Error::Cfl { courant, limit: self.config.cfl_limit });
            }
        }
        let n = rho.coeffs().len();
        let r = rho.coeffs();
        let mut stage = SpectralField::zeros(self.grid);

        // a = E(h/2)(ρ + h/2 k1)
        for i in 0..n {
            stage.coeffs_mut()[i] = f.half[i] * (r[i] + 0.5 * h * k1.coeffs()[i]);
        }
        let (k2, _) = self.explicit(&stage, parts);
        // b = E(h/2)ρ + h/2 k2
        for i in 0..n {
            stage.coeffs_mut()[i] = f.half[i] * r[i] + 0.5 * h * k2.coeffs()[i];
        }
        let (k3, _) = self.explicit(&stage, parts);
        // c = E(h)ρ + h E(h/2) k3
        for i in 0..n {
            stage.coeffs_mut()[i] = f.full[i] * r[i] + h * f.half[i] * k3.coeffs()[i];
        }
        let (k4, _) = self.explicit(&stage, parts);
        let mut next = SpectralField::zeros(self.grid);
        let w = h / 6.0;
        for i in 0..n {
            next.coeffs_mut()[i] = f.full[i] * r[i]
                + w * (f.full[i] * k1.coeffs()[i]
                    + 2.0 * f.half[i] * (k2.coeffs()[i] + k3.coeffs()[i])
                    + k4.coeffs()[i]);
        }
        next.coeffs_mut()[0] = r[0];
        let t = state.t + h;
        let max_coeff = next.max_abs();
        if !next.is_finite() || max_coeff > self.config.blowup_threshold {
            return Err(Error::BlowUp { t, max_coeff });
        }
        Ok(SimState::new(t, state.step + 1, next))
    }

    /// Runs from `state` to `t_end`, calling `observer` after every
    /// accepted step (and once for the initial state) with the record when
    /// one was taken.
    pub fn run_from(
        &self,
        mut state: SimState,
        mut observer: impl FnMut(&SimState, Option<&DiagnosticsRecord>),
    ) -> RunOutcome {
        let t_end = self.config.t_end;
        let stride = self.config.diagnostic_stride;
        let mut records = Vec::new();
        let mut factors: Option<LinearFactors> = None;
        // The finite-difference step depends on the state alone, so a run
        // resumed from a checkpoint reproduces the uninterrupted records.
        let first = self.diagnostics(&state, self.choose_dt(&state));
        observer(&state, Some(&first));
        records.push(first);

        let fail = |records: Vec<DiagnosticsRecord>, state: SimState, e: Error| {
            let termination = match &e {
                Error::BlowUp { t, max_coeff } => Termination::BlowUp { t: *t, max_coeff: *max_coeff },
                other => Termination::Failed { message: alloc::format!("{other}") },
            };
            RunOutcome { records, state, termination, error: Some(e) }
        };

        loop {
            let remaining = t_end - state.t;
            let nominal = self.choose_dt(&state);
            if remaining <= 1e-9 * nominal {
                break;
            }
            let h = nominal.min(remaining);
            if factors.as_ref().is_none_or(|f| f.h != h) {
                factors = Some(self.linear_factors(h));
            }
            let next = match self.step_with(&state, factors.as_ref().unwrap()) {
                Ok(s) => s,
                Err(e) => return fail(records, state, e),
            };
            state = next;
            let done = t_end - state.t <= 1e-9 * nominal;
            if state.step.is_multiple_of(stride) || done {
                let rec = self.diagnostics(&state, self.choose_dt(&state));
                observer(&state, Some(&rec));
                records.push(rec);
            } else {
                observer(&state, None);
            }
        }
        RunOutcome { records, state, termination: Termination::Completed, error: None }
    }
}

/// Builds the simulation with the radix-2 transform and runs it from the
/// configured initial perturbation.
pub fn run(config: SimConfig) -> Result<RunOutcome> {
    let sim = Simulation::new(config)?;
    let state = sim.initial_state()?;
    Ok(sim.run_from(state, |_, _| {}))
}

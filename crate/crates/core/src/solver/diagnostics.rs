use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::math;
use crate::multiplier::FourierMultiplier;
use crate::norms::{grad_linf, sobolev_norm, sobolev_norm_sq, sobolev_weight, SobolevIndex};
use crate::velocity::bar_tilde_split;

use super::{Parts, SimState, Simulation};

/// The terms of `∂ₜ‖ρ‖²_{H^s} ≤ C(T₁ + T₂) - T₃` at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub t: f64,
    pub s: f64,
    /// Exact semi-discrete `∂ₜ‖ρ‖²_{H^s} = 2 Re⟨ρ, rhs⟩_{H^s}`.
    pub derivative: f64,
    /// Centred difference over one step each way; `None` when a trial step
    /// was rejected.
    pub derivative_fd: Option<f64>,
    /// Contribution of `-u·∇ρ` alone.
    pub advective_derivative: f64,
    /// `‖∇u_vert‖_{L^∞} ‖ρ‖²_{H^s}`.
    pub t1: f64,
    /// `‖u‖²_{H^s} ‖ρ‖_{H^s}`.
    pub t2: f64,
    /// `½‖u‖²_{H^s}`.
    pub t3: f64,
    /// Smallest `C ≥ 0` making the inequality hold now.
    pub c_min: f64,
    /// `|advective_derivative| / (T₁ + T₂)`.
    pub c_advective: f64,
}

/// One row of the diagnostics series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: u64,
    /// `‖ρ‖_{H^s}` for each configured `s`, in order.
    pub rho_hs: Vec<f64>,
    /// `‖ρ̄‖_{H^m}`, `‖ρ̃‖_{H^m}` with `m` the split index.
    pub bar_hm: f64,
    pub tilde_hm: f64,
    pub tilde_l2: f64,
    /// Per velocity component.
    pub u_h3: Vec<f64>,
    pub u_h1: Vec<f64>,
    pub u_l2: f64,
    pub dx_rho_l2: f64,
    pub grad_uvert_linf: f64,
    pub mean: f64,
    pub max_coeff: f64,
    pub energy: Option<EnergyLedger>,
}

fn idx(s: f64) -> SobolevIndex {
    SobolevIndex::new(s).expect("validated Sobolev index")
}

impl Simulation {
    /// Diagnostics for `state`; `h` is the step used for the finite
    /// difference in the energy ledger.
    pub fn diagnostics(&self, state: &SimState, h: f64) -> DiagnosticsRecord {
        let cfg = &self.config;
        let rho = state.rho();
        let u = state.velocity();
        let (bar, tilde) = bar_tilde_split(rho);
        let m = idx(cfg.split_index);
        let dx = FourierMultiplier::derivative(0).apply(rho).expect("finite symbol");
        let energy = cfg.energy_index.and_then(|s| self.energy_estimate_monitor(state, s, h).ok());
        DiagnosticsRecord {
            t: state.t,
            step: state.step,
            rho_hs: cfg.sobolev.iter().map(|&s| sobolev_norm(rho, idx(s))).collect(),
            bar_hm: sobolev_norm(&bar, m),
            tilde_hm: sobolev_norm(&tilde, m),
            tilde_l2: tilde.l2_norm(),
            u_h3: u.iter().map(|c| sobolev_norm(c, SobolevIndex::from(3))).collect(),
            u_h1: u.iter().map(|c| sobolev_norm(c, SobolevIndex::from(1))).collect(),
            u_l2: math::sqrt(u.iter().map(|c| c.l2_norm_sq()).sum()),
            dx_rho_l2: dx.l2_norm(),
            grad_uvert_linf: grad_linf(&self.plan, u.last().unwrap()),
            mean: rho.mean(),
            max_coeff: rho.max_abs(),
            energy,
        }
    }

    /// Energy-estimate ledger at index `s ≥ 4`. `h` sets the trial steps of
    /// the finite-difference derivative.
    pub fn energy_estimate_monitor(&self, state: &SimState, s: f64, h: f64) -> Result<EnergyLedger> {
        if !(s >= 4.0 && s.is_finite()) {
            return Err(Error::Precondition(alloc::format!("the energy estimate holds for s >= 4, got {s}")));
        }
        let g = self.grid;
        let rho = state.rho();
        let weights: Vec<f64> = (0..g.len()).map(|i| sobolev_weight(g.wavevector(i), s)).collect();
        let pairing = |f: &SpectralField| -> f64 {
            let sum: f64 = rho
                .coeffs()
                .iter()
                .zip(f.coeffs())
                .zip(&weights)
                .map(|((a, b), w)| w * (a.conj() * b).re)
                .sum();
            2.0 * g.volume() * sum
        };
        let derivative = pairing(&self.rhs(rho));
        let advective_derivative = if self.config.nonlinear {
            pairing(&self.explicit(rho, Parts { advection: true, slope: false }).0)
        } else {
            0.0
        };
        let derivative_fd = match (self.step(state, h), self.step(state, -h)) {
            (Ok(fwd), Ok(bwd)) => {
                let si = idx(s);
                Some((sobolev_norm_sq(fwd.rho(), si) - sobolev_norm_sq(bwd.rho(), si)) / (2.0 * h))
            }
            _ => None,
        };
        let si = idx(s);
        let rho_sq = sobolev_norm_sq(rho, si);
        let u_sq: f64 = state.velocity().iter().map(|c| sobolev_norm_sq(c, si)).sum();
        let t1 = grad_linf(&self.plan, state.velocity().last().unwrap()) * rho_sq;
        let t2 = u_sq * math::sqrt(rho_sq);
        let t3 = 0.5 * u_sq;
        let denom = t1 + t2;
        let (c_min, c_advective) = if denom > 0.0 {
            (f64::max(0.0, (derivative + t3) / denom), advective_derivative.abs() / denom)
        } else {
            (0.0, 0.0)
        };
        Ok(EnergyLedger {
            t: state.t,
            s,
            derivative,
            derivative_fd,
            advective_derivative,
            t1,
            t2,
            t3,
            c_min,
            c_advective,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{DtPolicy, InitialPerturbation, ModeSpec, SimConfig};
    use super::*;
    use crate::grid::norm_sq;
    use crate::linear::damping_rate;

    #[test]
    fn equilibrium_ledger_is_zero() {
        let cfg = SimConfig {
            initial: InitialPerturbation::Modes { modes: alloc::vec![ModeSpec { k: alloc::vec![0, 2], re: 1.0, im: 0.0 }] },
            dt: DtPolicy::Fixed { dt: 0.1 },
            ..SimConfig::new(2, 32, 1e-3, 1.0)
        };
        let sim = Simulation::new(cfg).unwrap();
        let s = sim.initial_state().unwrap();
        let l = sim.energy_estimate_monitor(&s, 4.0, 0.1).unwrap();
        assert_eq!((l.derivative, l.t1, l.t2, l.t3, l.c_min), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(sim.energy_estimate_monitor(&s, 3.0, 0.1).is_err());
    }

    #[test]
    fn linear_derivative_is_the_damping_sum() {
        let cfg = SimConfig { nonlinear: false, ..SimConfig::new(2, 32, 1e-3, 1.0) };
        let sim = Simulation::new(cfg).unwrap();
        let s = sim.initial_state().unwrap();
        let g = s.rho().grid();
        let l = sim.energy_estimate_monitor(&s, 4.0, 1e-3).unwrap();
        let exact: f64 = -2.0
            * g.volume()
            * (0..g.len())
                .map(|i| {
                    let k = g.wavevector(i);
                    damping_rate(g, k) * (1.0 + norm_sq(k)).powi(4) * s.rho().coeffs()[i].norm_sqr()
                })
                .sum::<f64>();
        assert!(l.derivative <= 0.0);
        assert!((l.derivative - exact).abs() < 1e-12 * exact.abs());
        let fd = l.derivative_fd.unwrap();
        assert!((fd - exact).abs() < 1e-5 * exact.abs());
    }
}

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{norm_sq, Grid};
use crate::norms::{sobolev_norm, SobolevIndex};
use crate::random::{band_field, Sampling};
use crate::stability::StratifiedProfile;

/// How the time step is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DtPolicy {
    Fixed { dt: f64 },
    /// `dt = safety·Δx / max(1, max|u|)`.
    Cfl {
        #[serde(default = "default_safety")]
        safety: f64,
    },
}

fn default_safety() -> f64 {
    0.5
}

impl Default for DtPolicy {
    fn default() -> Self {
        DtPolicy::Cfl { safety: default_safety() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DealiasRule {
    #[default]
    TwoThirds,
    None,
}

/// One explicit Fourier mode; `k` has one entry per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Shape of the initial perturbation before it is rescaled to amplitude ε.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialPerturbation {
    /// Uniform random magnitudes and phases on `0 < |k| ≤ band`, drawn from
    /// the run seed.
    Random {
        #[serde(default = "default_band")]
        band: f64,
    },
    Modes { modes: Vec<ModeSpec> },
}

fn default_band() -> f64 {
    6.0
}

impl Default for InitialPerturbation {
    fn default() -> Self {
        InitialPerturbation::Random { band: default_band() }
    }
}

/// Full description of a nonlinear run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dim: usize,
    pub n: usize,
    #[serde(default = "default_profile")]
    pub profile: StratifiedProfile,
    #[serde(default)]
    pub initial: InitialPerturbation,
    /// Target `‖ρ₀‖_{H^amplitude_index}`.
    pub epsilon: f64,
    #[serde(default = "default_amplitude_index")]
    pub amplitude_index: f64,
    #[serde(default)]
    pub dt: DtPolicy,
    pub t_end: f64,
    /// Steps between diagnostic records.
    #[serde(default = "default_stride")]
    pub diagnostic_stride: u64,
    /// Steps between checkpoints; 0 disables them.
    #[serde(default)]
    pub checkpoint_stride: u64,
    #[serde(default)]
    pub dealias: DealiasRule,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub nonlinear: bool,
    #[serde(default = "default_sobolev")]
    pub sobolev: Vec<f64>,
    /// Index `m` of the bar/tilde `H^m` diagnostics.
    #[serde(default = "default_amplitude_index")]
    pub split_index: f64,
    /// Index `s ≥ 4` of the energy-estimate ledger; `None` disables it.
    #[serde(default = "default_energy_index")]
    pub energy_index: Option<f64>,
    #[serde(default = "default_cfl_limit")]
    pub cfl_limit: f64,
    /// Largest coefficient modulus tolerated before declaring blow-up.
    #[serde(default = "default_blowup")]
    pub blowup_threshold: f64,
}

fn default_profile() -> StratifiedProfile {
    StratifiedProfile::linear(1.0)
}
fn default_amplitude_index() -> f64 {
    4.0
}
fn default_stride() -> u64 {
    10
}
fn default_true() -> bool {
    true
}
fn default_sobolev() -> Vec<f64> {
    alloc::vec![0.0, 3.0, 4.0, 5.0, 10.0]
}
fn default_energy_index() -> Option<f64> {
    Some(4.0)
}
fn default_cfl_limit() -> f64 {
    1.0
}
fn default_blowup() -> f64 {
    1e3
}

impl SimConfig {
    /// Defaults for everything but the grid, amplitude and horizon.
    pub fn new(dim: usize, n: usize, epsilon: f64, t_end: f64) -> Self {
        SimConfig {
            dim,
            n,
            profile: default_profile(),
            initial: InitialPerturbation::default(),
            epsilon,
            amplitude_index: default_amplitude_index(),
            dt: DtPolicy::default(),
            t_end,
            diagnostic_stride: default_stride(),
            checkpoint_stride: 0,
            dealias: DealiasRule::default(),
            seed: 0,
            nonlinear: true,
            sobolev: default_sobolev(),
            split_index: default_amplitude_index(),
            energy_index: default_energy_index(),
            cfl_limit: default_cfl_limit(),
            blowup_threshold: default_blowup(),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n)
    }

    /// Checks every constraint and names the offending key.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        let bad = |key: &str, msg: alloc::string::String| Err(Error::Config(alloc::format!("{key}: {msg}")));
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon", alloc::format!("must be finite and nonnegative, got {}", self.epsilon));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end", alloc::format!("must be positive, got {}", self.t_end));
        }
        match self.dt {
            DtPolicy::Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => {
                return bad("dt.dt", alloc::format!("must be positive, got {dt}"));
            }
            DtPolicy::Cfl { safety } if !(safety > 0.0 && safety <= 1.0) => {
                return bad("dt.safety", alloc::format!("must lie in (0, 1], got {safety}"));
            }
            _ => {}
        }
        if self.diagnostic_stride == 0 {
            return bad("diagnostic_stride", "must be at least 1".into());
        }
        if !(self.slope_finite()) {
            return bad("profile.slope", "must be finite".into());
        }
        for (key, s) in [("amplitude_index", self.amplitude_index), ("split_index", self.split_index)]
            .into_iter()
            .chain(self.sobolev.iter().map(|&s| ("sobolev", s)))
        {
            if SobolevIndex::new(s).is_none() {
                return bad(key, alloc::format!("Sobolev index must be finite and nonnegative, got {s}"));
            }
        }
        if let Some(s) = self.energy_index {
            if !(s >= 4.0 && s.is_finite()) {
                return bad("energy_index", alloc::format!("the energy estimate needs s >= 4, got {s}"));
            }
        }
        if !(self.cfl_limit > 0.0) {
            return bad("cfl_limit", alloc::format!("must be positive, got {}", self.cfl_limit));
        }
        if !(self.blowup_threshold > 0.0) {
            return bad("blowup_threshold", alloc::format!("must be positive, got {}", self.blowup_threshold));
        }
        let cutoff = match self.dealias {
            DealiasRule::TwoThirds => grid.dealias_cutoff(),
            DealiasRule::None => grid.n() as i64 / 2 - 1,
        };
        match &self.initial {
            InitialPerturbation::Random { band } => {
                if !(*band >= 1.0) || *band > cutoff as f64 {
                    return bad("initial.band", alloc::format!("must lie in [1, {cutoff}], got {band}"));
                }
            }
            InitialPerturbation::Modes { modes } => {
                if modes.is_empty() {
                    return bad("initial.modes", "at least one mode is required".into());
                }
                for m in modes {
                    if m.k.len() != self.dim {
                        return bad("initial.modes.k", alloc::format!("needs {} entries, got {:?}", self.dim, m.k));
                    }
                    if m.k.iter().all(|&c| c == 0) {
                        return bad("initial.modes.k", "the mean mode cannot be perturbed".into());
                    }
                    if m.k.iter().any(|c| c.abs() > cutoff) {
                        return bad(
                            "initial.modes.k",
                            alloc::format!("{:?} lies outside the retained band |k_j| <= {cutoff}", m.k),
                        );
                    }
                    if !(m.re.is_finite() && m.im.is_finite()) {
                        return bad("initial.modes", "coefficients must be finite".into());
                    }
                }
            }
        }
        Ok(())
    }

    fn slope_finite(&self) -> bool {
        self.profile.slope.is_finite()
    }

    /// The initial perturbation rescaled so that its `H^amplitude_index`
    /// norm is ε.
    pub fn initial_field(&self) -> Result<SpectralField> {
        self.validate()?;
        let grid = self.grid()?;
        let shape = match &self.initial {
            InitialPerturbation::Random { band } => {
                let r2 = band * band;
                band_field(
                    grid,
                    self.seed,
                    |_| 1.0,
                    |k| {
                        let q = norm_sq(k);
                        q > 0.0 && q <= r2
                    },
                    Sampling::UniformMagnitude,
                )
            }
            InitialPerturbation::Modes { modes } => {
                let list: Vec<([i64; 3], Complex64)> = modes
                    .iter()
                    .map(|m| {
                        let mut k = [0i64; 3];
                        k[..m.k.len()].copy_from_slice(&m.k);
                        (k, Complex64::new(m.re, m.im))
                    })
                    .collect();
                SpectralField::from_modes(grid, &list)?
            }
        };
        let norm = sobolev_norm(&shape, SobolevIndex::new(self.amplitude_index).expect("validated"));
        if norm == 0.0 {
            return Err(Error::Config("initial: perturbation shape is identically zero".into()));
        }
        Ok(shape.scaled(self.epsilon / norm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = SimConfig::new(2, 32, 1e-3, 1.0);
        c.validate().unwrap();
        let f = c.initial_field().unwrap();
        let h4 = sobolev_norm(&f, SobolevIndex::from(4));
        assert!((h4 - 1e-3).abs() < 1e-15);
        assert!(f.is_dealiased());
        assert_eq!(f.mean(), 0.0);
    }

    #[test]
    fn each_constraint_is_enforced() {
        let base = SimConfig::new(2, 32, 1e-3, 1.0);
        let cases: Vec<(SimConfig, &str)> = alloc::vec![
            (SimConfig { n: 100, ..base.clone() }, "power of two"),
            (SimConfig { epsilon: -1.0, ..base.clone() }, "epsilon"),
            (SimConfig { t_end: 0.0, ..base.clone() }, "t_end"),
            (SimConfig { dt: DtPolicy::Fixed { dt: 0.0 }, ..base.clone() }, "dt.dt"),
            (SimConfig { dt: DtPolicy::Cfl { safety: 1.5 }, ..base.clone() }, "dt.safety"),
            (SimConfig { diagnostic_stride: 0, ..base.clone() }, "diagnostic_stride"),
            (SimConfig { sobolev: alloc::vec![-1.0], ..base.clone() }, "sobolev"),
            (SimConfig { energy_index: Some(3.0), ..base.clone() }, "energy_index"),
            (SimConfig { initial: InitialPerturbation::Random { band: 30.0 }, ..base.clone() }, "initial.band"),
            (
                SimConfig {
                    initial: InitialPerturbation::Modes { modes: alloc::vec![ModeSpec { k: alloc::vec![1], re: 1.0, im: 0.0 }] },
                    ..base.clone()
                },
                "initial.modes.k",
            ),
        ];
        for (cfg, key) in cases {
            let err = cfg.validate().unwrap_err();
            let msg = alloc::format!("{err}");
            assert!(msg.contains(key), "{msg} should mention {key}");
        }
    }
}

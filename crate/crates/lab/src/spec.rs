//! Experiment configuration: a TOML document with a top-level `kind` and a
//! kind-specific `[params]` table. Unknown keys are rejected everywhere.

use std::path::PathBuf;

use ipm_core::solver::{ModeSpec, SimConfig};
use ipm_core::stability::{Omega, StratifiedProfile};
use ipm_core::Grid;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Simulate2d,
    Simulate3d,
    LinearTorus,
    LinearWholeSpace,
    PerturbedLinear,
    Sharpness,
    VerifyLemmas,
    StabilityForms,
    Fit,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate2d => "simulate2d",
            Kind::Simulate3d => "simulate3d",
            Kind::LinearTorus => "linear-torus",
            Kind::LinearWholeSpace => "linear-whole-space",
            Kind::PerturbedLinear => "perturbed-linear",
            Kind::Sharpness => "sharpness",
            Kind::VerifyLemmas => "verify-lemmas",
            Kind::StabilityForms => "stability-forms",
            Kind::Fit => "fit",
        }
    }
}

/// `default` applies the documented tolerances; `strict` halves them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceProfile {
    #[default]
    Default,
    Strict,
}

impl ToleranceProfile {
    pub fn scale(self) -> f64 {
        match self {
            ToleranceProfile::Default => 1.0,
            ToleranceProfile::Strict => 0.5,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: Option<Kind>,
    output: Option<PathBuf>,
    seed: Option<u64>,
    tolerance_profile: Option<ToleranceProfile>,
    #[serde(default)]
    params: toml::Table,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub tolerance_profile: ToleranceProfile,
    pub params: Params,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Simulate(SimulateParams),
    LinearTorus(LinearTorusParams),
    WholeSpace(WholeSpaceParams),
    Perturbed(PerturbedParams),
    Sharpness(SharpnessParams),
    Lemmas(LemmaParams),
    Forms(FormsParams),
    Fit(FitParams),
}

/// Solver configuration plus the tolerances the run is judged against.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulateParams {
    #[serde(flatten)]
    pub config: SimConfig,
    pub checks: SimChecks,
}

/// Declared tolerances of a nonlinear run. Unset checks are not evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimChecks {
    /// Bound on `sup_t ‖ρ(t)‖_{H^a} / ε`, `a` the amplitude index, over every step.
    pub amplitude_growth_max: Option<f64>,
    /// Bound on `‖u(T)‖_{L²} / ‖u(0)‖_{L²}`.
    pub velocity_ratio_max: Option<f64>,
    /// Bound on `‖u_vert(T)‖_{H¹} / ‖u_vert(0)‖_{H¹}`.
    pub vertical_h1_ratio_max: Option<f64>,
    /// Lower bound on `sup_t ‖u(t)‖_{L²} / ‖u(0)‖_{L²}`.
    pub velocity_growth_min: Option<f64>,
    /// Upper bound on the fitted exponent of `‖ρ̄‖_{H^m}` over `fit_window`.
    pub bar_exponent_max: Option<f64>,
    pub fit_window: Option<[f64; 2]>,
    /// Bound on `sup_t |mean(ρ(t)) - mean(ρ(0))|`.
    pub mean_drift_max: Option<f64>,
    /// Relative bound on the divergence and energy-identity defects at `T`.
    pub identity_defect_max: Option<f64>,
}

impl Default for SimChecks {
    fn default() -> Self {
        SimChecks {
            amplitude_growth_max: Some(2.0),
            velocity_ratio_max: None,
            vertical_h1_ratio_max: None,
            velocity_growth_min: None,
            bar_exponent_max: None,
            fit_window: None,
            mean_drift_max: Some(1e-12),
            identity_defect_max: Some(1e-12),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinearTorusParams {
    pub n: usize,
    pub modes: Vec<ModeSpec>,
    pub times: Vec<f64>,
    /// Step of the nonlinearity-disabled solver run compared at the last time.
    pub solver_dt: f64,
}

impl Default for LinearTorusParams {
    fn default() -> Self {
        let m = |k: [i64; 2], re: f64, im: f64| ModeSpec { k: k.to_vec(), re, im };
        LinearTorusParams {
            n: 32,
            modes: vec![
                m([1, 0], 1.0, 0.0),
                m([0, 2], 0.5, 0.0),
                m([1, 1], 0.0, 0.7),
                m([-2, 3], 0.3, -0.2),
                m([3, -1], -0.4, 0.1),
            ],
            times: vec![0.1, 1.0, 10.0],
            solver_dt: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WholeSpaceParams {
    /// Width of the radial Gaussian `e^{-r²/(2σ²)}`.
    pub sigma: f64,
    /// Any of `identity`, `r1`, `r1_squared`, `lambda:<j>`.
    pub weights: Vec<String>,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for WholeSpaceParams {
    fn default() -> Self {
        WholeSpaceParams {
            sigma: 1.0,
            weights: vec!["identity".into(), "r1".into(), "r1_squared".into()],
            t_min: 1e2,
            t_max: 1e5,
            samples: 40,
            n_r: 64,
            n_theta: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbedParams {
    pub n: usize,
    /// `G(y) = amplitude · sin y`.
    pub amplitude: f64,
    pub delta: f64,
    /// Radial band `|k| ≤ band` of the initial spectrum.
    pub band: f64,
    /// Spectrum `|ρ̂(k)| = (1 + |k|)^{-decay}`.
    pub decay: f64,
    pub dt: Option<f64>,
    pub t_end: f64,
    pub samples: usize,
    pub sobolev: f64,
    pub window: [f64; 2],
    pub exponent_range: [f64; 2],
}

impl Default for PerturbedParams {
    fn default() -> Self {
        PerturbedParams {
            n: 128,
            amplitude: 0.05,
            delta: ipm_core::linear::DEFAULT_DELTA,
            band: 10.0,
            decay: 6.0,
            dt: None,
            t_end: 1e3,
            samples: 60,
            sobolev: 8.0,
            window: [10.0, 1e3],
            exponent_range: [-2.8, -2.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SharpnessParams {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    /// Lower bound required of the concentrated family.
    pub floor: f64,
    /// Window for the radial constants `ratio·(1+t)^{1/4}`.
    pub radial_window: [f64; 2],
}

impl Default for SharpnessParams {
    fn default() -> Self {
        SharpnessParams { t_min: 1.0, t_max: 1e4, samples: 40, floor: 0.3, radial_window: [1e2, 1e6] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AngularParams {
    pub ks: Vec<u32>,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    pub exponent_tolerance: f64,
    pub constant_tolerance: f64,
}

impl Default for AngularParams {
    fn default() -> Self {
        AngularParams {
            ks: vec![0, 1, 2],
            t_min: 1e2,
            t_max: 1e6,
            samples: 30,
            exponent_tolerance: 0.02,
            constant_tolerance: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvolutionParams {
    pub deltas: Vec<f64>,
    pub etas: Vec<f64>,
    pub t_max: f64,
    pub saturation_tolerance: f64,
}

impl Default for ConvolutionParams {
    fn default() -> Self {
        ConvolutionParams {
            deltas: vec![0.25, 0.5, 1.0, 1.25],
            etas: vec![0.25, 0.5, 1.0],
            t_max: 1e6,
            saturation_tolerance: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointwiseParams {
    pub ks: Vec<u32>,
    pub t_max: f64,
    pub saturation_tolerance: f64,
}

impl Default for PointwiseParams {
    fn default() -> Self {
        PointwiseParams { ks: vec![1, 2, 3, 4], t_max: 1e3, saturation_tolerance: 0.02 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GronwallParams {
    /// `[f0, A]` pairs.
    pub cases: Vec<[f64; 2]>,
    pub t_max: f64,
    pub saturation_tolerance: f64,
}

impl Default for GronwallParams {
    fn default() -> Self {
        GronwallParams { cases: vec![[1.0, 0.0], [1.0, 1.0]], t_max: 1e4, saturation_tolerance: 0.02 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaParams {
    pub angular: AngularParams,
    pub convolution: ConvolutionParams,
    pub pointwise: PointwiseParams,
    pub gronwall: GronwallParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FormsParams {
    pub n: usize,
    /// Random test functions have `|k_j| ≤ band`.
    pub band: i64,
    pub samples: usize,
    pub profiles: Vec<StratifiedProfile>,
    pub tolerance: f64,
}

impl Default for FormsParams {
    fn default() -> Self {
        FormsParams {
            n: 32,
            band: 8,
            samples: 1000,
            profiles: vec![
                StratifiedProfile::linear(1.0),
                StratifiedProfile::linear(2.5),
                StratifiedProfile::new(2.0, Omega::sine(1.0)),
            ],
            tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitParams {
    pub input: PathBuf,
    #[serde(default = "default_t_column")]
    pub t_column: String,
    pub value_column: String,
    pub window: [f64; 2],
    /// Keep only rows whose `filter_column` equals `filter_value`.
    #[serde(default)]
    pub filter_column: Option<String>,
    #[serde(default)]
    pub filter_value: Option<String>,
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

fn default_t_column() -> String {
    "t".into()
}

fn cfg_err(key: &str, msg: impl std::fmt::Display) -> LabError {
    LabError::Config(format!("{key}: {msg}"))
}

fn core_msg(e: ipm_core::Error) -> String {
    match e {
        ipm_core::Error::Config(m) => m,
        other => other.to_string(),
    }
}

fn grid_check(key: &str, dim: usize, n: usize) -> Result<(), LabError> {
    Grid::new(dim, n).map(|_| ()).map_err(|e| cfg_err(key, core_msg(e)))
}

fn positive(key: &str, v: f64) -> Result<(), LabError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(cfg_err(key, format!("must be positive and finite, got {v}")))
    }
}

fn window(key: &str, w: [f64; 2]) -> Result<(), LabError> {
    if w[0] >= 0.0 && w[0] < w[1] && w[1].is_finite() {
        Ok(())
    } else {
        Err(cfg_err(key, format!("needs 0 <= start < end, got {w:?}")))
    }
}

fn at_least(key: &str, v: usize, min: usize) -> Result<(), LabError> {
    if v >= min {
        Ok(())
    } else {
        Err(cfg_err(key, format!("must be at least {min}, got {v}")))
    }
}

/// Parses `lambda:<j>` and the named weights.
pub fn parse_weight(name: &str) -> Result<ipm_core::linear::Weight, LabError> {
    use ipm_core::linear::Weight;
    match name {
        "identity" => Ok(Weight::Identity),
        "r1" => Ok(Weight::R1),
        "r1_squared" => Ok(Weight::R1Squared),
        other => match other.strip_prefix("lambda:").map(str::parse::<f64>) {
            Some(Ok(j)) if j >= 0.0 && j.is_finite() => Ok(Weight::Lambda(j)),
            _ => Err(cfg_err(
                "params.weights",
                format!("unknown weight `{other}` (expected identity, r1, r1_squared or lambda:<j>)"),
            )),
        },
    }
}

/// Deserializes a parameter table, naming the offending key on failure.
fn deserialize_at<T: serde::de::DeserializeOwned>(prefix: &str, table: toml::Table) -> Result<T, LabError> {
    serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
        let path = e.path().to_string();
        let key = if path == "." { prefix.to_string() } else { format!("{prefix}.{path}") };
        LabError::Config(format!("{key}: {}", e.inner().message()))
    })
}

fn deserialize<T: serde::de::DeserializeOwned>(table: toml::Table) -> Result<T, LabError> {
    deserialize_at("params", table)
}

impl Params {
    fn parse(kind: Kind, mut table: toml::Table, seed: u64) -> Result<Params, LabError> {
        Ok(match kind {
            Kind::Simulate2d | Kind::Simulate3d => {
                let dim = if kind == Kind::Simulate2d { 2 } else { 3 };
                match table.get("dim") {
                    None => {
                        table.insert("dim".into(), toml::Value::Integer(dim));
                    }
                    Some(toml::Value::Integer(d)) if *d == dim => {}
                    Some(other) => return Err(cfg_err("params.dim", format!("{} requires dim = {dim}, got {other}", kind.name()))),
                }
                if table.contains_key("seed") {
                    return Err(cfg_err("params.seed", "set the seed at the top level or with --seed"));
                }
                table.insert("seed".into(), toml::Value::Integer(seed as i64));
                let checks: SimChecks = match table.remove("checks") {
                    Some(toml::Value::Table(t)) => deserialize_at("params.checks", t)?,
                    Some(other) => return Err(cfg_err("params.checks", format!("expected a table, got {other}"))),
                    None => SimChecks::default(),
                };
                if checks.bar_exponent_max.is_some() != checks.fit_window.is_some() {
                    return Err(cfg_err("params.checks.fit_window", "bar_exponent_max and fit_window go together"));
                }
                if let Some(w) = checks.fit_window {
                    window("params.checks.fit_window", w)?;
                }
                let cfg: SimConfig = deserialize(table)?;
                grid_check("params.n", cfg.dim, cfg.n)?;
                cfg.validate().map_err(|e| match e {
                    ipm_core::Error::Config(m) => LabError::Config(format!("params.{m}")),
                    other => LabError::Config(format!("params: {other}")),
                })?;
                Params::Simulate(SimulateParams { config: cfg, checks })
            }
            Kind::LinearTorus => {
                let p: LinearTorusParams = deserialize(table)?;
                grid_check("params.n", 2, p.n)?;
                at_least("params.modes", p.modes.len(), 1)?;
                let cutoff = Grid::two_d(p.n).map_err(|e| cfg_err("params.n", core_msg(e)))?.dealias_cutoff();
                for m in &p.modes {
                    if m.k.len() != 2 || m.k.iter().any(|c| c.abs() > cutoff) || m.k.iter().all(|&c| c == 0) {
                        return Err(cfg_err("params.modes.k", format!("{:?} must be a nonzero 2-vector with |k_j| <= {cutoff}", m.k)));
                    }
                }
                for &t in &p.times {
                    if !(t >= 0.0 && t.is_finite()) {
                        return Err(cfg_err("params.times", format!("times must be nonnegative, got {t}")));
                    }
                }
                at_least("params.times", p.times.len(), 1)?;
                positive("params.solver_dt", p.solver_dt)?;
                Params::LinearTorus(p)
            }
            Kind::LinearWholeSpace => {
                let p: WholeSpaceParams = deserialize(table)?;
                positive("params.sigma", p.sigma)?;
                for w in &p.weights {
                    parse_weight(w)?;
                }
                at_least("params.weights", p.weights.len(), 1)?;
                window("params.t_min/t_max", [p.t_min, p.t_max])?;
                positive("params.t_min", p.t_min)?;
                at_least("params.samples", p.samples, 8)?;
                at_least("params.n_r", p.n_r, 4)?;
                at_least("params.n_theta", p.n_theta, 1)?;
                Params::WholeSpace(p)
            }
            Kind::PerturbedLinear => {
                let p: PerturbedParams = deserialize(table)?;
                grid_check("params.n", 2, p.n)?;
                positive("params.delta", p.delta)?;
                positive("params.band", p.band)?;
                if p.band >= (p.n / 2) as f64 {
                    return Err(cfg_err("params.band", format!("must be below n/2 = {}", p.n / 2)));
                }
                if !p.amplitude.is_finite() {
                    return Err(cfg_err("params.amplitude", "must be finite"));
                }
                if let Some(dt) = p.dt {
                    positive("params.dt", dt)?;
                }
                positive("params.t_end", p.t_end)?;
                at_least("params.samples", p.samples, 8)?;
                window("params.window", p.window)?;
                if !(p.exponent_range[0] < p.exponent_range[1]) {
                    return Err(cfg_err("params.exponent_range", "needs low < high"));
                }
                if !(p.sobolev >= 0.0) {
                    return Err(cfg_err("params.sobolev", "must be nonnegative"));
                }
                Params::Perturbed(p)
            }
            Kind::Sharpness => {
                let p: SharpnessParams = deserialize(table)?;
                window("params.t_min/t_max", [p.t_min, p.t_max])?;
                positive("params.t_min", p.t_min)?;
                window("params.radial_window", p.radial_window)?;
                at_least("params.samples", p.samples, 8)?;
                positive("params.floor", p.floor)?;
                Params::Sharpness(p)
            }
            Kind::VerifyLemmas => {
                let p: LemmaParams = deserialize(table)?;
                window("params.angular.t_min/t_max", [p.angular.t_min, p.angular.t_max])?;
                at_least("params.angular.samples", p.angular.samples, 8)?;
                positive("params.angular.t_min", p.angular.t_min)?;
                positive("params.angular.exponent_tolerance", p.angular.exponent_tolerance)?;
                positive("params.angular.constant_tolerance", p.angular.constant_tolerance)?;
                positive("params.convolution.saturation_tolerance", p.convolution.saturation_tolerance)?;
                positive("params.pointwise.saturation_tolerance", p.pointwise.saturation_tolerance)?;
                positive("params.gronwall.saturation_tolerance", p.gronwall.saturation_tolerance)?;
                for &d in p.convolution.deltas.iter() {
                    positive("params.convolution.deltas", d)?;
                }
                for &e in p.convolution.etas.iter() {
                    positive("params.convolution.etas", e)?;
                }
                positive("params.convolution.t_max", p.convolution.t_max)?;
                if p.pointwise.ks.contains(&0) {
                    return Err(cfg_err("params.pointwise.ks", "k must be at least 1"));
                }
                positive("params.pointwise.t_max", p.pointwise.t_max)?;
                for c in &p.gronwall.cases {
                    if !(c[0] >= 0.0 && c[1] >= 0.0) {
                        return Err(cfg_err("params.gronwall.cases", format!("f0 and A must be nonnegative, got {c:?}")));
                    }
                }
                positive("params.gronwall.t_max", p.gronwall.t_max)?;
                Params::Lemmas(p)
            }
            Kind::StabilityForms => {
                let p: FormsParams = deserialize(table)?;
                grid_check("params.n", 2, p.n)?;
                if p.band < 1 || p.band > p.n as i64 / 2 - 1 {
                    return Err(cfg_err("params.band", format!("must lie in [1, {}]", p.n / 2 - 1)));
                }
                at_least("params.samples", p.samples, 1)?;
                at_least("params.profiles", p.profiles.len(), 1)?;
                positive("params.tolerance", p.tolerance)?;
                Params::Forms(p)
            }
            Kind::Fit => {
                let p: FitParams = deserialize(table)?;
                window("params.window", p.window)?;
                if p.filter_column.is_some() != p.filter_value.is_some() {
                    return Err(cfg_err("params.filter_column", "filter_column and filter_value go together"));
                }
                if p.target.is_some() != p.tolerance.is_some() {
                    return Err(cfg_err("params.target", "target and tolerance go together"));
                }
                Params::Fit(p)
            }
        })
    }
}

/// Overrides applied from the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub kind: Option<Kind>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tolerance_profile: Option<ToleranceProfile>,
}

/// Parses and validates a configuration document. The command-line kind,
/// when given, must agree with the document's.
pub fn parse_config(text: &str, overrides: &Overrides) -> Result<ExperimentSpec, LabError> {
    let raw: RawSpec = serde_path_to_error::deserialize(toml::Deserializer::new(text)).map_err(|e| {
        let path = e.path().to_string();
        let msg = e.inner().message().to_string();
        LabError::Config(if path == "." { msg } else { format!("{path}: {msg}") })
    })?;
    let kind = match (raw.kind, overrides.kind) {
        (Some(a), Some(b)) if a != b => {
            return Err(cfg_err("kind", format!("document says {} but the command is {}", a.name(), b.name())));
        }
        (Some(k), _) | (None, Some(k)) => k,
        (None, None) => return Err(cfg_err("kind", "missing")),
    };
    let seed = overrides.seed.or(raw.seed).unwrap_or(0);
    if seed > i64::MAX as u64 {
        return Err(cfg_err("seed", "must fit in a signed 64-bit integer"));
    }
    let params = Params::parse(kind, raw.params, seed)?;
    Ok(ExperimentSpec {
        kind,
        output: overrides.output.clone().or(raw.output),
        seed,
        tolerance_profile: overrides.tolerance_profile.or(raw.tolerance_profile).unwrap_or_default(),
        params,
    })
}

/// A configuration document that selects `kind` and leaves everything else
/// at its default.
pub fn default_document(kind: Kind) -> String {
    format!("kind = \"{}\"\n", kind.name())
}

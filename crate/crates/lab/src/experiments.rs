//! Experiment execution: one run per invocation, artifacts plus manifest.

use std::path::Path;

use ipm_core::grid::norm_sq;
use ipm_core::linear::{
    sharpness_concentrated, sharpness_radial, torus_propagate, whole_space_norm, PerturbationCoefficient,
    PerturbedEvolution, RadialAngularSpec,
};
use ipm_core::math::geomspace;
use ipm_core::norms::sobolev_norm;
use ipm_core::oracles::{
    angular_constant, angular_integral, convolution_bound, fit_power_law, gronwall_ode, pointwise_bound_constant,
};
use ipm_core::random::{band_field, Sampling};
use ipm_core::solver::{DiagnosticsRecord, DtPolicy, InitialPerturbation, SimConfig, SimState, Simulation};
use ipm_core::stability::{energy_identity_check, profile_conditions, quadratic_form, Omega};
use ipm_core::velocity::divergence_defect;
use ipm_core::{Complex64, Grid, SobolevIndex, SpectralField};
use serde::{Deserialize, Serialize};

use crate::checkpoint;
use crate::error::{exit, LabError};
use crate::manifest::{file_entry, write_manifest, RunManifest, RunStatus, TOOL};
use crate::output::{fmt_f64, RunDir, Table};
use crate::spec::{
    parse_weight, ExperimentSpec, FitParams, FormsParams, Kind, LemmaParams, LinearTorusParams, Params,
    PerturbedParams, SharpnessParams, SimulateParams, WholeSpaceParams,
};

/// A declared tolerance and the value it was judged on. NaN values fail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub low: Option<f64>,
    pub high: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, value: f64, low: Option<f64>, high: Option<f64>) -> Self {
        let pass = !value.is_nan() && low.is_none_or(|l| value >= l) && high.is_none_or(|h| value <= h);
        Check { name: name.into(), value, low, high, pass }
    }

    pub fn at_most(name: impl Into<String>, value: f64, high: f64) -> Self {
        Self::within(name, value, None, Some(high))
    }

    pub fn at_least(name: impl Into<String>, value: f64, low: f64) -> Self {
        Self::within(name, value, Some(low), None)
    }

    pub fn around(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self::within(name, value, Some(target - tol), Some(target + tol))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub kind: String,
    pub checks: Vec<Check>,
    pub all_pass: bool,
    pub exit_code: i32,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Execution {
    pub manifest: RunManifest,
    pub checks: Vec<Check>,
    pub exit_code: i32,
}

/// Files and checks accumulated by one experiment.
struct Ctx<'a> {
    dir: &'a mut RunDir,
    checks: Vec<Check>,
    /// Multiplies every tolerance.
    scale: f64,
    seed: u64,
}

impl Ctx<'_> {
    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Runs `spec`, writing artifacts and the manifest into `out`. Errors raised
/// before the directory exists are returned; later errors are recorded in
/// the manifest and reflected in the exit code.
pub fn execute(spec: &ExperimentSpec, out: &Path, resume: Option<&Path>) -> Result<Execution, LabError> {
    if resume.is_some() && !matches!(spec.kind, Kind::Simulate2d | Kind::Simulate3d) {
        return Err(LabError::Config("--resume applies to simulate2d and simulate3d only".into()));
    }
    let started = timestamp();
    let mut dir = RunDir::create(out)?;
    dir.write_json("spec.json", spec)?;
    let mut ctx = Ctx { dir: &mut dir, checks: Vec::new(), scale: spec.tolerance_profile.scale(), seed: spec.seed };
    let result = match &spec.params {
        Params::Simulate(p) => simulate(&mut ctx, p, resume),
        Params::LinearTorus(p) => linear_torus(&mut ctx, p),
        Params::WholeSpace(p) => linear_whole_space(&mut ctx, p),
        Params::Perturbed(p) => perturbed_linear(&mut ctx, p),
        Params::Sharpness(p) => sharpness(&mut ctx, p),
        Params::Lemmas(p) => verify_lemmas(&mut ctx, p),
        Params::Forms(p) => stability_forms(&mut ctx, p),
        Params::Fit(p) => fit(&mut ctx, p),
    };
    let checks = std::mem::take(&mut ctx.checks);
    let all_pass = checks.iter().all(|c| c.pass);
    let (exit_code, error) = match result {
        Ok(()) if all_pass => (exit::PASS, None),
        Ok(()) => (exit::TOLERANCE, None),
        Err(e) => (e.exit_code(), Some(e.to_string())),
    };
    dir.write_json(
        "summary.json",
        &Summary { kind: spec.kind.name().into(), checks: checks.clone(), all_pass, exit_code, error: error.clone() },
    )?;
    let files = dir.files().iter().map(|f| file_entry(dir.root(), f)).collect::<Result<Vec<_>, _>>()?;
    let manifest = RunManifest {
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        kind: spec.kind.name().into(),
        spec: serde_json::to_value(spec)?,
        started,
        finished: timestamp(),
        status: RunStatus::from_exit_code(exit_code),
        exit_code,
        error,
        files,
    };
    write_manifest(dir.root(), &manifest)?;
    Ok(Execution { manifest, checks, exit_code })
}

fn sobolev_label(prefix: &str, s: f64) -> String {
    if s.fract() == 0.0 {
        format!("{prefix}{}", s as i64)
    } else {
        format!("{prefix}{s}")
    }
}

fn idx(s: f64) -> SobolevIndex {
    SobolevIndex::new(s).expect("validated Sobolev index")
}

fn velocity_l2(state: &SimState) -> f64 {
    state.velocity().iter().map(|c| c.l2_norm_sq()).sum::<f64>().sqrt()
}

/// Header and rows of the diagnostics series.
pub fn diagnostics_table(config: &SimConfig, records: &[DiagnosticsRecord]) -> Table {
    let mut header: Vec<String> = vec!["t".into(), "step".into()];
    header.extend(config.sobolev.iter().map(|&s| sobolev_label("rho_h", s)));
    header.push(sobolev_label("bar_h", config.split_index));
    header.push(sobolev_label("tilde_h", config.split_index));
    header.push("tilde_l2".into());
    header.extend((1..=config.dim).map(|a| format!("u{a}_h3")));
    header.extend((1..=config.dim).map(|a| format!("u{a}_h1")));
    for h in [
        "u_l2",
        "dx_rho_l2",
        "grad_uvert_linf",
        "mean",
        "max_coeff",
        "energy_s",
        "energy_derivative",
        "energy_derivative_fd",
        "energy_advective",
        "energy_t1",
        "energy_t2",
        "energy_t3",
        "energy_c_min",
        "energy_c_advective",
    ] {
        header.push(h.into());
    }
    let mut table = Table::new(header);
    for r in records {
        let mut row = vec![fmt_f64(r.t), r.step.to_string()];
        row.extend(r.rho_hs.iter().map(|&v| fmt_f64(v)));
        row.extend([r.bar_hm, r.tilde_hm, r.tilde_l2].map(fmt_f64));
        row.extend(r.u_h3.iter().chain(&r.u_h1).map(|&v| fmt_f64(v)));
        row.extend([r.u_l2, r.dx_rho_l2, r.grad_uvert_linf, r.mean, r.max_coeff].map(fmt_f64));
        match &r.energy {
            Some(e) => {
                row.push(fmt_f64(e.s));
                row.push(fmt_f64(e.derivative));
                row.push(e.derivative_fd.map(fmt_f64).unwrap_or_default());
                row.extend([e.advective_derivative, e.t1, e.t2, e.t3, e.c_min, e.c_advective].map(fmt_f64));
            }
            None => row.extend(std::iter::repeat_n(String::new(), 9)),
        }
        table.push(row);
    }
    table
}

pub fn checkpoint_name(step: u64) -> String {
    format!("checkpoints/step_{step:010}.bin")
}

fn simulate(ctx: &mut Ctx<'_>, p: &SimulateParams, resume: Option<&Path>) -> Result<(), LabError> {
    let cfg = &p.config;
    let grid = cfg.grid()?;
    let sim = Simulation::with_plan(cfg.clone(), crate::fft::plan(grid))?;
    let initial = sim.initial_state()?;
    let start = match resume {
        Some(path) => {
            let s = checkpoint::load_state(path)?;
            if s.rho().grid() != grid {
                return Err(LabError::Config(format!(
                    "--resume: checkpoint grid {}^{} does not match the configured {}^{}",
                    s.rho().grid().n(),
                    s.rho().grid().dim(),
                    grid.n(),
                    grid.dim()
                )));
            }
            s
        }
        None => initial.clone(),
    };

    let amp = idx(cfg.amplitude_index);
    let mean0 = initial.rho().mean();
    let (mut amp_max, mut drift, mut u_max) = (0.0f64, 0.0f64, 0.0f64);
    let mut io_error = None;
    let stride = cfg.checkpoint_stride;
    let dir = &mut *ctx.dir;
    let outcome = sim.run_from(start, |s, _| {
        amp_max = amp_max.max(sobolev_norm(s.rho(), amp));
        drift = drift.max((s.rho().mean() - mean0).abs());
        u_max = u_max.max(velocity_l2(s));
        if stride > 0 && s.step % stride == 0 && io_error.is_none() {
            if let Err(e) = dir.write(&checkpoint_name(s.step), &checkpoint::encode_state(s)) {
                io_error = Some(e);
            }
        }
    });
    ctx.dir.write_csv("diagnostics.csv", &diagnostics_table(cfg, &outcome.records))?;
    ctx.dir.write("final_state.bin", &checkpoint::encode_state(&outcome.state))?;
    ctx.dir.write_json("termination.json", &outcome.termination)?;
    if let Some(e) = io_error {
        return Err(e);
    }

    let c = &p.checks;
    let fin = &outcome.state;
    let u0 = velocity_l2(&initial);
    if let Some(bound) = c.amplitude_growth_max {
        if cfg.epsilon > 0.0 {
            ctx.check(Check::at_most(
                sobolev_label("rho_h", cfg.amplitude_index) + "_max_over_epsilon",
                amp_max / cfg.epsilon,
                bound,
            ));
        }
    }
    if let Some(bound) = c.velocity_ratio_max {
        ctx.check(Check::at_most("u_l2_final_over_initial", velocity_l2(fin) / u0, bound));
    }
    if let Some(bound) = c.vertical_h1_ratio_max {
        let h1 = |s: &SimState| sobolev_norm(s.velocity().last().unwrap(), SobolevIndex::from(1));
        ctx.check(Check::at_most("u_vert_h1_final_over_initial", h1(fin) / h1(&initial), bound));
    }
    if let Some(bound) = c.velocity_growth_min {
        ctx.check(Check::at_least("u_l2_max_over_initial", u_max / u0, bound));
    }
    if let (Some(bound), Some(w)) = (c.bar_exponent_max, c.fit_window) {
        let series: Vec<(f64, f64)> = outcome.records.iter().map(|r| (r.t, r.bar_hm)).collect();
        let name = sobolev_label("bar_h", cfg.split_index) + "_exponent";
        match fit_power_law(&series, (w[0], w[1])) {
            Ok(f) => ctx.check(Check::at_most(name, f.exponent, bound)),
            Err(_) if outcome.error.is_some() => {}
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(tol) = c.mean_drift_max {
        ctx.check(Check::at_most("mean_drift", drift, tol * ctx.scale));
    }
    if let Some(tol) = c.identity_defect_max {
        let u = fin.velocity();
        let scale = u.iter().map(|c| c.max_abs()).fold(0.0, f64::max) * (grid.n() / 2) as f64;
        let div = if scale > 0.0 { divergence_defect(u) / scale } else { 0.0 };
        let e = energy_identity_check(fin.rho());
        let energy = if e.rhs > 0.0 { e.defect() / e.rhs } else { e.defect() };
        ctx.check(Check::at_most("divergence_defect_relative", div, tol * ctx.scale));
        ctx.check(Check::at_most("energy_identity_defect_relative", energy, tol * ctx.scale));
    }
    match outcome.error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn torus_modes(p: &LinearTorusParams) -> Vec<([i64; 3], Complex64)> {
    p.modes.iter().map(|m| ([m.k[0], m.k[1], 0], Complex64::new(m.re, m.im))).collect()
}

fn linear_torus(ctx: &mut Ctx<'_>, p: &LinearTorusParams) -> Result<(), LabError> {
    let grid = Grid::two_d(p.n)?;
    let modes = torus_modes(p);
    let rho0 = SpectralField::from_modes(grid, &modes)?;
    let mut table = Table::new(["t", "k1", "k2", "re", "im", "exact_re", "exact_im", "abs_error"]);
    let mut worst = 0.0f64;
    for &t in &p.times {
        let got = torus_propagate(&rho0, t)?;
        let exact_modes: Vec<_> = modes
            .iter()
            .map(|&(k, c)| (k, c * (-(k[0] * k[0]) as f64 / norm_sq(k) * t).exp()))
            .collect();
        let exact = SpectralField::from_modes(grid, &exact_modes)?;
        worst = worst.max(got.max_rel_diff(&exact));
        for &(k, e) in &exact_modes {
            let g = got.coeff(k).expect("mode on grid");
            table.push(vec![
                fmt_f64(t),
                k[0].to_string(),
                k[1].to_string(),
                fmt_f64(g.re),
                fmt_f64(g.im),
                fmt_f64(e.re),
                fmt_f64(e.im),
                fmt_f64((g - e).norm()),
            ]);
        }
    }
    ctx.dir.write_csv("modes.csv", &table)?;
    ctx.check(Check::at_most("propagator_vs_exact", worst, 1e-12 * ctx.scale));

    let t_end = p.times.iter().copied().fold(0.0, f64::max);
    if t_end > 0.0 {
        let cfg = SimConfig {
            nonlinear: false,
            dt: DtPolicy::Fixed { dt: p.solver_dt },
            energy_index: None,
            initial: InitialPerturbation::Modes { modes: p.modes.clone() },
            ..SimConfig::new(2, p.n, 1.0, t_end)
        };
        let sim = Simulation::with_plan(cfg, crate::fft::plan(grid))?;
        let outcome = sim.run_from(SimState::new(0.0, 0, rho0.clone()), |_, _| {});
        if let Some(e) = outcome.error {
            return Err(e.into());
        }
        let reference = torus_propagate(&rho0, outcome.state.t)?;
        ctx.check(Check::at_most("solver_vs_propagator", outcome.state.rho().max_rel_diff(&reference), 1e-10 * ctx.scale));
    }
    Ok(())
}

/// Target exponent and tolerance of the whole-space decay for a weight.
pub fn whole_space_target(weight: &str) -> Option<(f64, f64)> {
    match weight {
        "identity" => Some((-0.25, 0.02)),
        "r1" => Some((-0.75, 0.03)),
        "r1_squared" => Some((-1.25, 0.03)),
        _ => None,
    }
}

#[derive(Serialize)]
struct FitSidecar<'a, P: Serialize> {
    fit_window: [f64; 2],
    params: &'a P,
}

fn linear_whole_space(ctx: &mut Ctx<'_>, p: &WholeSpaceParams) -> Result<(), LabError> {
    let inv = 0.5 / (p.sigma * p.sigma);
    let spec = RadialAngularSpec::new(move |r, _| Complex64::new((-inv * r * r).exp(), 0.0), 10.0 * p.sigma, p.n_r, p.n_theta)?;
    let ts = geomspace(p.t_min, p.t_max, p.samples);
    let mut table = Table::new(["t", "norm", "weight", "quadrature_error"]);
    let mut fits = Vec::new();
    for name in &p.weights {
        let w = parse_weight(name)?;
        let mut series = Vec::with_capacity(ts.len());
        for &t in &ts {
            let r = whole_space_norm(&spec, t, w)?;
            table.push(vec![fmt_f64(t), fmt_f64(r.norm), name.clone(), fmt_f64(r.error)]);
            series.push((t, r.norm));
        }
        let f = fit_power_law(&series, (p.t_min, p.t_max))?;
        if let Some((target, tol)) = whole_space_target(name) {
            ctx.check(Check::around(format!("{name}_exponent"), f.exponent, target, tol * ctx.scale));
        }
        fits.push(serde_json::json!({ "weight": name, "fit": f }));
    }
    ctx.dir.write_csv("decay.csv", &table)?;
    ctx.dir.write_json("params.json", &FitSidecar { fit_window: [p.t_min, p.t_max], params: p })?;
    ctx.dir.write_json("fits.json", &fits)?;
    Ok(())
}

/// Initial datum of the perturbed-semigroup experiment: phases drawn from
/// the seed, magnitudes `(1+|k|)^{-decay}` on `|k| ≤ band` with `k₁ ≠ 0`.
pub fn perturbed_initial(grid: Grid, seed: u64, band: f64, decay: f64) -> SpectralField {
    band_field(
        grid,
        seed,
        |k| (1.0 + norm_sq(k).sqrt()).powf(-decay),
        |k| k[0] != 0 && norm_sq(k) <= band * band,
        Sampling::FixedMagnitude,
    )
}

fn perturbed_linear(ctx: &mut Ctx<'_>, p: &PerturbedParams) -> Result<(), LabError> {
    let grid = Grid::two_d(p.n)?;
    let rho0 = perturbed_initial(grid, ctx.seed, p.band, p.decay);
    let amplitude = p.amplitude;
    let coeff = PerturbationCoefficient::new(move |v, _| amplitude * v.sin()).with_delta(p.delta);
    let mut evo = PerturbedEvolution::new(crate::fft::plan(grid), rho0, coeff, p.dt, p.t_end)?;
    let s = idx(p.sobolev);
    let hs_name = sobolev_label("h", p.sobolev);
    let mut times = vec![0.0];
    times.extend(geomspace(1.0f64.min(p.t_end), p.t_end, p.samples));
    let mut decay = Table::new(["t", "norm", "weight", "quadrature_error"]);
    let mut series_tab = Table::new(["t", "steps", "l2", "hs", "horizontal_mean_defect", "max_step_growth"]);
    let mut series = Vec::new();
    let mut mean_defect = 0.0f64;
    let mut failure = None;
    for &t in &times {
        if let Err(e) = evo.advance_to(t) {
            failure = Some(e);
            break;
        }
        let (l2, hs) = (evo.state().l2_norm(), sobolev_norm(evo.state(), s));
        mean_defect = mean_defect.max(evo.horizontal_mean_defect());
        series.push((evo.time(), hs));
        decay.push(vec![fmt_f64(evo.time()), fmt_f64(l2), "l2".into(), fmt_f64(0.0)]);
        decay.push(vec![fmt_f64(evo.time()), fmt_f64(hs), hs_name.clone(), fmt_f64(0.0)]);
        series_tab.push(vec![
            fmt_f64(evo.time()),
            evo.steps().to_string(),
            fmt_f64(l2),
            fmt_f64(hs),
            fmt_f64(evo.horizontal_mean_defect()),
            fmt_f64(evo.max_growth()),
        ]);
    }
    ctx.dir.write_csv("decay.csv", &decay)?;
    ctx.dir.write_csv("series.csv", &series_tab)?;
    ctx.dir.write_json("params.json", &FitSidecar { fit_window: p.window, params: p })?;
    ctx.check(Check::at_most("horizontal_mean_defect", mean_defect, 1e-12 * ctx.scale));
    ctx.check(Check::at_most("max_step_l2_growth", evo.max_growth(), 1.0));
    if let Some(e) = failure {
        return Err(e.into());
    }
    let f = fit_power_law(&series, (p.window[0], p.window[1]))?;
    ctx.check(Check::at_most(format!("{hs_name}_exponent_bound"), f.exponent, p.exponent_range[1]));
    ctx.check(Check::within(format!("{hs_name}_exponent"), f.exponent, Some(p.exponent_range[0]), Some(p.exponent_range[1])));
    ctx.dir.write_json("fits.json", &[serde_json::json!({ "weight": hs_name, "fit": f })])?;
    Ok(())
}

/// Radial data of the sharpness experiment, with their names.
pub fn sharpness_profiles() -> Result<Vec<(&'static str, RadialAngularSpec)>, LabError> {
    Ok(vec![
        ("gaussian", RadialAngularSpec::radial_gaussian(1.0)?),
        ("algebraic", RadialAngularSpec::radial(|r| (1.0 + r * r).powi(-4), 40.0)?),
    ])
}

fn sharpness(ctx: &mut Ctx<'_>, p: &SharpnessParams) -> Result<(), LabError> {
    let mut table = Table::new(["family", "t", "value", "reference"]);
    let mut min_value = f64::INFINITY;
    let mut bound_gap = f64::INFINITY;
    for t in geomspace(p.t_min, p.t_max, p.samples) {
        let c = sharpness_concentrated(t)?;
        min_value = min_value.min(c.value);
        bound_gap = bound_gap.min(c.value - c.support_bound);
        table.push(vec!["concentrated".into(), fmt_f64(t), fmt_f64(c.value), fmt_f64(c.support_bound)]);
    }
    let mut constants = Vec::new();
    for (name, spec) in sharpness_profiles()? {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for t in geomspace(p.radial_window[0].max(1e-3), p.radial_window[1], p.samples) {
            let ratio = sharpness_radial(&spec, t)?;
            let c = ratio * (1.0 + t).powf(0.25);
            lo = lo.min(c);
            hi = hi.max(c);
            table.push(vec![name.into(), fmt_f64(t), fmt_f64(ratio), fmt_f64(c)]);
        }
        constants.push(serde_json::json!({ "profile": name, "min_constant": lo, "max_constant": hi }));
    }
    ctx.dir.write_csv("sharpness.csv", &table)?;
    ctx.dir.write_json("constants.json", &constants)?;
    ctx.check(Check::at_least("concentrated_min", min_value, p.floor));
    ctx.check(Check::at_least("concentrated_minus_support_bound", bound_gap, -1e-10 * ctx.scale));
    Ok(())
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b - a).abs() / a.abs().max(b.abs())
    }
}

fn verify_lemmas(ctx: &mut Ctx<'_>, p: &LemmaParams) -> Result<(), LabError> {
    let a = &p.angular;
    let mut ang = Table::new(["k", "t", "value", "error"]);
    for &k in &a.ks {
        let mut series = Vec::new();
        for t in geomspace(a.t_min, a.t_max, a.samples) {
            let r = angular_integral(k, t);
            if !r.converged {
                return Err(ipm_core::Error::Quadrature { value: r.value, error: r.error }.into());
            }
            ang.push(vec![k.to_string(), fmt_f64(t), fmt_f64(r.value), fmt_f64(r.error)]);
            series.push((t, r.value));
        }
        let f = fit_power_law(&series, (a.t_min, a.t_max))?;
        let target = -0.5 * (1.0 + k as f64);
        ctx.check(Check::around(format!("angular_k{k}_exponent"), f.exponent, target, a.exponent_tolerance * ctx.scale));
        let t = a.t_max;
        let c = angular_integral(k, t).value * t.powf(0.5 * (1.0 + k as f64));
        let rel = (c - angular_constant(k)).abs() / angular_constant(k);
        ctx.check(Check::at_most(format!("angular_k{k}_constant_relative_error"), rel, a.constant_tolerance * ctx.scale));
    }
    ctx.dir.write_csv("angular.csv", &ang)?;

    let mut sat = Table::new(["lemma", "a", "b", "t_max", "sup_ratio", "sup_ratio_10x", "relative_change"]);
    let mut saturation = |ctx: &mut Ctx<'_>, lemma: &str, a: f64, b: f64, t_max: f64, v1: f64, v2: f64, tol: f64| {
        let change = relative_change(v1, v2);
        sat.push(vec![lemma.into(), fmt_f64(a), fmt_f64(b), fmt_f64(t_max), fmt_f64(v1), fmt_f64(v2), fmt_f64(change)]);
        let name = format!("{lemma}_{a}_{b}_saturation");
        if v1.is_finite() && v2.is_finite() {
            ctx.check(Check::at_most(name, change, tol * ctx.scale));
        } else {
            ctx.check(Check::at_most(name, f64::NAN, tol * ctx.scale));
        }
    };
    let c = &p.convolution;
    for &d in &c.deltas {
        for &e in &c.etas {
            let v1 = convolution_bound(d, e, c.t_max).sup_ratio;
            let v2 = convolution_bound(d, e, 10.0 * c.t_max).sup_ratio;
            saturation(ctx, "convolution", d, e, c.t_max, v1, v2, c.saturation_tolerance);
        }
    }
    let pw = &p.pointwise;
    for &k in &pw.ks {
        let v1 = pointwise_bound_constant(k, pw.t_max).constant;
        let v2 = pointwise_bound_constant(k, 10.0 * pw.t_max).constant;
        saturation(ctx, "pointwise", k as f64, 0.0, pw.t_max, v1, v2, pw.saturation_tolerance);
    }
    let g = &p.gronwall;
    for case in &g.cases {
        let v1 = gronwall_ode(case[0], case[1], g.t_max).sup_ratio;
        let v2 = gronwall_ode(case[0], case[1], 10.0 * g.t_max).sup_ratio;
        saturation(ctx, "gronwall", case[0], case[1], g.t_max, v1, v2, g.saturation_tolerance);
    }
    ctx.dir.write_csv("saturation.csv", &sat)?;
    Ok(())
}

/// Random test function number `i` of the stability-forms experiment.
pub fn form_sample(grid: Grid, seed: u64, i: usize, band: i64) -> SpectralField {
    band_field(
        grid,
        seed.wrapping_add(i as u64),
        |_| 1.0,
        |k| k[0].abs() <= band && k[1].abs() <= band,
        Sampling::Gaussian,
    )
}

fn stability_forms(ctx: &mut Ctx<'_>, p: &FormsParams) -> Result<(), LabError> {
    let grid = Grid::two_d(p.n)?;
    let plan = crate::fft::plan(grid);
    let mut table = Table::new([
        "profile", "sample", "q", "r1_norm_sq", "r_norm_sq", "slope_floor", "bound", "lower_bound", "margin",
    ]);
    let mut conditions = Vec::new();
    for (pi, prof) in p.profiles.iter().enumerate() {
        conditions.push(serde_json::json!({ "profile": prof, "conditions": profile_conditions(prof) }));
        let linear = matches!(prof.omega, Omega::Zero);
        let (mut worst_identity, mut min_margin) = (0.0f64, f64::INFINITY);
        for i in 0..p.samples {
            let g = form_sample(grid, ctx.seed, i, p.band);
            let r = quadratic_form(&plan, prof, &g);
            let bound = serde_json::to_value(r.bound)?.as_str().unwrap_or_default().to_string();
            table.push(vec![
                pi.to_string(),
                i.to_string(),
                fmt_f64(r.q),
                fmt_f64(r.r1_norm_sq),
                fmt_f64(r.r_norm_sq),
                fmt_f64(r.slope_floor),
                bound,
                fmt_f64(r.lower_bound),
                fmt_f64(r.margin),
            ]);
            let reference = (prof.slope * r.r1_norm_sq).abs().max(f64::MIN_POSITIVE);
            worst_identity = worst_identity.max((r.q - prof.slope * r.r1_norm_sq).abs() / reference);
            min_margin = min_margin.min(r.margin);
        }
        if linear {
            ctx.check(Check::at_most(format!("profile{pi}_linear_identity"), worst_identity, p.tolerance * ctx.scale));
        } else {
            ctx.check(Check::at_least(format!("profile{pi}_min_margin"), min_margin, 0.0));
        }
    }
    ctx.dir.write_csv("forms.csv", &table)?;
    ctx.dir.write_json("conditions.json", &conditions)?;
    Ok(())
}

/// Reads `(t, value)` pairs from a CSV file.
pub fn read_series(path: &Path, t_col: &str, v_col: &str, filter: Option<(&str, &str)>) -> Result<Vec<(f64, f64)>, LabError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => LabError::Config(format!("params.input: cannot read {}: {e}", path.display())),
        _ => LabError::Format(e.to_string()),
    })?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str, key: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LabError::Config(format!("{key}: column `{name}` not in {}", path.display())))
    };
    let ti = col(t_col, "params.t_column")?;
    let vi = col(v_col, "params.value_column")?;
    let fi = match filter {
        Some((c, v)) => Some((col(c, "params.filter_column")?, v)),
        None => None,
    };
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if let Some((i, v)) = fi {
            if rec.get(i) != Some(v) {
                continue;
            }
        }
        let parse = |i: usize| {
            rec.get(i).unwrap_or("").parse::<f64>().map_err(|e| {
                LabError::Format(format!("{}: row {}: column {}: {e}", path.display(), line + 2, &headers[i]))
            })
        };
        out.push((parse(ti)?, parse(vi)?));
    }
    Ok(out)
}

fn fit(ctx: &mut Ctx<'_>, p: &FitParams) -> Result<(), LabError> {
    let filter = p.filter_column.as_deref().zip(p.filter_value.as_deref());
    let series = read_series(&p.input, &p.t_column, &p.value_column, filter)?;
    let f = fit_power_law(&series, (p.window[0], p.window[1]))?;
    ctx.dir.write_json("fit.json", &f)?;
    if let (Some(target), Some(tol)) = (p.target, p.tolerance) {
        ctx.check(Check::around(format!("{}_exponent", p.value_column), f.exponent, target, tol * ctx.scale));
    }
    Ok(())
}

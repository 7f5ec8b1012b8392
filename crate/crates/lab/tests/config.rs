use ipm_core::solver::{DtPolicy, InitialPerturbation};
use ipm_lab::spec::{parse_config, Kind, Overrides, Params, ToleranceProfile};
use ipm_lab::LabError;

fn parse(text: &str) -> Result<ipm_lab::ExperimentSpec, LabError> {
    parse_config(text, &Overrides::default())
}

fn sim(extra: &str) -> String {
    format!("kind = \"simulate2d\"\n[params]\nn = 32\nepsilon = 1e-3\nt_end = 1.0\n{extra}")
}

fn with_params(kind: &str, params: &str) -> String {
    format!("kind = \"{kind}\"\n[params]\n{params}")
}

#[test]
fn minimal_simulate2d_gets_documented_defaults() {
    let spec = parse(&sim("")).unwrap();
    assert_eq!(spec.kind, Kind::Simulate2d);
    assert_eq!(spec.seed, 0);
    assert_eq!(spec.tolerance_profile, ToleranceProfile::Default);
    let Params::Simulate(p) = spec.params else { panic!("wrong params") };
    let c = &p.config;
    assert_eq!((c.dim, c.n, c.epsilon, c.t_end), (2, 32, 1e-3, 1.0));
    assert_eq!(c.dt, DtPolicy::Cfl { safety: 0.5 });
    assert_eq!(c.initial, InitialPerturbation::Random { band: 6.0 });
    assert_eq!(c.amplitude_index, 4.0);
    assert_eq!(c.sobolev, vec![0.0, 3.0, 4.0, 5.0, 10.0]);
    assert_eq!(c.energy_index, Some(4.0));
    assert_eq!(c.diagnostic_stride, 10);
    assert_eq!(c.checkpoint_stride, 0);
    assert!(c.nonlinear);
    assert_eq!(p.checks.amplitude_growth_max, Some(2.0));
}

#[test]
fn verify_lemmas_enumerates_the_grid() {
    let spec = parse(&with_params(
        "verify-lemmas",
        "[params.convolution]\ndeltas = [0.25, 0.5]\netas = [0.25, 1.0, 2.0]\nt_max = 1e5\n",
    ))
    .unwrap();
    let Params::Lemmas(p) = spec.params else { panic!("wrong params") };
    assert_eq!(p.convolution.deltas, vec![0.25, 0.5]);
    assert_eq!(p.convolution.etas, vec![0.25, 1.0, 2.0]);
    assert_eq!(p.convolution.t_max, 1e5);
    assert_eq!(p.angular.ks, vec![0, 1, 2]);
    assert_eq!(p.gronwall.cases, vec![[1.0, 0.0], [1.0, 1.0]]);
}

#[test]
fn command_line_overrides_document() {
    let o = Overrides {
        kind: Some(Kind::Simulate2d),
        output: Some("elsewhere".into()),
        seed: Some(9),
        tolerance_profile: Some(ToleranceProfile::Strict),
    };
    let spec = parse_config(&(sim("") + "\n").replace("[params]", "seed = 3\noutput = \"a\"\n[params]"), &o).unwrap();
    assert_eq!(spec.seed, 9);
    assert_eq!(spec.output.unwrap().to_str(), Some("elsewhere"));
    assert_eq!(spec.tolerance_profile.scale(), 0.5);
    let Params::Simulate(p) = spec.params else { panic!("wrong params") };
    assert_eq!(p.config.seed, 9);
}

#[test]
fn every_kind_parses_with_defaults() {
    for kind in ["linear-torus", "linear-whole-space", "perturbed-linear", "sharpness", "verify-lemmas", "stability-forms"] {
        parse(&format!("kind = \"{kind}\"\n")).unwrap_or_else(|e| panic!("{kind}: {e}"));
    }
    parse(&with_params("fit", "input = \"x.csv\"\nvalue_column = \"norm\"\nwindow = [1.0, 10.0]\n")).unwrap();
    parse("kind = \"simulate3d\"\n[params]\nn = 16\nepsilon = 0.0\nt_end = 1.0\ninitial = { type = \"random\", band = 4.0 }\n")
        .unwrap();
}

/// `(document, expected fragment of the diagnostic)`.
fn rejections() -> Vec<(String, &'static str)> {
    let mut v: Vec<(String, &'static str)> = vec![
        // document level
        ("kind = \"simulate2d\"\nbogus = 1\n".into(), "bogus"),
        ("[params]\nn = 32\n".into(), "kind"),
        ("kind = \"simulate4d\"\n".into(), "simulate4d"),
        ("kind = \"sharpness\"\nseed = -1\n".into(), "seed"),
        ("kind = \"sharpness\"\nseed = 9223372036854775807\ntolerance_profile = \"lax\"\n".into(), "lax"),
        ("kind = \"sharpness\"\nparams = 3\n".into(), "params"),
        ("kind = \"sharpness\"\noutput = 5\n".into(), "output"),
        // simulate
        (sim("n = 100"), "duplicate"),
        (sim("").replace("n = 32", "n = 100"), "params.n: points per axis must be a power of two"),
        (sim("").replace("n = 32\n", ""), "`n`"),
        (sim("").replace("epsilon = 1e-3\n", ""), "`epsilon`"),
        (sim("").replace("t_end = 1.0\n", ""), "`t_end`"),
        (sim("").replace("n = 32", "n = \"32\""), "invalid type"),
        (sim("dim = 3"), "params.dim"),
        (sim("seed = 4"), "params.seed"),
        (sim("mystery = 1"), "mystery"),
        (sim("").replace("1e-3", "-1e-3"), "params.epsilon"),
        (sim("").replace("t_end = 1.0", "t_end = 0.0"), "params.t_end"),
        (sim("dt = { type = \"fixed\", dt = 0.0 }"), "params.dt.dt"),
        (sim("dt = { type = \"cfl\", safety = 1.5 }"), "params.dt.safety"),
        (sim("dt = { type = \"adaptive\" }"), "adaptive"),
        (sim("diagnostic_stride = 0"), "params.diagnostic_stride"),
        (sim("profile = { slope = nan }"), "params.profile.slope"),
        (sim("profile = { slope = 1.0, omega = { type = \"wavelet\" } }"), "wavelet"),
        (sim("amplitude_index = -1.0"), "params.amplitude_index"),
        (sim("split_index = -2.0"), "params.split_index"),
        (sim("sobolev = [0.0, -3.0]"), "params.sobolev"),
        (sim("energy_index = 3.0"), "params.energy_index"),
        (sim("cfl_limit = 0.0"), "params.cfl_limit"),
        (sim("blowup_threshold = 0.0"), "params.blowup_threshold"),
        (sim("dealias = \"three_halves\""), "three_halves"),
        (sim("initial = { type = \"random\", band = 11.0 }"), "params.initial.band"),
        (sim("initial = { type = \"random\", band = 0.5 }"), "params.initial.band"),
        (sim("initial = { type = \"modes\", modes = [] }"), "params.initial.modes"),
        (sim("initial = { type = \"modes\", modes = [{ k = [1, 0, 0], re = 1.0, im = 0.0 }] }"), "params.initial.modes.k"),
        (sim("initial = { type = \"modes\", modes = [{ k = [0, 0], re = 1.0, im = 0.0 }] }"), "params.initial.modes.k"),
        (sim("initial = { type = \"modes\", modes = [{ k = [11, 0], re = 1.0, im = 0.0 }] }"), "params.initial.modes.k"),
        (sim("initial = { type = \"modes\", modes = [{ k = [1, 0], re = inf, im = 0.0 }] }"), "params.initial.modes"),
        (sim("checks = 3"), "params.checks"),
        (sim("[params.checks]\nloose = true"), "params.checks"),
        (sim("[params.checks]\nbar_exponent_max = -1.5"), "params.checks.fit_window"),
        (sim("[params.checks]\nbar_exponent_max = -1.5\nfit_window = [5.0, 1.0]"), "params.checks.fit_window"),
        ("kind = \"simulate3d\"\n[params]\ndim = 2\nn = 16\nepsilon = 1e-3\nt_end = 1.0\n".into(), "params.dim"),
    ];
    let lt = |p: &str| with_params("linear-torus", p);
    v.extend([
        (lt("n = 24"), "params.n"),
        (lt("modes = []"), "params.modes"),
        (lt("modes = [{ k = [0, 0], re = 1.0, im = 0.0 }]"), "params.modes.k"),
        (lt("modes = [{ k = [1, 2, 3], re = 1.0, im = 0.0 }]"), "params.modes.k"),
        (lt("modes = [{ k = [11, 0], re = 1.0, im = 0.0 }]"), "params.modes.k"),
        (lt("times = []"), "params.times"),
        (lt("times = [-1.0]"), "params.times"),
        (lt("solver_dt = 0.0"), "params.solver_dt"),
        (lt("extra = 1"), "extra"),
    ]);
    let ws = |p: &str| with_params("linear-whole-space", p);
    v.extend([
        (ws("sigma = 0.0"), "params.sigma"),
        (ws("weights = [\"r2\"]"), "params.weights"),
        (ws("weights = [\"lambda:-1\"]"), "params.weights"),
        (ws("weights = []"), "params.weights"),
        (ws("t_min = 1e3\nt_max = 1e2"), "params.t_min/t_max"),
        (ws("t_min = 0.0"), "params.t_min"),
        (ws("samples = 4"), "params.samples"),
        (ws("n_r = 2"), "params.n_r"),
        (ws("n_theta = 0"), "params.n_theta"),
    ]);
    let pl = |p: &str| with_params("perturbed-linear", p);
    v.extend([
        (pl("n = 96"), "params.n"),
        (pl("delta = 0.0"), "params.delta"),
        (pl("band = 0.0"), "params.band"),
        (pl("band = 64.0"), "params.band"),
        (pl("amplitude = inf"), "params.amplitude"),
        (pl("dt = -0.1"), "params.dt"),
        (pl("t_end = 0.0"), "params.t_end"),
        (pl("samples = 3"), "params.samples"),
        (pl("window = [100.0, 10.0]"), "params.window"),
        (pl("exponent_range = [-2.0, -2.8]"), "params.exponent_range"),
        (pl("sobolev = -1.0"), "params.sobolev"),
    ]);
    let sh = |p: &str| with_params("sharpness", p);
    v.extend([
        (sh("t_min = 10.0\nt_max = 1.0"), "params.t_min/t_max"),
        (sh("t_min = 0.0"), "params.t_min"),
        (sh("radial_window = [1.0, 1.0]"), "params.radial_window"),
        (sh("samples = 2"), "params.samples"),
        (sh("floor = 0.0"), "params.floor"),
    ]);
    let vl = |p: &str| with_params("verify-lemmas", p);
    v.extend([
        (vl("[params.angular]\nt_min = 1e6\nt_max = 1e2"), "params.angular.t_min/t_max"),
        (vl("[params.angular]\nsamples = 2"), "params.angular.samples"),
        (vl("[params.angular]\nt_min = 0.0"), "params.angular.t_min"),
        (vl("[params.angular]\nexponent_tolerance = 0.0"), "params.angular.exponent_tolerance"),
        (vl("[params.angular]\nconstant_tolerance = -0.1"), "params.angular.constant_tolerance"),
        (vl("[params.convolution]\ndeltas = [0.0]"), "params.convolution.deltas"),
        (vl("[params.convolution]\netas = [-1.0]"), "params.convolution.etas"),
        (vl("[params.convolution]\nt_max = 0.0"), "params.convolution.t_max"),
        (vl("[params.convolution]\nsaturation_tolerance = 0.0"), "params.convolution.saturation_tolerance"),
        (vl("[params.pointwise]\nks = [0, 1]"), "params.pointwise.ks"),
        (vl("[params.pointwise]\nt_max = 0.0"), "params.pointwise.t_max"),
        (vl("[params.pointwise]\nsaturation_tolerance = 0.0"), "params.pointwise.saturation_tolerance"),
        (vl("[params.gronwall]\ncases = [[1.0, -1.0]]"), "params.gronwall.cases"),
        (vl("[params.gronwall]\nt_max = 0.0"), "params.gronwall.t_max"),
        (vl("[params.gronwall]\nsaturation_tolerance = 0.0"), "params.gronwall.saturation_tolerance"),
        (vl("[params.lemma_29]\nt_max = 1.0"), "lemma_29"),
    ]);
    let sf = |p: &str| with_params("stability-forms", p);
    v.extend([
        (sf("n = 20"), "params.n"),
        (sf("band = 0"), "params.band"),
        (sf("band = 16"), "params.band"),
        (sf("samples = 0"), "params.samples"),
        (sf("profiles = []"), "params.profiles"),
        (sf("tolerance = 0.0"), "params.tolerance"),
    ]);
    let fit = |p: &str| with_params("fit", &format!("input = \"x.csv\"\nvalue_column = \"norm\"\n{p}"));
    v.extend([
        (with_params("fit", "value_column = \"norm\"\nwindow = [1.0, 2.0]"), "`input`"),
        (fit("window = [2.0, 1.0]"), "params.window"),
        (fit("window = [1.0, 2.0]\nfilter_column = \"weight\""), "params.filter_column"),
        (fit("window = [1.0, 2.0]\ntarget = -0.25"), "params.target"),
    ]);
    v
}

#[test]
fn every_constraint_has_a_rejection() {
    for (doc, fragment) in rejections() {
        match parse(&doc) {
            Err(LabError::Config(msg)) => {
                assert!(msg.contains(fragment), "diagnostic `{msg}` lacks `{fragment}` for\n{doc}")
            }
            other => panic!("expected a configuration error for\n{doc}\ngot {other:?}"),
        }
    }
}

#[test]
fn kind_on_command_line_must_match_document() {
    let o = Overrides { kind: Some(Kind::Sharpness), ..Overrides::default() };
    let err = parse_config(&sim(""), &o).unwrap_err();
    assert!(err.to_string().contains("kind"));
    assert_eq!(err.exit_code(), 2);
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ipm_lab::error::exit;
use ipm_lab::spec::{default_document, parse_config, Kind, Overrides, ToleranceProfile};
use ipm_lab::{execute, LabError};

/// Experiments on the inviscid incompressible porous medium equation.
#[derive(Parser)]
#[command(name = "ipm-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Nonlinear run on the 2D torus.
    Simulate2d(RunArgs),
    /// Nonlinear run on the 3D torus.
    Simulate3d(RunArgs),
    /// Constant-coefficient semigroup on the torus against the exact symbol.
    LinearTorus(RunArgs),
    /// Whole-space decay rates by quadrature.
    LinearWholeSpace(RunArgs),
    /// Variable-coefficient semigroup.
    PerturbedLinear(RunArgs),
    /// Sharpness families of the whole-space rates.
    Sharpness(RunArgs),
    /// Calculus lemma oracles.
    VerifyLemmas(RunArgs),
    /// Linear-stability quadratic forms on random data.
    StabilityForms(RunArgs),
    /// Power-law fit of a CSV column.
    Fit(RunArgs),
    /// Verify a run directory and summarise its fitted exponents.
    Report {
        dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default `runs/<kind>`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Continue a nonlinear run from a solver checkpoint.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long, value_enum)]
    tolerance_profile: Option<ToleranceProfile>,
}

fn run(kind: Kind, args: RunArgs) -> Result<i32, LabError> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| LabError::io(p, e))?,
        None => default_document(kind),
    };
    let overrides = Overrides {
        kind: Some(kind),
        output: args.out.clone(),
        seed: args.seed,
        tolerance_profile: args.tolerance_profile,
    };
    let spec = parse_config(&text, &overrides)?;
    let out = spec.output.clone().unwrap_or_else(|| PathBuf::from("runs").join(kind.name()));
    let exec = execute(&spec, &out, args.resume.as_deref())?;
    for c in &exec.checks {
        println!("{} {}: {:e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value);
    }
    if let Some(e) = &exec.manifest.error {
        eprintln!("error: {e}");
    }
    println!("wrote {} (exit {})", out.join(ipm_lab::manifest::MANIFEST_NAME).display(), exec.exit_code);
    Ok(exec.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate2d(a) => run(Kind::Simulate2d, a),
        Command::Simulate3d(a) => run(Kind::Simulate3d, a),
        Command::LinearTorus(a) => run(Kind::LinearTorus, a),
        Command::LinearWholeSpace(a) => run(Kind::LinearWholeSpace, a),
        Command::PerturbedLinear(a) => run(Kind::PerturbedLinear, a),
        Command::Sharpness(a) => run(Kind::Sharpness, a),
        Command::VerifyLemmas(a) => run(Kind::VerifyLemmas, a),
        Command::StabilityForms(a) => run(Kind::StabilityForms, a),
        Command::Fit(a) => run(Kind::Fit, a),
        Command::Report { dir } => ipm_lab::report::report(&dir).map(|r| {
            print!("{}", r.markdown());
            r.exit_code()
        }),
    };
    let code = result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    debug_assert!((exit::PASS..=exit::BLOW_UP).contains(&code));
    ExitCode::from(code as u8)
}

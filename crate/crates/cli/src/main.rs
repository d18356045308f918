use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rough_burgers_cli::{run_and_report, Command, Invocation, OUTPUT_ROOT_VAR};

/// Rough-path experiments and the pathwise Burgers solver.
#[derive(Parser)]
#[command(name = "rough-burgers", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Signature lift of a path with its Hölder norms and relation checks.
    Lift(Common),
    /// Rough integral, local-error rate and path norm on a Brownian lift.
    Integrate(Common),
    /// Decay of integrals against rescaled test functions.
    Scaling(Common),
    /// Picard solve of the rough Burgers equation.
    Solve(Common),
    /// Comparisons with the independent oracles.
    Verify(Common),
    /// Chen and shuffle relations on random piecewise-linear lifts.
    ChenCheck(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration (a previous manifest works too).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set solver.eta=0.05`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Shorthand for `--set seed=N`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; relative paths resolve under $ROUGH_BURGERS_OUT.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores; 1 for reproducibility baselines).
    #[arg(short, long)]
    workers: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Lift(a) => (Command::Lift, a),
        Sub::Integrate(a) => (Command::Integrate, a),
        Sub::Scaling(a) => (Command::Scaling, a),
        Sub::Solve(a) => (Command::Solve, a),
        Sub::Verify(a) => (Command::Verify, a),
        Sub::ChenCheck(a) => (Command::ChenCheck, a),
    };
    let mut overrides = args.overrides;
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    let inv = Invocation {
        command,
        config: args.config,
        overrides,
        out: args.out,
        workers: args.workers,
        output_root: std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from),
    };
    std::process::exit(run_and_report(&inv));
}

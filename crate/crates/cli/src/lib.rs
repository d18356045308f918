//! Experiment driver: reads a TOML run configuration, applies `--set`
//! overrides, writes a manifest and then the CSV outputs of one subcommand.
//!
//! Exit codes: 0 on success, 2 for an invalid configuration, 3 for a
//! numerical failure or a failed check, 1 for anything else. Failures are
//! also written as JSON to `error.json` in the output directory and to
//! stderr.

pub mod commands;
pub mod config;
pub mod error;

use std::path::{Path, PathBuf};
use std::process::Command as Process;

use serde::Serialize;

pub use config::{Command, RunConfig, OUTPUT_ROOT_VAR};
pub use error::{CliError, ErrorReport};

use commands::Output;
use config::Provenance;

/// One command-line invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub config: Option<PathBuf>,
    /// `key=value` overrides applied after the file, in order.
    pub overrides: Vec<String>,
    /// Replaces the configured output directory.
    pub out: Option<PathBuf>,
    /// Thread count; `None` uses every available core.
    pub workers: Option<usize>,
    /// Root for relative output directories, usually `$ROUGH_BURGERS_OUT`.
    pub output_root: Option<PathBuf>,
}

impl Invocation {
    pub fn new(command: Command) -> Self {
        Invocation {
            command,
            config: None,
            overrides: Vec::new(),
            out: None,
            workers: None,
            output_root: None,
        }
    }
}

/// What a successful run produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub status: &'static str,
    pub command: &'static str,
    pub output: PathBuf,
    pub files: Vec<String>,
}

/// `git describe` of the source tree, or `unknown` outside a checkout.
pub fn git_describe() -> String {
    let manifest_dir = env!("CARGO_MANIFEST_DIR");
    Process::new("git")
        .args(["-C", manifest_dir, "describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string())
}

fn workers(requested: Option<usize>) -> usize {
    match requested {
        Some(n) if n > 0 => n,
        _ => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    }
}

fn output_dir(inv: &Invocation, config: Option<&RunConfig>) -> PathBuf {
    let base = match (&inv.out, config) {
        (Some(dir), _) => dir.clone(),
        (None, Some(c)) => return c.output_dir(inv.command, inv.output_root.as_deref()),
        (None, None) => PathBuf::from(format!("runs/{}", inv.command.name())),
    };
    match &inv.output_root {
        Some(root) if base.is_relative() => root.join(base),
        _ => base,
    }
}

fn execute(inv: &Invocation, config: &RunConfig, dir: &Path) -> Result<RunSummary, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = config.clone();
    manifest.command = Some(inv.command);
    manifest.output = Some(dir.to_path_buf());
    manifest.provenance = Some(Provenance {
        version: env!("CARGO_PKG_VERSION").to_string(),
        git_describe: git_describe(),
        workers: workers(inv.workers),
    });
    std::fs::write(dir.join("manifest.toml"), manifest.to_manifest()?)?;

    let mut out = Output::new(dir.to_path_buf());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers(inv.workers))
        .build()
        .map_err(|e| CliError::Report(e.to_string()))?;
    pool.install(|| match inv.command {
        Command::Lift => commands::lift(config, &mut out),
        Command::Integrate => commands::integrate(config, &mut out),
        Command::Scaling => commands::scaling(config, &mut out),
        Command::Solve => commands::solve(config, &mut out),
        Command::Verify => commands::verify(config, &mut out),
        Command::ChenCheck => commands::chen_check(config, &mut out),
    })?;
    let mut files = vec!["manifest.toml".to_string()];
    files.extend(out.files().iter().cloned());
    Ok(RunSummary {
        status: "ok",
        command: inv.command.name(),
        output: dir.to_path_buf(),
        files,
    })
}

fn load(inv: &Invocation) -> Result<RunConfig, CliError> {
    let config = RunConfig::load(inv.config.as_deref(), &inv.overrides)?;
    if let Some(c) = config.command {
        if c != inv.command {
            return Err(CliError::Config(format!(
                "configuration is for `{}` but `{}` was requested",
                c.name(),
                inv.command.name()
            )));
        }
    }
    config.validate()?;
    Ok(config)
}

/// Loads, validates and runs. The manifest is written before any
/// computation; on failure `error.json` is written next to it.
pub fn run(inv: &Invocation) -> Result<RunSummary, (CliError, PathBuf)> {
    let config = match load(inv) {
        Ok(c) => c,
        Err(e) => return Err((e, output_dir(inv, None))),
    };
    let dir = output_dir(inv, Some(&config));
    execute(inv, &config, &dir).map_err(|e| (e, dir))
}

/// Runs and reports: the summary as JSON on stdout, or the error report on
/// stderr and in `error.json`. Returns the process exit code.
pub fn run_and_report(inv: &Invocation) -> i32 {
    match run(inv) {
        Ok(summary) => {
            println!("{}", serde_json::to_string(&summary).expect("plain data"));
            0
        }
        Err((err, dir)) => {
            let report = err.report(inv.command.name());
            let json = serde_json::to_string_pretty(&report).expect("plain data");
            if std::fs::create_dir_all(&dir).is_ok() {
                let _ = std::fs::write(dir.join("error.json"), &json);
            }
            eprintln!("{json}");
            report.exit_code
        }
    }
}

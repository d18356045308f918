//! The TOML run configuration, `--set` overrides and the run manifest.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use rough_burgers::controlled::{Activation, SmoothFunction};
use rough_burgers::heat::SpectralField;
use rough_burgers::solver::SolverConfig;
use rough_burgers::tensor::check_shape;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable naming the root for relative output directories.
pub const OUTPUT_ROOT_VAR: &str = "ROUGH_BURGERS_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Lift,
    Integrate,
    Scaling,
    Solve,
    Verify,
    ChenCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Lift => "lift",
            Command::Integrate => "integrate",
            Command::Scaling => "scaling",
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::ChenCheck => "chen-check",
        }
    }
}

/// Fourier coefficients of `u_0`, one row per component:
/// `u_0^c(x) = Σ_k cos[c][k] cos kx + sin[c][k] sin kx`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialCondition {
    pub cos: Vec<Vec<f64>>,
    pub sin: Vec<Vec<f64>>,
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition {
            cos: vec![vec![0.2, 0.5, 0.1]],
            sin: vec![vec![0.0, -0.3, 0.2]],
        }
    }
}

impl InitialCondition {
    pub fn field(&self) -> Result<SpectralField, CliError> {
        let width = self.cos.iter().chain(&self.sin).map(Vec::len).max().unwrap_or(1).max(1);
        let pad = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
            rows.iter()
                .map(|r| {
                    let mut r = r.clone();
                    r.resize(width, 0.0);
                    r
                })
                .collect()
        };
        Ok(SpectralField::from_cos_sin(&pad(&self.cos), &pad(&self.sin))?)
    }
}

/// Signature lift of a Brownian sample or of a path read from CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiftConfig {
    pub dim: usize,
    /// Grid intervals of the sampled path.
    pub steps: usize,
    pub depth: usize,
    pub alpha: f64,
    /// Shuffle identities sampled per check.
    pub shuffle_samples: usize,
    /// CSV path with columns `t, x1, …, xd`; replaces the Brownian sample.
    pub input: Option<PathBuf>,
}

impl Default for LiftConfig {
    fn default() -> Self {
        LiftConfig {
            dim: 2,
            steps: 1024,
            depth: 2,
            alpha: 0.4,
            shuffle_samples: 256,
            input: None,
        }
    }
}

/// `∫ φ(X) dX` over a Brownian lift, its local-error rate and path norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrateConfig {
    pub dim: usize,
    pub steps: usize,
    pub depth: usize,
    pub alpha: f64,
    /// Windows sampled per length in the local-error fit.
    pub windows: usize,
    /// `φ: R^d → L(R^d, R^m)`, output `m·d` row-major.
    pub integrand: SmoothFunction,
}

impl Default for IntegrateConfig {
    fn default() -> Self {
        IntegrateConfig {
            dim: 2,
            steps: 2048,
            depth: 2,
            alpha: 0.4,
            windows: 64,
            integrand: SmoothFunction::componentwise(Activation::Sin, 2, 1.0, 1.0),
        }
    }
}

/// `|∫ f(λt) φ(X_t) dX_t|` against `λ` for a Gaussian `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub lambdas: Vec<f64>,
    /// Number of independent Brownian drivers, seeded `seed, seed + 1, …`.
    pub drivers: usize,
    pub steps: usize,
    pub depth: usize,
    pub alpha: f64,
    pub center: f64,
    pub width: f64,
    /// Scalar integrand `φ: R → R`.
    pub integrand: SmoothFunction,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            lambdas: (0..7).map(|k| (1u32 << k) as f64).collect(),
            drivers: 10,
            steps: 4096,
            depth: 2,
            alpha: 0.4,
            center: 0.0,
            width: 1.0,
            integrand: SmoothFunction::componentwise(Activation::Cos, 1, 1.0, 1.0),
        }
    }
}

/// Extra outputs of `solve`; the solver itself is configured by `[solver]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Weak-form residuals are reported for `cos kx`, `sin kx`,
    /// `k = 0..=residual_modes`.
    pub residual_modes: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { residual_modes: 4 }
    }
}

/// Oracle comparisons run by `verify`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Smooth `(φ, X)` pairs compared with Stieltjes quadrature.
    pub integral_pairs: usize,
    /// The integration mesh is `2^-mesh_log2`.
    pub mesh_log2: u32,
    pub integral_tolerance: f64,
    /// Random word pairs compared with exhaustive interleaving.
    pub shuffle_pairs: usize,
    /// Independent driver samples for the mode variances.
    pub variance_samples: usize,
    pub variance_modes: usize,
    /// Compare the deterministic solve (`eta = 0`) with the classical
    /// pseudospectral reference.
    pub pde: bool,
    pub pde_tolerance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            integral_pairs: 10,
            mesh_log2: 12,
            integral_tolerance: 1e-6,
            shuffle_pairs: 50,
            variance_samples: 2000,
            variance_modes: 4,
            pde: true,
            pde_tolerance: 1e-3,
        }
    }
}

/// Chen and shuffle checks on random piecewise-linear lifts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChenCheckConfig {
    pub paths: usize,
    pub max_dim: usize,
    pub max_depth: usize,
    pub max_points: usize,
    pub tolerance: f64,
}

impl Default for ChenCheckConfig {
    fn default() -> Self {
        ChenCheckConfig {
            paths: 100,
            max_dim: 3,
            max_depth: 4,
            max_points: 64,
            tolerance: 1e-12,
        }
    }
}

/// Where and how a run was produced. Written into the manifest and ignored
/// when a manifest is read back as a configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub version: String,
    pub git_describe: String,
    pub workers: usize,
}

/// Everything a run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Must agree with the subcommand when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// Output directory; relative paths resolve under `$ROUGH_BURGERS_OUT`
    /// when it is set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Master seed; copied into `solver.seed`.
    pub seed: u64,
    pub solver: SolverConfig,
    pub initial: InitialCondition,
    pub solve: SolveConfig,
    pub lift: LiftConfig,
    pub integrate: IntegrateConfig,
    pub scaling: ScalingConfig,
    pub verify: VerifyConfig,
    pub chen_check: ChenCheckConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            output: None,
            seed: 0,
            solver: SolverConfig::default(),
            initial: InitialCondition::default(),
            solve: SolveConfig::default(),
            lift: LiftConfig::default(),
            integrate: IntegrateConfig::default(),
            scaling: ScalingConfig::default(),
            verify: VerifyConfig::default(),
            chen_check: ChenCheckConfig::default(),
            provenance: None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Splits `a.b.c=value` and stores the TOML value under the dotted key.
/// Values that do not parse as TOML are taken as strings.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| invalid(format!("override `{assignment}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(invalid(format!("override `{assignment}` has an empty key")));
    }
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut current = table;
    for part in &parts[..parts.len() - 1] {
        let entry = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| invalid(format!("override `{key}`: `{part}` is not a table")))?;
    }
    current.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Reads `path` (if any), applies the overrides in order and resolves the
    /// master seed.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| invalid(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| invalid(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut config: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| invalid(e.to_string()))?;
        config.provenance = None;
        config.solver.seed = config.seed;
        Ok(config)
    }

    /// Checks every section, so a bad value fails before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        self.solver.validate()?;
        let u0 = self.initial.field()?;
        if u0.dim() != self.solver.dim {
            return Err(invalid(format!(
                "initial condition has {} components, solver.dim is {}",
                u0.dim(),
                self.solver.dim
            )));
        }
        let rough = |name: &str, dim: usize, depth: usize, alpha: f64| -> Result<(), CliError> {
            check_shape(dim, depth).map_err(|e| invalid(format!("{name}: {e}")))?;
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(invalid(format!("{name}.alpha = {alpha} violates 0 < alpha <= 1")));
            }
            if (depth as f64) * alpha > 1.0 + 1e-12 && depth > 1 {
                return Err(invalid(format!(
                    "{name}: depth {depth} exceeds floor(1/alpha) for alpha = {alpha}"
                )));
            }
            Ok(())
        };
        let l = &self.lift;
        rough("lift", l.dim, l.depth, l.alpha)?;
        if l.steps == 0 {
            return Err(invalid("lift.steps must be at least 1"));
        }
        let i = &self.integrate;
        rough("integrate", i.dim, i.depth, i.alpha)?;
        if i.steps < 64 {
            return Err(invalid(format!("integrate.steps = {} must be at least 64", i.steps)));
        }
        i.integrand.validate().map_err(|e| invalid(format!("integrate.integrand: {e}")))?;
        if i.integrand.input_dim() != i.dim || i.integrand.output_dim() % i.dim != 0 {
            return Err(invalid(format!(
                "integrate.integrand maps R^{} to R^{}, expected R^{} to R^(m·{})",
                i.integrand.input_dim(),
                i.integrand.output_dim(),
                i.dim,
                i.dim
            )));
        }
        let s = &self.scaling;
        rough("scaling", 1, s.depth, s.alpha)?;
        if s.lambdas.is_empty() || s.lambdas[0] < 1.0 || s.lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("scaling.lambdas must be increasing and at least 1"));
        }
        if s.drivers == 0 || s.steps < 2 {
            return Err(invalid("scaling needs at least one driver and two steps"));
        }
        if !(s.width > 0.0) {
            return Err(invalid(format!("scaling.width = {} must be positive", s.width)));
        }
        s.integrand.validate().map_err(|e| invalid(format!("scaling.integrand: {e}")))?;
        if s.integrand.input_dim() != 1 || s.integrand.output_dim() != 1 {
            return Err(invalid("scaling.integrand must map R to R"));
        }
        let v = &self.verify;
        if !(4..=16).contains(&v.mesh_log2) {
            return Err(invalid(format!("verify.mesh_log2 = {} must lie in 4..=16", v.mesh_log2)));
        }
        if v.variance_samples < 2 && v.variance_modes > 0 {
            return Err(invalid("verify.variance_samples must be at least 2"));
        }
        let c = &self.chen_check;
        check_shape(c.max_dim, c.max_depth).map_err(|e| invalid(format!("chen_check: {e}")))?;
        if c.max_points < 2 {
            return Err(invalid("chen_check.max_points must be at least 2"));
        }
        Ok(())
    }

    /// The output directory, `$ROUGH_BURGERS_OUT`-relative when the path is.
    pub fn output_dir(&self, command: Command, root: Option<&Path>) -> PathBuf {
        let dir = self
            .output
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("runs/{}", command.name())));
        match root {
            Some(r) if dir.is_relative() => r.join(dir),
            _ => dir,
        }
    }

    pub fn to_manifest(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self).map_err(|e| CliError::Report(e.to_string()))
    }
}

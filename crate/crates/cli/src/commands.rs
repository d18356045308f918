//! One function per subcommand. Each reads its section of the run
//! configuration and writes CSV files into the output directory.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use rough_burgers::controlled::{compose, Activation, ControlledPath, SmoothFunction};
use rough_burgers::heat::sample_stationary_heat;
use rough_burgers::holder::{self, fit_loglog};
use rough_burgers::heat::driver::write_slice_norms_csv;
use rough_burgers::integral::{
    integral_path_norm_check, local_error_check, rough_integral, scaled_integral_decay, ScaledFunction, DEFAULT_TOL,
};
use rough_burgers::rough_path::{signature_lift, write_norms_csv, GridPath, RelationReport};
use rough_burgers::sampling::{brownian_path, standard_normal, stream_rng};
use rough_burgers::solver::{solve_global, weak_residual, write_residuals_csv, SolutionField, SolverConfig};
use rough_burgers::tensor::{TruncatedTensor, Word};
use rough_burgers::verify::{
    classical_pde_reference, ou_variance_oracle, riemann_stieltjes, sample_variance, shuffle_enumerate,
    stable_substeps, ReferenceProblem, MAX_SHUFFLE_LETTERS,
};
use rough_burgers::Error;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

/// Creates files in the output directory and remembers their names.
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    pub fn new(dir: PathBuf) -> Self {
        Output { dir, files: Vec::new() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let file = File::create(self.dir.join(name))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(file))
    }

    fn rows<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(self.create(name)?);
        for r in rows {
            w.serialize(r).map_err(|e| CliError::Report(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct RelationRow<'a> {
    check: &'a str,
    max_violation: f64,
    checked: usize,
    passed: bool,
}

fn relation_row<'a>(check: &'a str, r: &RelationReport) -> RelationRow<'a> {
    RelationRow {
        check,
        max_violation: r.max_violation,
        checked: r.checked,
        passed: r.passed,
    }
}

/// `path.csv`, `signature.csv`, `norms.csv`, `relations.csv`.
pub fn lift(config: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let c = &config.lift;
    let path = match &c.input {
        Some(p) => GridPath::read_csv(File::open(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?)?,
        None => brownian_path(config.seed, c.dim, c.steps, 1.0)?,
    };
    let x = signature_lift(&path, c.depth, c.alpha)?;
    path.write_csv(out.create("path.csv")?)?;
    x.element(x.len() - 1).write_csv(out.create("signature.csv")?)?;
    write_norms_csv(&x.hoelder_norm(), out.create("norms.csv")?)?;
    let chen = x.check_chen(1e-12);
    let shuffle = x.check_shuffle(1e-12, c.shuffle_samples, config.seed);
    out.rows("relations.csv", &[relation_row("chen", &chen), relation_row("shuffle", &shuffle)])
}

#[derive(Serialize)]
struct LocalErrorRow {
    interval_length: f64,
    mean_error: f64,
    exponent: Option<f64>,
    reference: f64,
}

/// `integral_trace.csv`, `local_error.csv`, `path_norm.csv`.
pub fn integrate(config: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let c = &config.integrate;
    let x = signature_lift(&brownian_path(config.seed, c.dim, c.steps, 1.0)?, c.depth, c.alpha)?;
    let z = compose(&c.integrand, &ControlledPath::canonical(&x, &vec![0.0; c.dim])?)?;
    let result = rough_integral(&z, &x, 0, c.steps, DEFAULT_TOL)?;
    result.write_trace_csv(out.create("integral_trace.csv")?)?;
    let local = local_error_check(&z, &x, c.windows, config.seed)?;
    let rows: Vec<LocalErrorRow> = local
        .interval_lengths
        .iter()
        .zip(&local.mean_errors)
        .map(|(&interval_length, &mean_error)| LocalErrorRow {
            interval_length,
            mean_error,
            exponent: local.exponent,
            reference: local.reference,
        })
        .collect();
    out.rows("local_error.csv", &rows)?;
    out.rows("path_norm.csv", &[integral_path_norm_check(&z, &x)?])
}

#[derive(Serialize)]
struct ScalingRow {
    driver: usize,
    seed: u64,
    lambda: f64,
    magnitude: f64,
    log_residual: Option<f64>,
    fitted_slope: Option<f64>,
}

/// `scaling.csv`: one row per driver and scale factor; `scaling_mean.csv`:
/// the mean magnitude over drivers with its own fit.
pub fn scaling(config: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let c = &config.scaling;
    let f = ScaledFunction::gaussian(c.center, c.width);
    let reports = (0..c.drivers)
        .into_par_iter()
        .map(|i| {
            let seed = config.seed.wrapping_add(i as u64);
            let x = signature_lift(&brownian_path(seed, 1, c.steps, 1.0)?, c.depth, c.alpha)?;
            let z = compose(&c.integrand, &ControlledPath::canonical(&x, &[0.0])?)?;
            Ok((seed, scaled_integral_decay(&f, &z, &x, &c.lambdas)?))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut rows = Vec::new();
    for (i, (seed, r)) in reports.iter().enumerate() {
        for (&lambda, &magnitude) in r.lambdas.iter().zip(&r.magnitudes) {
            let log_residual = match (r.fitted_slope, r.intercept) {
                (Some(s), Some(b)) if magnitude > 0.0 => Some(magnitude.ln() - b - s * lambda.ln()),
                _ => None,
            };
            rows.push(ScalingRow {
                driver: i,
                seed: *seed,
                lambda,
                magnitude,
                log_residual,
                fitted_slope: r.fitted_slope,
            });
        }
    }
    out.rows("scaling.csv", &rows)?;
    // single paths can cancel at isolated scales; the mean over drivers
    // estimates the decay of the typical magnitude
    let means: Vec<f64> = (0..c.lambdas.len())
        .map(|k| reports.iter().map(|(_, r)| r.magnitudes[k]).sum::<f64>() / reports.len() as f64)
        .collect();
    let fit = fit_loglog(&c.lambdas, &means);
    let pooled: Vec<PooledRow> = c
        .lambdas
        .iter()
        .zip(&means)
        .map(|(&lambda, &mean_magnitude)| PooledRow {
            lambda,
            mean_magnitude,
            log_residual: fit.filter(|_| mean_magnitude > 0.0).map(|f| f.residual(lambda.ln(), mean_magnitude.ln())),
            fitted_slope: fit.map(|f| f.slope),
        })
        .collect();
    out.rows("scaling_mean.csv", &pooled)
}

#[derive(Serialize)]
struct PooledRow {
    lambda: f64,
    mean_magnitude: f64,
    log_residual: Option<f64>,
    fitted_slope: Option<f64>,
}

#[derive(Serialize)]
struct RegularityRow {
    time: f64,
    elapsed: f64,
    hoelder: f64,
    scaled: f64,
}

/// Grid `2α`-Hölder seminorm in space of the semigroup part
/// `U_s = S_s(u_k - h_k)`, with `s` the time since the last restart, and the
/// same norm times `s^{(2α-β)/2}`. The blow-up as `s → 0` is at most
/// `s^{-(2α-β)/2}` when the scaled column stays bounded.
fn linear_regularity(sol: &SolutionField, solver: &SolverConfig) -> Vec<RegularityRow> {
    let xs = sol.points();
    let exponent = 2.0 * solver.alpha;
    let power = (2.0 * solver.alpha - solver.beta) / 2.0;
    let mut start = 0.0;
    let mut rows = Vec::new();
    for (n, &t) in sol.times().iter().enumerate() {
        if n == 0 || sol.restart_indices().contains(&n) {
            start = t;
            continue;
        }
        let elapsed = t - start;
        let hoelder = (0..sol.dim())
            .map(|c| holder::scalar_seminorm(&xs, sol.linear().slice(n, c), exponent))
            .fold(0.0, f64::max);
        rows.push(RegularityRow {
            time: t,
            elapsed,
            hoelder,
            scaled: hoelder * elapsed.powf(power),
        });
    }
    rows
}

/// `driver_norms.csv` (noisy runs), `u.csv`, `picard_trace.csv`,
/// `residuals.csv`, `linear_regularity.csv`. A solver failure still writes the trace and any
/// partial solution before it is reported.
pub fn solve(config: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let solver = &config.solver;
    let u0 = config.initial.field()?;
    let driver = solver.sample_driver()?;
    if driver.is_lifted() {
        write_slice_norms_csv(&driver.slice_norms()?, out.create("driver_norms.csv")?)?;
    }
    let sol = match solve_global(&u0, &driver, solver) {
        Ok(sol) => sol,
        Err(Error::Solver(failure)) => {
            failure.trace.write_csv(out.create("picard_trace.csv")?)?;
            if let Some(partial) = &failure.partial {
                partial.write_csv(out.create("u_partial.csv")?)?;
            }
            return Err(Error::Solver(failure).into());
        }
        Err(e) => return Err(e.into()),
    };
    sol.write_csv(out.create("u.csv")?)?;
    sol.trace().write_csv(out.create("picard_trace.csv")?)?;
    let residuals = weak_residual(&sol, &driver, solver, config.solve.residual_modes)?;
    write_residuals_csv(&residuals, out.create("residuals.csv")?)?;
    out.rows("linear_regularity.csv", &linear_regularity(&sol, solver))
}

#[derive(Serialize)]
struct CheckRow {
    check: String,
    value: f64,
    reference: f64,
    error: f64,
    oracle_error: f64,
    tolerance: f64,
    passed: bool,
}

impl CheckRow {
    /// Passes when the error is within tolerance and the oracle's own error
    /// is at most a tenth of it.
    fn new(check: String, value: f64, reference: f64, oracle_error: f64, tolerance: f64) -> Self {
        let error = (value - reference).abs();
        CheckRow {
            check,
            value,
            reference,
            error,
            oracle_error,
            tolerance,
            passed: error <= tolerance && oracle_error <= tolerance / 10.0,
        }
    }
}

fn smooth_pair(seed: u64, i: usize) -> (SmoothFunction, [f64; 4]) {
    let mut rng = stream_rng(seed, 0x5717 + i as u64);
    let act = [Activation::Tanh, Activation::Sin, Activation::Cos][i % 3];
    let phi = SmoothFunction::componentwise(act, 2, rng.random_range(0.5..1.5), rng.random_range(0.5..2.0));
    let coeffs = [
        rng.random_range(0.5..3.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(0.5..3.0),
        rng.random_range(-1.0..1.0),
    ];
    (phi, coeffs)
}

fn smooth_value(c: &[f64; 4], t: f64) -> Vec<f64> {
    vec![(c[0] * t).sin() + c[1] * t, (c[2] * t).cos() + c[3] * t * t]
}

fn integral_checks(config: &RunConfig) -> Result<Vec<CheckRow>, CliError> {
    let v = &config.verify;
    let n = 1usize << v.mesh_log2;
    let times = GridPath::uniform_times(0.0, 1.0, n);
    (0..v.integral_pairs)
        .into_par_iter()
        .map(|i| {
            let (phi, c) = smooth_pair(config.seed, i);
            let x = signature_lift(&GridPath::from_fn(times.clone(), |t| smooth_value(&c, t))?, 2, 0.45)?;
            let z = compose(&phi, &ControlledPath::canonical(&x, &smooth_value(&c, 0.0))?)?;
            let got = rough_integral(&z, &x, 0, n, DEFAULT_TOL)?;
            let oracle = riemann_stieltjes(|t| phi.eval(&smooth_value(&c, t)), |t| smooth_value(&c, t), 0.0, 1.0);
            Ok(CheckRow::new(
                format!("rough_integral_{i}"),
                got.value[0],
                oracle.values[0],
                oracle.error_estimate,
                v.integral_tolerance,
            ))
        })
        .collect()
}

fn shuffle_checks(config: &RunConfig) -> Result<Vec<CheckRow>, CliError> {
    let mut rows = Vec::new();
    for i in 0..config.verify.shuffle_pairs {
        let mut rng = stream_rng(config.seed, 0x5AFF + i as u64);
        let d = rng.random_range(1..=3usize);
        let total = rng.random_range(1..=MAX_SHUFFLE_LETTERS.min(6));
        let split = rng.random_range(0..=total);
        let u: Vec<usize> = (0..split).map(|_| rng.random_range(1..=d)).collect();
        let w: Vec<usize> = (0..total - split).map(|_| rng.random_range(1..=d)).collect();
        let prod = TruncatedTensor::basis(d, total, &Word::new(&u, d)?)?
            .shuffle_mul(&TruncatedTensor::basis(d, total, &Word::new(&w, d)?)?)?;
        let all = shuffle_enumerate(&u, &w)?;
        let mut worst = 0.0f64;
        for word in Word::all(d, total) {
            let letters: Vec<usize> = word.letters().collect();
            let count = all.iter().filter(|x| **x == letters).count() as f64;
            worst = worst.max((prod.get(&word) - count).abs());
        }
        rows.push(CheckRow::new(format!("shuffle_{i}"), worst, 0.0, 0.0, 0.0));
    }
    Ok(rows)
}

/// `(1/π) ∫ h cos kx` (`1/2π` for `k = 0`) by the periodic trapezoid rule.
fn cos_amplitude(values: &[f64], k: usize) -> f64 {
    let n = values.len();
    let dx = 2.0 * std::f64::consts::PI / n as f64;
    let s: f64 = values.iter().enumerate().map(|(j, v)| v * (k as f64 * j as f64 * dx).cos()).sum();
    if k == 0 {
        s / n as f64
    } else {
        2.0 * s / n as f64
    }
}

fn variance_checks(config: &RunConfig) -> Result<Vec<CheckRow>, CliError> {
    let v = &config.verify;
    if v.variance_modes == 0 {
        return Ok(Vec::new());
    }
    let eta = if config.solver.eta > 0.0 { config.solver.eta } else { 1.0 };
    let nx = (4 * (v.variance_modes + 1)).max(16);
    let samples = (0..v.variance_samples)
        .into_par_iter()
        .map(|i| {
            let seed = config.seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
            let h = sample_stationary_heat(seed, v.variance_modes, eta, 1, &[0.0, 1.0], nx)?;
            Ok((0..=v.variance_modes).map(|k| cos_amplitude(h.slice(1, 0), k)).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let oracle = ou_variance_oracle(v.variance_modes, eta);
    Ok((0..=v.variance_modes)
        .map(|k| {
            let column: Vec<f64> = samples.iter().map(|s| s[k]).collect();
            let est = sample_variance(&column);
            // four standard errors of the sample variance
            CheckRow::new(
                format!("mode_variance_{k}"),
                est.variance,
                oracle.values[k],
                oracle.error_estimate,
                4.0 * est.standard_error,
            )
        })
        .collect())
}

fn pde_check(config: &RunConfig) -> Result<Vec<CheckRow>, CliError> {
    let v = &config.verify;
    if !v.pde {
        return Ok(Vec::new());
    }
    let solver = SolverConfig {
        eta: 0.0,
        ..config.solver.clone()
    };
    let u0 = config.initial.field()?;
    let driver = solver.sample_driver()?;
    let sol = solve_global(&u0, &driver, &solver)?;
    let problem = ReferenceProblem {
        dim: solver.dim,
        space_points: solver.space_points,
        final_time: solver.final_time,
        output_steps: solver.time_steps,
        f: &solver.f,
        g: &solver.g,
        initial: sol.u().time_slice(0).to_vec(),
        driver: None,
        forcing: None,
    };
    let reference = classical_pde_reference(&problem, stable_substeps(&problem))?;
    let mut err = 0.0f64;
    for (n, r) in reference.u.iter().enumerate() {
        for (a, b) in sol.u().time_slice(n).iter().zip(r) {
            err = err.max((a - b).abs());
        }
    }
    Ok(vec![CheckRow::new(
        "deterministic_solve".into(),
        err,
        0.0,
        reference.error_estimate,
        v.pde_tolerance,
    )])
}

/// `verify.csv`: one row per oracle comparison. Fails (after writing) when
/// any row does not pass.
pub fn verify(config: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let mut rows = integral_checks(config)?;
    rows.extend(shuffle_checks(config)?);
    rows.extend(variance_checks(config)?);
    rows.extend(pde_check(config)?);
    out.rows("verify.csv", &rows)?;
    let failed: Vec<&str> = rows.iter().filter(|r| !r.passed).map(|r| r.check.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed.join(", ")))
    }
}

#[derive(Serialize)]
struct ChenRow {
    path: usize,
    dim: usize,
    depth: usize,
    points: usize,
    chen_violation: f64,
    shuffle_violation: f64,
    passed: bool,
}

/// `chen_check.csv`: Chen and shuffle violations of random piecewise-linear
/// lifts. Fails (after writing) when any path exceeds the tolerance.
pub fn chen_check(config: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let c = &config.chen_check;
    let rows = (0..c.paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = stream_rng(config.seed, 0xC4E2 + p as u64);
            let dim = rng.random_range(1..=c.max_dim);
            let depth = rng.random_range(1..=c.max_depth);
            let points = rng.random_range(2..=c.max_points);
            let times = GridPath::uniform_times(0.0, 1.0, points - 1);
            let mut value = vec![0.0; dim];
            let mut values = Vec::with_capacity(points);
            for _ in 0..points {
                values.push(value.clone());
                for v in value.iter_mut() {
                    *v += standard_normal(&mut rng) / (points as f64).sqrt();
                }
            }
            let x = signature_lift(&GridPath::new(times, values)?, depth, 1.0 / (depth as f64 + 0.5))?;
            let chen = x.check_chen(c.tolerance);
            let shuffle = x.check_shuffle(c.tolerance, 64, config.seed.wrapping_add(p as u64));
            Ok(ChenRow {
                path: p,
                dim,
                depth,
                points,
                chen_violation: chen.max_violation,
                shuffle_violation: shuffle.max_violation,
                passed: chen.passed && shuffle.passed,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    out.rows("chen_check.csv", &rows)?;
    let failed = rows.iter().filter(|r| !r.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Check(format!("{failed} of {} paths violate Chen or shuffle", rows.len())))
    }
}

//! Acceptance suite. Prints one PASS/FAIL line per criterion, with the
//! measured quantity and the runtime against its budget, and exits nonzero
//! if any criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rough_burgers::controlled::{compose, Activation, ControlledPath, SmoothFunction};
use rough_burgers::heat::{
    apply_semigroup, derivative_profile_function, dx_heat_kernel, dx_heat_kernel_scaled, heat_kernel,
    stationary_field, HeatDriverSample, SemigroupKind, SpectralField,
};
use rough_burgers::holder::fit_loglog;
use rough_burgers::integral::{local_error_check, rough_integral, scaled_integral_decay, ScaledFunction, DEFAULT_TOL};
use rough_burgers::rough_path::{signature_lift, GridPath};
use rough_burgers::sampling::{brownian_path, standard_normal, stream_rng};
use rough_burgers::solver::{solve_global, SolutionField, SolverConfig};
use rough_burgers::verify::{classical_pde_reference, riemann_stieltjes, stable_substeps, ReferenceProblem};

type Outcome = Result<String, String>;

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn pass_if(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn algebraic_exactness() -> Outcome {
    let (mut chen, mut shuffle) = (0.0f64, 0.0f64);
    for p in 0..100u64 {
        let mut rng = stream_rng(100, p);
        let dim = rng.random_range(1..=3usize);
        let depth = rng.random_range(1..=4usize);
        let points = rng.random_range(2..=64usize);
        let mut value = vec![0.0; dim];
        let mut values = Vec::with_capacity(points);
        for _ in 0..points {
            values.push(value.clone());
            for v in value.iter_mut() {
                *v += standard_normal(&mut rng) / (points as f64).sqrt();
            }
        }
        let path = GridPath::new(GridPath::uniform_times(0.0, 1.0, points - 1), values).map_err(|e| e.to_string())?;
        let x = signature_lift(&path, depth, 1.0 / (depth as f64 + 0.5)).map_err(|e| e.to_string())?;
        chen = chen.max(x.check_chen(1e-12).max_violation);
        shuffle = shuffle.max(x.check_shuffle(1e-12, 512, p).max_violation);
    }
    pass_if(
        chen < 1e-12 && shuffle < 1e-12,
        format!("max Chen violation {chen:.2e}, max shuffle violation {shuffle:.2e} (< 1e-12)"),
    )
}

fn smooth_value(c: &[f64; 4], t: f64) -> Vec<f64> {
    vec![(c[0] * t).sin() + c[1] * t, (c[2] * t).cos() + c[3] * t * t]
}

fn integration_oracle() -> Outcome {
    let n = 1usize << 12;
    let times = GridPath::uniform_times(0.0, 1.0, n);
    let (mut worst, mut oracle_worst) = (0.0f64, 0.0f64);
    for i in 0..50u64 {
        let mut rng = stream_rng(200, i);
        let act = [Activation::Tanh, Activation::Sin, Activation::Cos][i as usize % 3];
        let phi = SmoothFunction::componentwise(act, 2, rng.random_range(0.5..1.5), rng.random_range(0.5..2.0));
        let c = [
            rng.random_range(0.5..3.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(0.5..3.0),
            rng.random_range(-1.0..1.0),
        ];
        let path = GridPath::from_fn(times.clone(), |t| smooth_value(&c, t)).map_err(|e| e.to_string())?;
        let x = signature_lift(&path, 2, 0.45).map_err(|e| e.to_string())?;
        let y = ControlledPath::canonical(&x, &smooth_value(&c, 0.0)).map_err(|e| e.to_string())?;
        let z = compose(&phi, &y).map_err(|e| e.to_string())?;
        let got = rough_integral(&z, &x, 0, n, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let oracle = riemann_stieltjes(|t| phi.eval(&smooth_value(&c, t)), |t| smooth_value(&c, t), 0.0, 1.0);
        worst = worst.max(max_abs_diff(&got.value, &oracle.values));
        oracle_worst = oracle_worst.max(oracle.error_estimate);
    }
    pass_if(
        worst < 1e-6 && oracle_worst <= 1e-7,
        format!("max |rough - Stieltjes| {worst:.2e} (< 1e-6), oracle error {oracle_worst:.1e} (<= 1e-7)"),
    )
}

fn local_error_rate() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (alpha, depth) in [(0.4, 2usize), (0.3, 3)] {
        let mut lowest = f64::INFINITY;
        let mut reference = 0.0;
        for seed in 0..4u64 {
            let x = signature_lift(&brownian_path(300 + seed, 2, 1 << 12, 1.0).map_err(|e| e.to_string())?, depth, alpha)
                .map_err(|e| e.to_string())?;
            let y = ControlledPath::canonical(&x, &[0.0, 0.0]).map_err(|e| e.to_string())?;
            let z = compose(&SmoothFunction::componentwise(Activation::Sin, 2, 1.0, 1.0), &y).map_err(|e| e.to_string())?;
            let r = local_error_check(&z, &x, 64, seed).map_err(|e| e.to_string())?;
            reference = r.reference;
            lowest = lowest.min(r.exponent.unwrap_or(f64::NEG_INFINITY));
        }
        ok &= lowest >= reference - 0.15;
        lines.push(format!("(alpha {alpha}, N {depth}): min exponent {lowest:.3} >= {:.2}", reference - 0.15));
    }
    pass_if(ok, lines.join("; "))
}

fn scaling_decay() -> Outcome {
    let lambdas: Vec<f64> = (0..7).map(|k| (1u32 << k) as f64).collect();
    let f = ScaledFunction::gaussian(0.0, 1.0);
    let mut sums = vec![0.0; lambdas.len()];
    let mut slopes = Vec::new();
    for seed in 0..10u64 {
        let x = signature_lift(&brownian_path(400 + seed, 1, 1 << 12, 1.0).map_err(|e| e.to_string())?, 2, 0.4)
            .map_err(|e| e.to_string())?;
        let y = ControlledPath::canonical(&x, &[0.0]).map_err(|e| e.to_string())?;
        let z = compose(&SmoothFunction::componentwise(Activation::Cos, 1, 1.0, 1.0), &y).map_err(|e| e.to_string())?;
        let r = scaled_integral_decay(&f, &z, &x, &lambdas).map_err(|e| e.to_string())?;
        for (s, m) in sums.iter_mut().zip(&r.magnitudes) {
            *s += m / 10.0;
        }
        slopes.push(r.fitted_slope.unwrap_or(f64::NAN));
    }
    let slope = fit_loglog(&lambdas, &sums).map(|f| f.slope).unwrap_or(f64::NAN);
    let per_driver: Vec<String> = slopes.iter().map(|s| format!("{s:.2}")).collect();
    pass_if(
        slope <= -0.4 + 0.15,
        format!(
            "slope of mean magnitude over 10 drivers {slope:.3} (<= -0.25); per driver [{}]",
            per_driver.join(", ")
        ),
    )
}

fn heat_kernel_identities() -> Outcome {
    let e = |e: rough_burgers::Error| e.to_string();
    let n = 512;
    let dx = 2.0 * PI / n as f64;
    let mut mass_err = 0.0f64;
    for t in [1e-3, 1e-2, 0.1, 0.5, 1.0, 4.0] {
        let mut mass = 0.0;
        for j in 0..n {
            mass += heat_kernel(t, j as f64 * dx).map_err(e)?;
        }
        mass_err = mass_err.max((mass * dx - 1.0).abs());
    }
    let mut semigroup_err = 0.0f64;
    for (s, t) in [(0.1, 0.2), (0.3, 0.5), (0.05, 1.0)] {
        for x in [0.0, 0.7, -2.0, 3.0] {
            let mut conv = 0.0;
            for j in 0..n {
                let y = j as f64 * dx;
                conv += heat_kernel(s, x - y).map_err(e)? * heat_kernel(t, y).map_err(e)?;
            }
            semigroup_err = semigroup_err.max((conv * dx - heat_kernel(s + t, x).map_err(e)?).abs());
        }
    }
    let u = SpectralField::from_cos_sin(&[vec![0.1, 1.0, -0.4, 0.3]], &[vec![0.0, 0.2, 0.5, -0.1]]).map_err(e)?;
    let composed = apply_semigroup(0.2, &apply_semigroup(0.3, &u, SemigroupKind::Heat).map_err(e)?, SemigroupKind::Heat)
        .map_err(e)?;
    semigroup_err = semigroup_err.max(composed.max_coefficient_distance(&apply_semigroup(0.5, &u, SemigroupKind::Heat).map_err(e)?));
    let mut scaling_err = 0.0f64;
    for t in [1e-3, 0.01, 0.1, 0.5, 1.0] {
        for x in [-3.0, -1.0, 0.05, 0.5, 2.5] {
            let a = dx_heat_kernel(t, x).map_err(e)?;
            scaling_err = scaling_err.max((a - dx_heat_kernel_scaled(t, x).map_err(e)?).abs() / (1.0 + a.abs()));
        }
    }
    let norms: Vec<f64> = (1..=10)
        .map(|k| derivative_profile_function(0.5f64.powi(k)).and_then(|f| f.norm_11()).map(|n| n.total))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    let hi = norms.iter().cloned().fold(0.0, f64::max);
    let lo = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    pass_if(
        mass_err < 1e-10 && semigroup_err < 1e-12 && scaling_err < 1e-10 && hi / lo < 10.0,
        format!(
            "mass {mass_err:.1e}, semigroup {semigroup_err:.1e}, scaling identity {scaling_err:.1e}, \
             ||f_t||_1,1 max/min {:.3}",
            hi / lo
        ),
    )
}

fn grid_distance(sol: &SolutionField, reference: &[Vec<f64>]) -> f64 {
    reference
        .iter()
        .enumerate()
        .map(|(n, r)| max_abs_diff(sol.u().time_slice(n), r))
        .fold(0.0, f64::max)
}

fn deterministic_solver() -> Outcome {
    let e = |e: rough_burgers::Error| e.to_string();
    let config = SolverConfig::default();
    let u0 = SpectralField::from_cos_sin(&[vec![0.0, 0.8, 0.3]], &[vec![0.0, 0.5, 0.0]]).map_err(e)?;
    let driver = config.sample_driver().map_err(e)?;
    let sol = solve_global(&u0, &driver, &config).map_err(e)?;
    let problem = ReferenceProblem {
        dim: 1,
        space_points: config.space_points,
        final_time: config.final_time,
        output_steps: config.time_steps,
        f: &config.f,
        g: &config.g,
        initial: u0.sample(config.space_points).concat(),
        driver: None,
        forcing: None,
    };
    let r = classical_pde_reference(&problem, stable_substeps(&problem)).map_err(e)?;
    let err = grid_distance(&sol, &r.u);
    pass_if(
        err < 1e-3 && r.error_estimate <= 1e-4,
        format!(
            "128x128, g = 0.2 tanh: L-inf {err:.2e} (< 1e-3), oracle error {:.1e}",
            r.error_estimate
        ),
    )
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rough-burgers"))
}

fn max_ratio(trace_csv: &Path) -> Result<f64, String> {
    let text = std::fs::read_to_string(trace_csv).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or("empty trace")?.split(',').collect();
    let col = header.iter().position(|h| *h == "ratio").ok_or("no ratio column")?;
    let mut worst = 0.0f64;
    for line in lines {
        if let Some(v) = line.split(',').nth(col).filter(|v| !v.is_empty()) {
            worst = worst.max(v.parse::<f64>().map_err(|e| e.to_string())?);
        }
    }
    Ok(worst)
}

fn shipped_solve_configs() -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(workspace().join("configs"))
        .map(|d| d.filter_map(|e| e.ok()).map(|e| e.path()).collect())
        .unwrap_or_default();
    out.retain(|p| {
        std::fs::read_to_string(p)
            .map(|t| t.lines().any(|l| l.trim() == "command = \"solve\""))
            .unwrap_or(false)
    });
    out.sort();
    out
}

fn picard_contraction(scratch: &Path) -> Outcome {
    let configs = shipped_solve_configs();
    let mut lines = Vec::new();
    let mut ok = !configs.is_empty();
    let mut stochastic = false;
    for cfg in &configs {
        let name = cfg.file_stem().unwrap().to_string_lossy().to_string();
        let out = scratch.join(format!("contraction-{name}"));
        let status = cli()
            .args(["solve", "--config"])
            .arg(cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("{name}: exit {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stderr)));
        }
        let ratio = max_ratio(&out.join("picard_trace.csv"))?;
        let manifest = std::fs::read_to_string(out.join("manifest.toml")).map_err(|e| e.to_string())?;
        stochastic |= manifest.lines().any(|l| l.trim() == "eta = 0.05")
            && manifest.lines().any(|l| l.trim() == "beta = 0.45")
            && manifest.lines().any(|l| l.trim() == "alpha = 0.4");
        ok &= ratio <= 0.5;
        lines.push(format!("{name} {ratio:.3}"));
    }
    ok &= stochastic;
    pass_if(
        ok,
        format!("max ratio per config: {} (<= 0.5); stochastic config present: {stochastic}", lines.join(", ")),
    )
}

fn smoothed_driver_consistency() -> Outcome {
    let e = |e: rough_burgers::Error| e.to_string();
    let u0 = SpectralField::from_cos_sin(&[vec![0.0, 0.8, 0.3]], &[vec![0.0, 0.5, 0.0]]).map_err(e)?;
    let field = apply_semigroup(0.02, &stationary_field(3, 40, 0.8, 1), SemigroupKind::Heat).map_err(e)?;
    let mut errors = Vec::new();
    for nx in [64usize, 128, 256] {
        let config = SolverConfig {
            space_points: nx,
            time_steps: nx,
            modes: 8,
            ..SolverConfig::default()
        };
        let h = field.clone();
        let mut driver = HeatDriverSample::from_field(&config.times(), nx, 1, move |_, x| vec![h.eval(0, x)]).map_err(e)?;
        driver.lift(config.depth(), config.alpha).map_err(e)?;
        let sol = solve_global(&u0, &driver, &config).map_err(e)?;
        let values: Vec<f64> = (0..nx).map(|j| field.eval(0, 2.0 * PI * j as f64 / nx as f64)).collect();
        let frozen = move |_t: f64| values.clone();
        let problem = ReferenceProblem {
            dim: 1,
            space_points: nx,
            final_time: config.final_time,
            output_steps: nx,
            f: &config.f,
            g: &config.g,
            initial: u0.sample(nx).concat(),
            driver: Some(&frozen),
            forcing: None,
        };
        let r = classical_pde_reference(&problem, stable_substeps(&problem)).map_err(e)?;
        errors.push(grid_distance(&sol, &r.u));
    }
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = errors.iter().map(|v| format!("{v:.2e}")).collect();
    pass_if(monotone, format!("L-inf discrepancy at nx = 64/128/256: {}", shown.join(" > ")))
}

fn global_continuation() -> Outcome {
    let e = |e: rough_burgers::Error| e.to_string();
    let u0 = SpectralField::from_cos_sin(&[vec![0.0, 0.8, 0.3]], &[vec![0.0, 0.5, 0.0]]).map_err(e)?;
    let single = SolverConfig::default();
    let restarted = SolverConfig {
        horizon: 0.25,
        ..SolverConfig::default()
    };
    let driver = single.sample_driver().map_err(e)?;
    let a = solve_global(&u0, &driver, &single).map_err(e)?;
    let b = solve_global(&u0, &driver, &restarted).map_err(e)?;
    let diff = a.max_distance(&b).map_err(e)?;
    // at a restart the new segment starts from exactly the old terminal slice
    let mut jump = 0.0f64;
    for seg in b.trace().segments.iter().skip(1) {
        let n = b.times().iter().position(|t| *t == seg.start_time).ok_or("restart off grid")?;
        let state: Vec<f64> = (0..b.dim())
            .flat_map(|c| {
                (0..b.nx()).map(move |j| (c, j))
            })
            .map(|(c, j)| b.w().slice(n, c)[j] + b.driver().slice(n, c)[j] + b.linear().slice(n, c)[j])
            .collect();
        jump = jump.max(max_abs_diff(&state, b.u().time_slice(n)));
    }
    let restarts = b.restart_indices().len();
    pass_if(
        diff < 1e-6 && jump == 0.0 && restarts == 3,
        format!("{restarts} restarts, |restarted - single| {diff:.2e} (< 1e-6), gluing jump {jump:e}"),
    )
}

fn reproducibility(scratch: &Path) -> Outcome {
    let cfg = workspace().join("configs/stochastic.toml");
    let run = |dir: &Path, config: &Path| -> Result<(), String> {
        let out = cli()
            .args(["solve", "--workers", "1", "--config"])
            .arg(config)
            .arg("--out")
            .arg(dir)
            .output()
            .map_err(|e| e.to_string())?;
        if out.status.success() {
            Ok(())
        } else {
            Err(String::from_utf8_lossy(&out.stderr).into_owned())
        }
    };
    let first = scratch.join("repro-a");
    let second = scratch.join("repro-b");
    run(&first, &cfg)?;
    // the second run starts from the first run's manifest
    run(&second, &first.join("manifest.toml"))?;
    let mut compared = 0;
    for name in ["u.csv", "picard_trace.csv", "residuals.csv", "driver_norms.csv"] {
        let a = std::fs::read(first.join(name)).map_err(|e| format!("{name}: {e}"))?;
        let b = std::fs::read(second.join(name)).map_err(|e| format!("{name}: {e}"))?;
        if a != b {
            return Err(format!("{name} differs between runs"));
        }
        compared += 1;
    }
    Ok(format!("{compared} CSVs byte-identical when rerun from the manifest with workers = 1"))
}

fn main() {
    let scratch = tempfile::tempdir().expect("scratch directory");
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 algebraic exactness", Duration::from_secs(10), Box::new(algebraic_exactness)),
        ("2 integration oracle", Duration::from_secs(30), Box::new(integration_oracle)),
        ("3 local error rate", Duration::from_secs(60), Box::new(local_error_rate)),
        ("4 scaling decay", Duration::from_secs(60), Box::new(scaling_decay)),
        ("5 heat kernel and semigroup", Duration::from_secs(10), Box::new(heat_kernel_identities)),
        ("6 deterministic solver", Duration::from_secs(120), Box::new(deterministic_solver)),
        ("7 Picard contraction", Duration::from_secs(300), Box::new(|| picard_contraction(scratch.path()))),
        ("8 smoothed-driver consistency", Duration::from_secs(300), Box::new(smoothed_driver_consistency)),
        ("9 global continuation", Duration::from_secs(120), Box::new(global_continuation)),
        ("10 reproducibility", Duration::from_secs(60), Box::new(|| reproducibility(scratch.path()))),
    ];
    let mut failures = 0;
    for (name, budget, check) in &criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) => (elapsed <= *budget, d),
            Err(d) => (false, d),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "acceptance {name}: {} | {detail} | {:.2} s (budget {} s)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

//! The fixed-point map `w ↦ M¹w + M²w` and the local and global solves.
//!
//! Both maps are Duhamel integrals of the shifted semigroup against a
//! forcing: `M¹` against `g(u)(∂_x w + ∂_x U) + f̂(u)`, `M²` against the
//! measure `Σ_j μ_j δ_{y_j + Δx/2}` whose weights are the compensated-sum
//! terms `μ_j = Σ_i Z^i(y_j) H^{i+1}_{y_j, y_{j+1}}` of the spatial rough
//! integral. Each Fourier mode is advanced exactly through the exponential,
//! with the forcing interpolated in time, so restarting at any grid time
//! reproduces the uninterrupted recursion.

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{SolverConfig, TimeQuadrature};
use super::grid::PeriodicGrid;
use super::solution::{GridField, PicardTrace, SegmentTrace, SolutionField, SolverFailure};
use crate::controlled::{compose, ControlledPath, SmoothFunction};
use crate::error::{Error, Result};
use crate::heat::{HeatDriverSample, SpectralField};
use crate::integral::add_local_term;
use crate::rough_path::RoughPathGrid;

/// `(1 - e^{-z}(1 + z)) / z²`, stable near 0.
fn phi_linear(z: f64) -> f64 {
    if z < 1.0 {
        let mut term = 0.5;
        let mut sum = term;
        for n in 1..30 {
            term *= -z / (n as f64 + 2.0);
            sum += (n as f64 + 1.0) * term;
        }
        sum
    } else {
        (1.0 - (-z).exp() * (1.0 + z)) / (z * z)
    }
}

/// Per-mode coefficients of `Ŵ_n = E Ŵ_{n-1} + a F̂_{n-1} + b F̂_n`.
#[derive(Clone, Debug)]
struct StepWeights {
    decay: Vec<f64>,
    prev: Vec<f64>,
    curr: Vec<f64>,
}

impl StepWeights {
    fn new(grid: &PeriodicGrid, dt: f64, quadrature: TimeQuadrature) -> Self {
        let n = grid.len();
        let mut w = StepWeights {
            decay: vec![0.0; n],
            prev: vec![0.0; n],
            curr: vec![0.0; n],
        };
        for i in 0..n {
            let k = grid.wavenumber(i);
            let lambda = 1.0 + k * k;
            let z = lambda * dt;
            let phi1 = -(-z).exp_m1() / z * dt;
            w.decay[i] = (-z).exp();
            match quadrature {
                TimeQuadrature::ExponentialTrapezoid => {
                    w.prev[i] = phi_linear(z) * dt;
                    w.curr[i] = phi1 - w.prev[i];
                }
                TimeQuadrature::LeftEndpoint => w.prev[i] = phi1,
            }
        }
        w
    }
}

/// Forcing coefficients of one time slice, one row per component.
type SliceCoeffs = Vec<Vec<Complex64>>;

/// Compensated-sum weights `μ_j` (components concatenated) of
/// `∫ g(v + H) dH` over each spatial cell, with `Z` obtained by composing
/// `g` with `(v + H, id, 0, …)`.
pub(crate) fn rough_cell_terms(
    lift: &RoughPathGrid,
    v: &[f64],
    origin: &[f64],
    g: &SmoothFunction,
    nx: usize,
) -> Result<Vec<f64>> {
    let z = integrand(lift, v, origin, g, nx)?;
    let d = lift.dim();
    let mut mu = vec![0.0; d * nx];
    let mut out = vec![0.0; d];
    let mut scratch = vec![0.0; d.pow(lift.depth() as u32)];
    for j in 0..nx {
        out.iter_mut().for_each(|o| *o = 0.0);
        add_local_term(&z, lift, j, j + 1, &mut out, &mut scratch);
        for c in 0..d {
            mu[c * nx + j] = out[c];
        }
    }
    Ok(mu)
}

fn integrand(lift: &RoughPathGrid, v: &[f64], origin: &[f64], g: &SmoothFunction, nx: usize) -> Result<ControlledPath> {
    let d = lift.dim();
    if lift.len() != nx + 1 {
        return Err(Error::DimensionMismatch(format!(
            "lift has {} points, expected {}",
            lift.len(),
            nx + 1
        )));
    }
    let mut y = ControlledPath::canonical(lift, origin)?;
    for j in 0..=nx {
        let at = y.at_mut(0, j);
        for c in 0..d {
            at[c] += v[c * nx + j % nx];
        }
    }
    compose(g, &y)
}

/// The fixed-point map on one segment `[t_start, t_start + steps Δt]` of the
/// time grid, started from grid values `initial` of `u`.
#[derive(Debug)]
pub struct PicardMap<'a> {
    config: &'a SolverConfig,
    driver: &'a HeatDriverSample,
    start: usize,
    steps: usize,
    grid: PeriodicGrid,
    weights: StepWeights,
    linear: GridField,
    linear_dx: GridField,
    rough: bool,
}

impl<'a> PicardMap<'a> {
    pub fn new(
        config: &'a SolverConfig,
        driver: &'a HeatDriverSample,
        initial: &[f64],
        start: usize,
        steps: usize,
    ) -> Result<Self> {
        config.validate()?;
        let (d, nx) = (config.dim, config.space_points);
        if driver.dim() != d || driver.n_x() != nx || driver.times().len() != config.time_steps + 1 {
            return Err(Error::DimensionMismatch(format!(
                "driver has dim {}, {} points and {} times; the solver grid needs {d}, {nx} and {}",
                driver.dim(),
                driver.n_x(),
                driver.times().len(),
                config.time_steps + 1
            )));
        }
        if initial.len() != d * nx {
            return Err(Error::DimensionMismatch(format!(
                "initial state has {} values, expected {}",
                initial.len(),
                d * nx
            )));
        }
        if steps == 0 || start + steps > config.time_steps {
            return Err(Error::Usage(format!(
                "segment {start}..{} leaves the time grid of {} steps",
                start + steps,
                config.time_steps
            )));
        }
        let rough = (0..driver.times().len()).any(|n| (0..d).any(|c| driver.slice(n, c).iter().any(|&h| h != 0.0)));
        if rough {
            if !driver.is_lifted() {
                return Err(Error::Usage("a nonzero driver must be lifted before solving".into()));
            }
            if driver.lift_at(0).depth() != config.depth() {
                return Err(Error::DimensionMismatch(format!(
                    "driver lifted to depth {}, the configuration needs {}",
                    driver.lift_at(0).depth(),
                    config.depth()
                )));
            }
        }
        let grid = PeriodicGrid::new(nx)?;
        let dt = config.time_step();
        let weights = StepWeights::new(&grid, dt, config.quadrature);

        // U_t = S_t(u_0 - h_0), exact at t = 0.
        let start_free: Vec<Vec<f64>> = (0..d)
            .map(|c| {
                let h = driver.slice(start, c);
                (0..nx).map(|j| initial[c * nx + j] - h[j]).collect()
            })
            .collect();
        let coeffs: Vec<Vec<Complex64>> = start_free.iter().map(|row| grid.forward(row)).collect();
        let (values, derivs): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (0..=steps)
            .into_par_iter()
            .map(|n| {
                let t = n as f64 * dt;
                let mut vals = Vec::with_capacity(d * nx);
                let mut dx = Vec::with_capacity(d * nx);
                for (c, row) in coeffs.iter().enumerate() {
                    let evolved: Vec<Complex64> = row
                        .iter()
                        .enumerate()
                        .map(|(i, z)| {
                            let k = grid.wavenumber(i);
                            z * (-(1.0 + k * k) * t).exp()
                        })
                        .collect();
                    if n == 0 {
                        vals.extend_from_slice(&start_free[c]);
                    } else {
                        vals.extend(grid.inverse(&evolved));
                    }
                    dx.extend(grid.inverse(&grid.derivative_coeffs(&evolved)));
                }
                (vals, dx)
            })
            .unzip();
        Ok(PicardMap {
            config,
            driver,
            start,
            steps,
            grid,
            weights,
            linear: GridField::from_slices(d, nx, values),
            linear_dx: GridField::from_slices(d, nx, derivs),
            rough,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// `U` on the segment.
    pub fn linear(&self) -> &GridField {
        &self.linear
    }

    /// Global time index of local slice `n`.
    fn global(&self, n: usize) -> usize {
        self.start + n
    }

    pub fn zero_field(&self) -> GridField {
        GridField::zeros(self.steps + 1, self.config.dim, self.config.space_points)
    }

    fn check_field(&self, w: &GridField) -> Result<()> {
        if (w.slices(), w.dim(), w.nx()) != (self.steps + 1, self.config.dim, self.config.space_points) {
            return Err(Error::DimensionMismatch(format!(
                "field of shape {}x{}x{} on a segment of {} slices",
                w.slices(),
                w.dim(),
                w.nx(),
                self.steps + 1
            )));
        }
        Ok(())
    }

    /// `w + U` on slice `n`, components concatenated.
    fn v_slice(&self, w: &GridField, n: usize) -> Vec<f64> {
        w.time_slice(n).iter().zip(self.linear.time_slice(n)).map(|(a, b)| a + b).collect()
    }

    /// `u = w + H + U` on slice `n`.
    pub fn state(&self, w: &GridField, n: usize) -> Vec<f64> {
        let (d, nx) = (self.config.dim, self.config.space_points);
        let mut u = self.v_slice(w, n);
        for c in 0..d {
            for (j, h) in self.driver.slice(self.global(n), c).iter().enumerate() {
                u[c * nx + j] += h;
            }
        }
        u
    }

    fn origin(&self, n: usize) -> Vec<f64> {
        (0..self.config.dim).map(|c| self.driver.value(self.global(n), c, 0)).collect()
    }

    /// The integrand `Z` of the spatial rough integral on slice `n`:
    /// `g(w + · + U)` composed with the canonical controlled path of the
    /// driver lift.
    pub fn build_z(&self, w: &GridField, n: usize) -> Result<ControlledPath> {
        self.check_field(w)?;
        if !self.driver.is_lifted() {
            return Err(Error::Usage("the driver has not been lifted".into()));
        }
        integrand(
            self.driver.lift_at(self.global(n)),
            &self.v_slice(w, n),
            &self.origin(n),
            &self.config.g,
            self.config.space_points,
        )
    }

    /// Coefficients of `g(u)(∂_x w + ∂_x U) + f̂(u)` on slice `n`, dealiased.
    fn smooth_forcing(&self, w: &GridField, n: usize) -> SliceCoeffs {
        let (d, nx) = (self.config.dim, self.config.space_points);
        let u = self.state(w, n);
        let dv: Vec<Vec<f64>> = (0..d)
            .map(|c| {
                let dw = self.grid.derivative(w.slice(n, c));
                dw.iter().zip(self.linear_dx.slice(n, c)).map(|(a, b)| a + b).collect()
            })
            .collect();
        let mut forcing = vec![vec![0.0; nx]; d];
        let mut point = vec![0.0; d];
        for j in 0..nx {
            for c in 0..d {
                point[c] = u[c * nx + j];
            }
            let g = self.config.g.eval(&point);
            let f = self.config.f.eval(&point);
            for (c, row) in forcing.iter_mut().enumerate() {
                let mut acc = f[c] + point[c];
                for (e, dve) in dv.iter().enumerate() {
                    acc += g[c * d + e] * dve[j];
                }
                row[j] = acc;
            }
        }
        forcing
            .iter()
            .map(|row| {
                let mut co = self.grid.forward(row);
                self.grid.filter(&mut co);
                co
            })
            .collect()
    }

    /// Fourier coefficients of the cell measure on slice `n`, dealiased.
    fn rough_forcing(&self, w: &GridField, n: usize) -> Result<SliceCoeffs> {
        let (d, nx) = (self.config.dim, self.config.space_points);
        let mu = rough_cell_terms(
            self.driver.lift_at(self.global(n)),
            &self.v_slice(w, n),
            &self.origin(n),
            &self.config.g,
            nx,
        )?;
        let half = self.grid.spacing() / 2.0;
        let norm = 1.0 / (2.0 * std::f64::consts::PI);
        Ok((0..d)
            .map(|c| {
                let mut co = self.grid.forward_sum(&mu[c * nx..(c + 1) * nx]);
                for (i, z) in co.iter_mut().enumerate() {
                    let k = self.grid.wavenumber(i);
                    *z *= Complex64::from_polar(norm, -k * half);
                }
                self.grid.filter(&mut co);
                co
            })
            .collect())
    }

    fn zero_forcing(&self) -> SliceCoeffs {
        vec![vec![Complex64::new(0.0, 0.0); self.config.space_points]; self.config.dim]
    }

    /// Duhamel integral of per-slice forcing coefficients.
    fn integrate(&self, forcing: &[SliceCoeffs]) -> GridField {
        let (d, nx) = (self.config.dim, self.config.space_points);
        let wts = &self.weights;
        let mut states: Vec<SliceCoeffs> = Vec::with_capacity(self.steps + 1);
        states.push(self.zero_forcing());
        for n in 1..=self.steps {
            let prev = &states[n - 1];
            let next: SliceCoeffs = (0..d)
                .map(|c| {
                    (0..nx)
                        .map(|i| {
                            wts.decay[i] * prev[c][i]
                                + wts.prev[i] * forcing[n - 1][c][i]
                                + wts.curr[i] * forcing[n][c][i]
                        })
                        .collect()
                })
                .collect();
            states.push(next);
        }
        let slices: Vec<Vec<f64>> = states
            .par_iter()
            .map(|s| s.iter().flat_map(|row| self.grid.inverse(row)).collect())
            .collect();
        GridField::from_slices(d, nx, slices)
    }

    fn smooth_all(&self, w: &GridField) -> Vec<SliceCoeffs> {
        (0..=self.steps).into_par_iter().map(|n| self.smooth_forcing(w, n)).collect()
    }

    fn rough_all(&self, w: &GridField) -> Result<Vec<SliceCoeffs>> {
        if !self.rough {
            return Ok(vec![self.zero_forcing(); self.steps + 1]);
        }
        (0..=self.steps).into_par_iter().map(|n| self.rough_forcing(w, n)).collect()
    }

    /// `M¹w`.
    pub fn apply_m1(&self, w: &GridField) -> Result<GridField> {
        self.check_field(w)?;
        Ok(self.integrate(&self.smooth_all(w)))
    }

    /// `M²w`; identically zero for a zero driver.
    pub fn apply_m2(&self, w: &GridField) -> Result<GridField> {
        self.check_field(w)?;
        Ok(self.integrate(&self.rough_all(w)?))
    }

    /// `M¹w + M²w`.
    pub fn apply(&self, w: &GridField) -> Result<GridField> {
        self.check_field(w)?;
        let smooth = self.smooth_all(w);
        let rough = self.rough_all(w)?;
        let total: Vec<SliceCoeffs> = smooth
            .into_iter()
            .zip(rough)
            .map(|(s, r)| {
                s.into_iter()
                    .zip(r)
                    .map(|(a, b)| a.into_iter().zip(b).map(|(x, y)| x + y).collect())
                    .collect()
            })
            .collect();
        Ok(self.integrate(&total))
    }
}

/// Outcome of the Picard iteration at one horizon.
enum Iteration {
    Accepted(GridField, SegmentTrace),
    Rejected(String, SegmentTrace),
}

fn iterate(map: &PicardMap<'_>, config: &SolverConfig) -> Result<Iteration> {
    let dt = config.time_step();
    let mut trace = SegmentTrace {
        start_time: map.start() as f64 * dt,
        horizon: map.steps() as f64 * dt,
        steps: map.steps(),
        iterate_norms: vec![0.0],
        differences: Vec::new(),
        ratios: Vec::new(),
        contraction_ratio: 0.0,
        rejected_horizons: Vec::new(),
    };
    let mut w = map.zero_field();
    for it in 1..=config.max_iterations {
        let next = map.apply(&w)?;
        if !next.is_finite() {
            return Ok(Iteration::Rejected(format!("iterate {it} is not finite"), trace));
        }
        let diff = next.combine(1.0, &w, -1.0)?.c1_norm(map.grid());
        let norm = next.c1_norm(map.grid());
        let floor = 1e-13 * norm.max(1.0);
        if it >= 2 {
            let prev = trace.differences[it - 2];
            let ratio = (diff > floor && prev > floor).then(|| diff / prev);
            if let Some(r) = ratio {
                trace.contraction_ratio = trace.contraction_ratio.max(r);
            }
            trace.ratios.push(ratio);
        }
        trace.differences.push(diff);
        trace.iterate_norms.push(norm);
        w = next;
        if diff < config.tolerance || diff <= floor {
            if trace.contraction_ratio > config.contraction_target {
                let msg = format!(
                    "contraction ratio {:.4} exceeds {}",
                    trace.contraction_ratio, config.contraction_target
                );
                return Ok(Iteration::Rejected(msg, trace));
            }
            return Ok(Iteration::Accepted(w, trace));
        }
        if it == 3 && trace.contraction_ratio > config.contraction_target {
            let msg = format!(
                "early contraction ratio {:.4} exceeds {}",
                trace.contraction_ratio, config.contraction_target
            );
            return Ok(Iteration::Rejected(msg, trace));
        }
    }
    Ok(Iteration::Rejected(
        format!("no convergence within {} iterations", config.max_iterations),
        trace,
    ))
}

struct Segment {
    start: usize,
    w: GridField,
    linear: GridField,
    initial: Vec<f64>,
    trace: SegmentTrace,
}

/// Solves one segment from `start`, halving the horizon from `max_steps`
/// until the iteration contracts.
fn solve_segment(
    config: &SolverConfig,
    driver: &HeatDriverSample,
    initial: &[f64],
    start: usize,
    max_steps: usize,
) -> Result<std::result::Result<Segment, (String, SegmentTrace)>> {
    let mut steps = max_steps;
    let mut rejected = Vec::new();
    loop {
        let map = PicardMap::new(config, driver, initial, start, steps)?;
        match iterate(&map, config)? {
            Iteration::Accepted(w, mut trace) => {
                trace.rejected_horizons = rejected;
                return Ok(Ok(Segment {
                    start,
                    w,
                    linear: map.linear,
                    initial: initial.to_vec(),
                    trace,
                }));
            }
            Iteration::Rejected(reason, mut trace) => {
                rejected.push(steps as f64 * config.time_step());
                if steps == 1 {
                    trace.rejected_horizons = rejected;
                    let msg = format!(
                        "horizon fell below one time step at t = {}: {reason}",
                        start as f64 * config.time_step()
                    );
                    return Ok(Err((msg, trace)));
                }
                steps /= 2;
            }
        }
    }
}

/// Glues segments into one solution; each restart node keeps the previous
/// segment's terminal slice, which is also the next segment's initial state.
fn glue(config: &SolverConfig, driver: &HeatDriverSample, segments: &[Segment]) -> SolutionField {
    let (d, nx) = (config.dim, config.space_points);
    let all_times = config.times();
    let mut times = Vec::new();
    let (mut w, mut linear, mut h, mut u) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut restarts = Vec::new();
    for (s, seg) in segments.iter().enumerate() {
        if s > 0 {
            restarts.push(seg.start);
        }
        let first = if s == 0 { 0 } else { 1 };
        for n in first..seg.w.slices() {
            let g = seg.start + n;
            times.push(all_times[g]);
            let ws = seg.w.time_slice(n);
            let ls = seg.linear.time_slice(n);
            let hs: Vec<f64> = (0..d).flat_map(|c| driver.slice(g, c).iter().copied()).collect();
            let us: Vec<f64> = if n == 0 {
                seg.initial.clone()
            } else {
                (0..d * nx).map(|i| ws[i] + hs[i] + ls[i]).collect()
            };
            w.push(ws.to_vec());
            linear.push(ls.to_vec());
            h.push(hs);
            u.push(us);
        }
    }
    SolutionField {
        times,
        w: GridField::from_slices(d, nx, w),
        linear: GridField::from_slices(d, nx, linear),
        driver: GridField::from_slices(d, nx, h),
        u: GridField::from_slices(d, nx, u),
        restarts,
        trace: PicardTrace {
            segments: segments.iter().map(|s| s.trace.clone()).collect(),
        },
    }
}

fn initial_values(u0: &SpectralField, config: &SolverConfig) -> Result<Vec<f64>> {
    if u0.dim() != config.dim {
        return Err(Error::DimensionMismatch(format!(
            "initial condition has {} components, expected {}",
            u0.dim(),
            config.dim
        )));
    }
    Ok(u0.sample(config.space_points).into_iter().flatten().collect())
}

fn run(
    config: &SolverConfig,
    driver: &HeatDriverSample,
    initial: Vec<f64>,
    global: bool,
) -> Result<SolutionField> {
    config.validate()?;
    let horizon = config.horizon_steps();
    let mut segments: Vec<Segment> = Vec::new();
    let mut state = initial;
    let mut start = 0;
    while start < config.time_steps {
        let max_steps = horizon.min(config.time_steps - start);
        match solve_segment(config, driver, &state, start, max_steps)? {
            Ok(seg) => {
                start += seg.w.slices() - 1;
                state = seg.w.time_slice(seg.w.slices() - 1).to_vec();
                let last = seg.w.slices() - 1;
                let ls = seg.linear.time_slice(last);
                for c in 0..config.dim {
                    let hs = driver.slice(start, c);
                    for j in 0..config.space_points {
                        let i = c * config.space_points + j;
                        state[i] += hs[j] + ls[i];
                    }
                }
                segments.push(seg);
                if !global {
                    break;
                }
            }
            Err((message, seg_trace)) => {
                let partial = (!segments.is_empty()).then(|| glue(config, driver, &segments));
                let mut trace = PicardTrace {
                    segments: segments.iter().map(|s| s.trace.clone()).collect(),
                };
                trace.segments.push(seg_trace);
                return Err(SolverFailure {
                    message,
                    trace,
                    partial,
                }
                .into());
            }
        }
    }
    Ok(glue(config, driver, &segments))
}

/// Picard solve on `[0, T]` for the largest `T <= horizon` (halving) at which
/// the iteration contracts.
pub fn picard_solve_local(u0: &SpectralField, driver: &HeatDriverSample, config: &SolverConfig) -> Result<SolutionField> {
    run(config, driver, initial_values(u0, config)?, false)
}

/// Repeated local solves, each restarted from the terminal slice of the
/// previous one, until `final_time` is covered.
pub fn solve_global(u0: &SpectralField, driver: &HeatDriverSample, config: &SolverConfig) -> Result<SolutionField> {
    run(config, driver, initial_values(u0, config)?, true)
}

/// [`solve_global`] from grid values of `u_0` (components concatenated).
pub fn solve_global_from_values(
    initial: &[f64],
    driver: &HeatDriverSample,
    config: &SolverConfig,
) -> Result<SolutionField> {
    if initial.len() != config.dim * config.space_points {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} values, expected {}",
            initial.len(),
            config.dim * config.space_points
        )));
    }
    run(config, driver, initial.to_vec(), true)
}

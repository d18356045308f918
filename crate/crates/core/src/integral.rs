//! Compensated Riemann sums and the rough integral.
//!
//! An integrand `Z` is a path controlled by `X` with values in
//! `L(R^d, R^m)`, stored as a controlled path of target dimension `m·d`
//! whose level-0 matrix is `m × d` row-major. Level `i` of `Z` pairs with
//! level `i + 1` of `X`: the leading `i` letters feed `Z^i`, the last letter
//! feeds the `L(R^d, R^m)` value, so one interval contributes
//! `Σ_i Z^i_u X^{i+1}_{u,v}`.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::controlled::{remainders, scalar_multiply, ControlledPath};
use crate::error::{Error, Result};
use crate::holder::{self, fit_loglog};
use crate::rough_path::RoughPathGrid;
use crate::sampling::stream_rng;

/// Relative stopping tolerance between successive dyadic refinements.
pub const DEFAULT_TOL: f64 = 1e-9;

fn check_integrand(z: &ControlledPath, x: &RoughPathGrid) -> Result<usize> {
    if z.times() != x.times() {
        return Err(Error::DimensionMismatch("integrand and rough path grids differ".into()));
    }
    let d = x.dim();
    if z.dim() != d || z.num_levels() != x.depth() {
        return Err(Error::DimensionMismatch(format!(
            "integrand over R^{} with {} levels against a depth-{} path in R^{d}",
            z.dim(),
            z.num_levels(),
            x.depth()
        )));
    }
    if z.target_dim() % d != 0 {
        return Err(Error::DimensionMismatch(format!(
            "integrand target {} is not a multiple of the path dimension {d}",
            z.target_dim()
        )));
    }
    Ok(z.target_dim() / d)
}

/// Adds `Σ_i Z^i_u X^{i+1}_{u,v}` to `out` (length `m`). `levels` is scratch
/// of at least `d^N` entries.
pub(crate) fn add_local_term(
    z: &ControlledPath,
    x: &RoughPathGrid,
    u: usize,
    v: usize,
    out: &mut [f64],
    level: &mut [f64],
) {
    let d = x.dim();
    let m = out.len();
    for i in 0..z.num_levels() {
        let wi = d.pow(i as u32);
        let lvl = &mut level[..wi * d];
        x.increment_level(u, v, i + 1, lvl);
        let zi = z.at(i, u);
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for c in 0..d {
                let row = &zi[(r * d + c) * wi..(r * d + c + 1) * wi];
                for (w, zw) in row.iter().enumerate() {
                    acc += zw * lvl[w * d + c];
                }
            }
            *o += acc;
        }
        debug_assert_eq!(m, out.len());
    }
}

/// Compensated sum over the partition `s, s + stride, …, t` of grid indices
/// (the last interval may be shorter).
pub fn compensated_sum(
    z: &ControlledPath,
    x: &RoughPathGrid,
    s: usize,
    t: usize,
    stride: usize,
) -> Result<Vec<f64>> {
    let m = check_integrand(z, x)?;
    for idx in [s, t] {
        if idx >= x.len() {
            return Err(Error::IndexOutOfRange { index: idx, len: x.len() });
        }
    }
    if s > t {
        return Err(Error::Usage(format!("integration bounds {s} > {t}")));
    }
    let mut out = vec![0.0; m];
    let mut scratch = vec![0.0; x.dim().pow(x.depth() as u32)];
    let stride = stride.max(1);
    let mut u = s;
    while u < t {
        let v = (u + stride).min(t);
        add_local_term(z, x, u, v, &mut out, &mut scratch);
        u = v;
    }
    Ok(out)
}

/// Compensated sums of `∫_{t_0}^{t_k} Z dX` over single grid steps, for every
/// `k`.
pub fn cumulative_integral(z: &ControlledPath, x: &RoughPathGrid) -> Result<Vec<Vec<f64>>> {
    let m = check_integrand(z, x)?;
    let mut scratch = vec![0.0; x.dim().pow(x.depth() as u32)];
    let mut acc = vec![0.0; m];
    let mut out = Vec::with_capacity(x.len());
    out.push(acc.clone());
    for u in 0..x.len().saturating_sub(1) {
        add_local_term(z, x, u, u + 1, &mut acc, &mut scratch);
        out.push(acc.clone());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: Vec<f64>,
    /// `(mesh, value)` per dyadic level, coarse to fine.
    pub trace: Vec<(f64, Vec<f64>)>,
    pub converged: bool,
}

impl IntegralResult {
    /// `mesh, component, value` rows.
    pub fn write_trace_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["mesh", "component", "value"])?;
        for (mesh, v) in &self.trace {
            for (c, val) in v.iter().enumerate() {
                w.write_record([mesh.to_string(), c.to_string(), val.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// `∫_{t_s}^{t_t} Z dX` by dyadic refinement of grid strides, stopping once
/// two successive levels differ by less than `tol · max(1, |value|)` or the
/// full grid is reached.
pub fn rough_integral(
    z: &ControlledPath,
    x: &RoughPathGrid,
    s: usize,
    t: usize,
    tol: f64,
) -> Result<IntegralResult> {
    check_integrand(z, x)?;
    if t >= x.len() || s > t {
        return Err(Error::Usage(format!("invalid integration bounds ({s}, {t})")));
    }
    let span = t - s;
    if span == 0 {
        let m = z.target_dim() / x.dim();
        return Ok(IntegralResult {
            value: vec![0.0; m],
            trace: vec![(0.0, vec![0.0; m])],
            converged: true,
        });
    }
    let times = x.times();
    let mut stride = 1usize << (usize::BITS - 1 - span.leading_zeros());
    let mut trace: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut converged = false;
    loop {
        let value = compensated_sum(z, x, s, t, stride)?;
        let mesh = (s..t)
            .step_by(stride)
            .map(|u| times[(u + stride).min(t)] - times[u])
            .fold(0.0, f64::max);
        if let Some((_, prev)) = trace.last() {
            if max_diff(prev, &value) < tol * max_abs(&value).max(1.0) {
                converged = true;
            }
        }
        trace.push((mesh, value));
        if converged || stride == 1 {
            break;
        }
        stride /= 2;
    }
    let value = trace.last().expect("at least one level").1.clone();
    Ok(IntegralResult {
        value,
        trace,
        converged,
    })
}

/// Fitted exponent of the local error `|∫_s^t Z dX - Σ_i Z^i_s X^{i+1}_{s,t}|`
/// against `|t - s|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalErrorReport {
    pub interval_lengths: Vec<f64>,
    pub mean_errors: Vec<f64>,
    /// `None` when every error vanishes.
    pub exponent: Option<f64>,
    /// `(N + 1) α`.
    pub reference: f64,
}

/// Local errors over dyadic window lengths `2, 4, …` grid steps (up to a
/// sixteenth of the grid), `samples` seeded windows per length. The
/// integral over a window is its full-resolution compensated sum.
pub fn local_error_check(
    z: &ControlledPath,
    x: &RoughPathGrid,
    samples: usize,
    seed: u64,
) -> Result<LocalErrorReport> {
    let m = check_integrand(z, x)?;
    let n = x.len() - 1;
    let mut rng = stream_rng(seed, 0x10CA1);
    let mut lengths = Vec::new();
    let mut errors = Vec::new();
    let mut scale = 0.0f64;
    let mut steps = 2usize;
    while steps * 16 <= n {
        let starts: Vec<usize> = (0..samples).map(|_| rng.random_range(0..=n - steps)).collect();
        let pairs: Vec<(f64, f64)> = starts
            .par_iter()
            .map(|&s| {
                let fine = compensated_sum(z, x, s, s + steps, 1).expect("checked bounds");
                let coarse = compensated_sum(z, x, s, s + steps, steps).expect("checked bounds");
                (holder::euclidean_distance(&fine, &coarse), holder::euclidean_norm(&fine))
            })
            .collect();
        // summed in order so the result does not depend on the thread count
        let total: f64 = pairs.iter().map(|p| p.0).sum();
        let size = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
        scale = scale.max(size);
        let mean_len = starts
            .iter()
            .map(|&s| x.times()[s + steps] - x.times()[s])
            .sum::<f64>()
            / samples as f64;
        lengths.push(mean_len);
        errors.push(total / samples as f64);
        steps *= 2;
    }
    debug_assert!(m > 0);
    // errors at roundoff level carry no rate
    let exponent = if errors.iter().all(|&e| e <= 1e-14 * scale.max(1.0)) {
        None
    } else {
        fit_loglog(&lengths, &errors).map(|f| f.slope)
    };
    Ok(LocalErrorReport {
        interval_lengths: lengths,
        mean_errors: errors,
        exponent,
        reference: (x.depth() + 1) as f64 * x.alpha(),
    })
}

/// `‖∫_0^· δZ_{0,r} dX_r‖_α` compared against `‖X‖_α ‖δZ‖_{X,α}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathNormReport {
    pub integral_norm: f64,
    pub rough_norm: f64,
    pub controlled_norm: f64,
    /// `integral_norm / (rough_norm · controlled_norm)`, zero when the
    /// integrand does not move.
    pub ratio: f64,
}

pub fn integral_path_norm_check(z: &ControlledPath, x: &RoughPathGrid) -> Result<PathNormReport> {
    check_integrand(z, x)?;
    let dz = z.increment_from_start();
    let path = cumulative_integral(&dz, x)?;
    let integral_norm = holder::path_seminorm(x.times(), &path, x.alpha());
    let rough_norm = x.hoelder_norm().total;
    let controlled_norm = remainders(&dz, x)?.controlled_norm;
    let denom = rough_norm * controlled_norm;
    let ratio = if denom == 0.0 { 0.0 } else { integral_norm / denom };
    Ok(PathNormReport {
        integral_norm,
        rough_norm,
        controlled_norm,
        ratio,
    })
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function `f` on `R` with derivative, used through its rescalings
/// `f(λ·)`.
#[derive(Clone)]
pub struct ScaledFunction {
    name: String,
    f: RealFn,
    df: RealFn,
    window: Option<(f64, f64)>,
}

impl std::fmt::Debug for ScaledFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScaledFunction")
            .field("name", &self.name)
            .field("window", &self.window)
            .finish()
    }
}

/// `‖f‖_{1,1}` with the estimated contribution of the truncated tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub total: f64,
    pub tail: f64,
}

const WINDOW_TERMS: i64 = 64;
const SAMPLES_PER_UNIT: usize = 256;

impl ScaledFunction {
    pub fn new<F, D>(name: &str, f: F, df: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ScaledFunction {
            name: name.to_string(),
            f: Arc::new(f),
            df: Arc::new(df),
            window: None,
        }
    }

    /// `exp(-(x - center)² / (2 width²))`.
    pub fn gaussian(center: f64, width: f64) -> Self {
        let w2 = width * width;
        Self::new(
            "gaussian",
            move |x| (-(x - center).powi(2) / (2.0 * w2)).exp(),
            move |x| -(x - center) / w2 * (-(x - center).powi(2) / (2.0 * w2)).exp(),
        )
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| 0.0, |_| 0.0)
    }

    /// Restricts the norm's sum to unit windows meeting `[a, b]`.
    pub fn with_window(mut self, a: f64, b: f64) -> Self {
        self.window = Some((a, b));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    fn window_sup(&self, a: f64, b: f64) -> f64 {
        (0..=SAMPLES_PER_UNIT)
            .map(|k| {
                let x = a + (b - a) * k as f64 / SAMPLES_PER_UNIT as f64;
                self.eval(x).abs() + self.derivative(x).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `Σ_n sup_{0≤t≤1} (|f(n+t)| + |f'(n+t)|)`, sampled on each unit window.
    /// Over the whole line the sum runs over `|n| ≤ 64` plus a geometric tail
    /// estimate; with a window only the windows meeting it count.
    pub fn norm_11(&self) -> Result<NormEstimate> {
        if let Some((a, b)) = self.window {
            let mut total = 0.0;
            let mut n = a.floor();
            while n < b {
                total += self.window_sup(n.max(a), (n + 1.0).min(b));
                n += 1.0;
            }
            return Ok(NormEstimate { total, tail: 0.0 });
        }
        let terms: Vec<f64> = (-WINDOW_TERMS..WINDOW_TERMS)
            .map(|n| self.window_sup(n as f64, n as f64 + 1.0))
            .collect();
        let total: f64 = terms.iter().sum();
        let tail_of = |last: f64, prev: f64| -> f64 {
            if last == 0.0 {
                0.0
            } else if prev > last {
                let q = last / prev;
                last * q / (1.0 - q)
            } else {
                f64::INFINITY
            }
        };
        let k = terms.len();
        let tail = tail_of(terms[k - 1], terms[k - 2]) + tail_of(terms[0], terms[1]);
        if !(tail <= 1e-10 * total.max(f64::MIN_POSITIVE)) && total > 0.0 {
            return Err(Error::Numerical(format!(
                "{}: tail {tail:e} of the scaled norm exceeds the 1e-10 budget",
                self.name
            )));
        }
        Ok(NormEstimate {
            total: total + tail,
            tail,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub lambdas: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// `None` when the magnitudes are degenerate (all zero).
    pub fitted_slope: Option<f64>,
    pub intercept: Option<f64>,
}

impl ScalingReport {
    /// Columns `lambda, magnitude, log_residual, fitted_slope`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["lambda", "magnitude", "log_residual", "fitted_slope"])?;
        for (l, m) in self.lambdas.iter().zip(&self.magnitudes) {
            let residual = match (self.fitted_slope, self.intercept) {
                (Some(s), Some(c)) if *m > 0.0 => (m.ln() - c - s * l.ln()).to_string(),
                _ => String::new(),
            };
            let slope = self.fitted_slope.map(|s| s.to_string()).unwrap_or_default();
            w.write_record([l.to_string(), m.to_string(), residual, slope])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `|∫_{t_0}^{t_end} f(λt) Z_t dX_t|` for each `λ`, with the log-log slope.
pub fn scaled_integral_decay(
    f: &ScaledFunction,
    z: &ControlledPath,
    x: &RoughPathGrid,
    lambdas: &[f64],
) -> Result<ScalingReport> {
    check_integrand(z, x)?;
    if lambdas.is_empty() {
        return Err(Error::Usage("no scale factors given".into()));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) || lambdas[0] < 1.0 {
        return Err(Error::Usage("scale factors must be increasing and at least 1".into()));
    }
    let last = x.len() - 1;
    let magnitudes = lambdas
        .par_iter()
        .map(|&lambda| {
            let g: Vec<f64> = x.times().iter().map(|&t| f.eval(lambda * t)).collect();
            let scaled = scalar_multiply(&g, z)?;
            let v = compensated_sum(&scaled, x, 0, last, 1)?;
            Ok(holder::euclidean_norm(&v))
        })
        .collect::<Result<Vec<f64>>>()?;
    let fit = if magnitudes.iter().all(|&m| m == 0.0) {
        None
    } else {
        fit_loglog(lambdas, &magnitudes)
    };
    Ok(ScalingReport {
        lambdas: lambdas.to_vec(),
        magnitudes,
        fitted_slope: fit.map(|f| f.slope),
        intercept: fit.map(|f| f.intercept),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controlled::{compose, Activation, SmoothFunction};
    use crate::rough_path::{signature_lift, GridPath};
    use crate::sampling::brownian_path;

    fn identity_path(n: usize, depth: usize) -> RoughPathGrid {
        let times = GridPath::uniform_times(0.0, 1.0, n);
        signature_lift(&GridPath::from_fn(times, |t| vec![t]).unwrap(), depth, 1.0 / depth as f64)
            .unwrap()
    }

    #[test]
    fn constant_integrand_telescopes() {
        let x = signature_lift(&brownian_path(1, 2, 64, 1.0).unwrap(), 2, 0.4).unwrap();
        let mut z = ControlledPath::zeros(x.times().to_vec(), 2, 2, 2);
        for t in 0..z.len() {
            z.at_mut(0, t).copy_from_slice(&[1.5, -0.5]);
        }
        let r = rough_integral(&z, &x, 3, 50, DEFAULT_TOL).unwrap();
        let inc = x.increment(3, 50).unwrap();
        let exact = 1.5 * inc.level(1)[0] - 0.5 * inc.level(1)[1];
        assert!((r.value[0] - exact).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn canonical_identity_integral_is_one_half() {
        let x = identity_path(1 << 12, 2);
        let z = ControlledPath::canonical(&x, &[0.0]).unwrap();
        let r = rough_integral(&z, &x, 0, 1 << 12, DEFAULT_TOL).unwrap();
        assert!((r.value[0] - 0.5).abs() < 1e-8);
        for w in r.trace.windows(2) {
            assert!(w[1].0 < w[0].0);
        }
    }

    #[test]
    fn first_order_sums_converge_at_first_order() {
        // depth 1: a left Riemann sum for ∫ t dt
        let errs: Vec<f64> = [256usize, 512, 1024]
            .iter()
            .map(|&n| {
                let x = identity_path(n, 1);
                let z = ControlledPath::canonical(&x, &[0.0]).unwrap();
                (compensated_sum(&z, &x, 0, n, 1).unwrap()[0] - 0.5).abs()
            })
            .collect();
        for w in errs.windows(2) {
            assert!(((w[0] / w[1]).log2() - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn linearity_and_additivity() {
        let x = signature_lift(&brownian_path(2, 1, 256, 1.0).unwrap(), 2, 0.4).unwrap();
        let y = ControlledPath::canonical(&x, &[0.1]).unwrap();
        let a = compose(&SmoothFunction::componentwise(Activation::Sin, 1, 1.0, 1.0), &y).unwrap();
        let b = compose(&SmoothFunction::componentwise(Activation::Tanh, 1, 1.0, 2.0), &y).unwrap();
        let ab = a.combine(2.0, &b, -3.0).unwrap();
        let ia = compensated_sum(&a, &x, 0, 256, 1).unwrap()[0];
        let ib = compensated_sum(&b, &x, 0, 256, 1).unwrap()[0];
        let iab = compensated_sum(&ab, &x, 0, 256, 1).unwrap()[0];
        assert!((iab - (2.0 * ia - 3.0 * ib)).abs() < 1e-10);
        let left = compensated_sum(&a, &x, 0, 100, 1).unwrap()[0];
        let right = compensated_sum(&a, &x, 100, 256, 1).unwrap()[0];
        assert!((left + right - ia).abs() < 1e-12);
    }

    #[test]
    fn polynomial_integrand_is_refinement_invariant() {
        // ∫ X dX against X(t) = t² at depth 2 telescopes exactly to X²/2
        let times = GridPath::uniform_times(0.0, 1.0, 64);
        let p = GridPath::from_fn(times, |t| vec![t * t]).unwrap();
        let x = signature_lift(&p, 2, 0.5).unwrap();
        let z = ControlledPath::canonical(&x, &[0.0]).unwrap();
        for stride in [1, 2, 8, 64] {
            let v = compensated_sum(&z, &x, 0, 64, stride).unwrap()[0];
            assert!((v - 0.5).abs() < 1e-14, "stride {stride}: {v}");
        }
    }

    #[test]
    fn constant_local_error_vanishes() {
        let x = signature_lift(&brownian_path(3, 1, 512, 1.0).unwrap(), 2, 0.4).unwrap();
        let mut z = ControlledPath::zeros(x.times().to_vec(), 1, 1, 2);
        for t in 0..z.len() {
            z.at_mut(0, t)[0] = 2.0;
        }
        let r = local_error_check(&z, &x, 20, 0).unwrap();
        assert!(r.exponent.is_none());
        assert!(r.mean_errors.iter().all(|&e| e < 1e-15));
    }

    #[test]
    fn smooth_local_error_is_second_order() {
        let times = GridPath::uniform_times(0.0, 1.0, 2048);
        let p = GridPath::from_fn(times, |t| vec![(2.0 * t).sin()]).unwrap();
        let x = signature_lift(&p, 1, 1.0).unwrap();
        let y = ControlledPath::canonical(&x, &[0.0]).unwrap();
        let z = compose(&SmoothFunction::componentwise(Activation::Cos, 1, 1.0, 1.0), &y).unwrap();
        let r = local_error_check(&z, &x, 30, 1).unwrap();
        assert!(r.exponent.unwrap() >= 1.85, "{r:?}");
    }

    #[test]
    fn path_norm_of_constant_integrand_is_zero() {
        let x = signature_lift(&brownian_path(4, 1, 64, 1.0).unwrap(), 2, 0.4).unwrap();
        let mut z = ControlledPath::zeros(x.times().to_vec(), 1, 1, 2);
        for t in 0..z.len() {
            z.at_mut(0, t)[0] = -1.0;
        }
        let r = integral_path_norm_check(&z, &x).unwrap();
        assert_eq!(r.integral_norm, 0.0);
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn path_norm_ignores_constants() {
        let x = signature_lift(&brownian_path(5, 1, 128, 1.0).unwrap(), 2, 0.4).unwrap();
        let y = ControlledPath::canonical(&x, &[0.0]).unwrap();
        let z = compose(&SmoothFunction::componentwise(Activation::Sin, 1, 1.0, 1.0), &y).unwrap();
        let a = integral_path_norm_check(&z, &x).unwrap();
        let b = integral_path_norm_check(&z.shift(&[5.0]).unwrap(), &x).unwrap();
        assert!((a.ratio - b.ratio).abs() < 1e-10 * a.ratio.max(1.0));
        assert!(a.ratio > 0.0);
    }

    #[test]
    fn gaussian_scaled_norm() {
        let g = ScaledFunction::gaussian(0.0, 1.0);
        let n = g.norm_11().unwrap();
        assert!(n.tail < 1e-10 * n.total);
        assert!(n.total > 5.5 && n.total < 6.5, "{n:?}");
        assert_eq!(ScaledFunction::zero().norm_11().unwrap().total, 0.0);
        let slow = ScaledFunction::new("flat", |_| 1.0, |_| 0.0);
        assert!(slow.norm_11().is_err());
        assert!(slow.with_window(0.0, 2.5).norm_11().unwrap().total == 3.0);
    }

    #[test]
    fn zero_scaling_is_degenerate() {
        let x = signature_lift(&brownian_path(6, 1, 64, 1.0).unwrap(), 2, 0.4).unwrap();
        let z = ControlledPath::canonical(&x, &[0.0]).unwrap();
        let r = scaled_integral_decay(&ScaledFunction::zero(), &z, &x, &[1.0, 2.0, 4.0]).unwrap();
        assert!(r.fitted_slope.is_none());
        assert!(scaled_integral_decay(&ScaledFunction::zero(), &z, &x, &[]).is_err());
    }

    #[test]
    fn scaling_csv_has_slope_column() {
        let x = signature_lift(&brownian_path(7, 1, 256, 1.0).unwrap(), 2, 0.4).unwrap();
        let z = ControlledPath::canonical(&x, &[0.0]).unwrap();
        let r = scaled_integral_decay(&ScaledFunction::gaussian(0.0, 1.0), &z, &x, &[1.0, 2.0, 4.0])
            .unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("lambda,magnitude,log_residual,fitted_slope\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn rejects_mismatched_integrands() {
        let x = signature_lift(&brownian_path(8, 2, 16, 1.0).unwrap(), 2, 0.4).unwrap();
        let z = ControlledPath::zeros(x.times().to_vec(), 2, 3, 2);
        assert!(rough_integral(&z, &x, 0, 16, DEFAULT_TOL).is_err());
        let z = ControlledPath::zeros(x.times().to_vec(), 2, 2, 2);
        assert!(rough_integral(&z, &x, 0, 17, DEFAULT_TOL).is_err());
    }
}

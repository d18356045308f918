//! Method-of-lines reference solver for
//! `∂_t v = (∂²_x - 1) v + f̂(v + H) + g(v + H)(∂_x v + ∂_x H) + F`
//! with a smooth driver `H`, `f̂(u) = f(u) + u` and an optional forcing
//! `F`. Pseudospectral in space (products dealiased by the two-thirds rule),
//! classical fourth-order Runge–Kutta in time. The reported error is the
//! difference to a run with half the step.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::digest_inputs;
use crate::controlled::SmoothFunction;
use crate::error::{Error, Result};

/// Largest `λ_max Δt` accepted, inside the RK4 stability interval.
const STABILITY_LIMIT: f64 = 2.7;

type GridFn<'a> = &'a (dyn Fn(f64) -> Vec<f64> + Sync);

/// Inputs of the reference solve; grid values have components concatenated.
pub struct ReferenceProblem<'a> {
    pub dim: usize,
    pub space_points: usize,
    pub final_time: f64,
    /// Number of equal output intervals.
    pub output_steps: usize,
    pub f: &'a SmoothFunction,
    pub g: &'a SmoothFunction,
    /// `u_0` on the grid `2πj/n`.
    pub initial: Vec<f64>,
    /// `t ↦ H_t` on the grid; zero when absent.
    pub driver: Option<GridFn<'a>>,
    /// `t ↦ F_t` on the grid; zero when absent.
    pub forcing: Option<GridFn<'a>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSolution {
    pub times: Vec<f64>,
    /// `u = v + H` per output time.
    pub u: Vec<Vec<f64>>,
    /// Largest difference to the half-step run.
    pub error_estimate: f64,
    pub substeps: usize,
    pub digest: String,
}

struct Spectral {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
    keep: Vec<bool>,
}

impl Spectral {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let k: Vec<f64> = (0..n)
            .map(|i| if 2 * i <= n { i as f64 } else { i as f64 - n as f64 })
            .collect();
        let keep = k.iter().map(|k| 3.0 * k.abs() <= n as f64).collect();
        Spectral {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            k,
            keep,
        }
    }

    fn to_modes(&self, v: &[f64]) -> Vec<Complex64> {
        let mut b: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x / self.n as f64, 0.0)).collect();
        self.fwd.process(&mut b);
        b
    }

    fn to_grid(&self, c: &[Complex64]) -> Vec<f64> {
        let mut b = c.to_vec();
        self.inv.process(&mut b);
        b.iter().map(|z| z.re).collect()
    }

    fn ddx(&self, c: &[Complex64]) -> Vec<f64> {
        let d: Vec<Complex64> = c
            .iter()
            .enumerate()
            .map(|(i, z)| if self.keep[i] { z * Complex64::new(0.0, self.k[i]) } else { Complex64::new(0.0, 0.0) })
            .collect();
        self.to_grid(&d)
    }
}

/// Smallest number of RK4 steps per output interval that respects the
/// stability limit.
pub fn stable_substeps(problem: &ReferenceProblem<'_>) -> usize {
    let kmax = (problem.space_points / 2) as f64;
    let dt_out = problem.final_time / problem.output_steps as f64;
    ((1.0 + kmax * kmax) * dt_out / STABILITY_LIMIT).ceil().max(1.0) as usize
}

fn rhs(p: &ReferenceProblem<'_>, sp: &Spectral, t: f64, modes: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let (d, n) = (p.dim, p.space_points);
    let h = p.driver.map(|h| h(t)).unwrap_or_else(|| vec![0.0; d * n]);
    let forcing = p.forcing.map(|f| f(t));
    let v: Vec<Vec<f64>> = modes.iter().map(|m| sp.to_grid(m)).collect();
    let dv: Vec<Vec<f64>> = modes.iter().map(|m| sp.ddx(m)).collect();
    let dh: Vec<Vec<f64>> = (0..d).map(|c| sp.ddx(&sp.to_modes(&h[c * n..(c + 1) * n]))).collect();
    let mut nonlinear = vec![vec![0.0; n]; d];
    let mut u = vec![0.0; d];
    for j in 0..n {
        for c in 0..d {
            u[c] = v[c][j] + h[c * n + j];
        }
        let fu = p.f.eval(&u);
        let gu = p.g.eval(&u);
        for c in 0..d {
            let mut acc = fu[c] + u[c];
            for e in 0..d {
                acc += gu[c * d + e] * (dv[e][j] + dh[e][j]);
            }
            if let Some(f) = &forcing {
                acc += f[c * n + j];
            }
            nonlinear[c][j] = acc;
        }
    }
    modes
        .iter()
        .zip(&nonlinear)
        .map(|(m, nl)| {
            let nl_modes = sp.to_modes(nl);
            (0..n)
                .map(|i| {
                    let forced = if sp.keep[i] { nl_modes[i] } else { Complex64::new(0.0, 0.0) };
                    -(1.0 + sp.k[i] * sp.k[i]) * m[i] + forced
                })
                .collect()
        })
        .collect()
}

fn axpy(a: &[Vec<Complex64>], s: f64, b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q * s).collect())
        .collect()
}

fn integrate(p: &ReferenceProblem<'_>, sp: &Spectral, substeps: usize) -> Vec<Vec<f64>> {
    let (d, n) = (p.dim, p.space_points);
    let h0 = p.driver.map(|h| h(0.0)).unwrap_or_else(|| vec![0.0; d * n]);
    let mut modes: Vec<Vec<Complex64>> = (0..d)
        .map(|c| {
            let v0: Vec<f64> = (0..n).map(|j| p.initial[c * n + j] - h0[c * n + j]).collect();
            sp.to_modes(&v0)
        })
        .collect();
    let total = p.output_steps * substeps;
    let dt = p.final_time / total as f64;
    let snapshot = |modes: &[Vec<Complex64>], t: f64| -> Vec<f64> {
        let h = p.driver.map(|h| h(t)).unwrap_or_else(|| vec![0.0; d * n]);
        let mut out = Vec::with_capacity(d * n);
        for (c, m) in modes.iter().enumerate() {
            out.extend(sp.to_grid(m).iter().enumerate().map(|(j, v)| v + h[c * n + j]));
        }
        out
    };
    let mut out = vec![p.initial.clone()];
    for step in 0..total {
        let t = step as f64 * dt;
        let k1 = rhs(p, sp, t, &modes);
        let k2 = rhs(p, sp, t + dt / 2.0, &axpy(&modes, dt / 2.0, &k1));
        let k3 = rhs(p, sp, t + dt / 2.0, &axpy(&modes, dt / 2.0, &k2));
        let k4 = rhs(p, sp, t + dt, &axpy(&modes, dt, &k3));
        for c in 0..d {
            for i in 0..n {
                modes[c][i] += dt / 6.0 * (k1[c][i] + 2.0 * k2[c][i] + 2.0 * k3[c][i] + k4[c][i]);
            }
        }
        if (step + 1) % substeps == 0 {
            let t = (step + 1) as f64 * dt;
            out.push(snapshot(&modes, t));
        }
    }
    out
}

/// Solves with `substeps` RK4 steps per output interval, and again with
/// twice as many for the error estimate. Refuses steps beyond the
/// stability limit and names the smallest admissible count.
pub fn classical_pde_reference(problem: &ReferenceProblem<'_>, substeps: usize) -> Result<ReferenceSolution> {
    let (d, n) = (problem.dim, problem.space_points);
    if problem.initial.len() != d * n || problem.output_steps == 0 || n < 4 {
        return Err(Error::Usage("reference problem has inconsistent sizes".into()));
    }
    if problem.f.input_dim() != d || problem.f.output_dim() != d || problem.g.input_dim() != d || problem.g.output_dim() != d * d {
        return Err(Error::DimensionMismatch("f or g has the wrong shape".into()));
    }
    let needed = stable_substeps(problem);
    if substeps < needed {
        return Err(Error::Usage(format!(
            "{substeps} steps per output interval violate the stability limit; use at least {needed}"
        )));
    }
    let sp = Spectral::new(n);
    let coarse = integrate(problem, &sp, substeps);
    let fine = integrate(problem, &sp, 2 * substeps);
    let error_estimate = coarse
        .iter()
        .flatten()
        .zip(fine.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let times = (0..=problem.output_steps)
        .map(|i| problem.final_time * i as f64 / problem.output_steps as f64)
        .collect();
    let mut inputs = problem.initial.clone();
    inputs.extend([problem.final_time, problem.output_steps as f64, substeps as f64]);
    Ok(ReferenceSolution {
        times,
        u: fine,
        error_estimate,
        substeps,
        digest: digest_inputs("classical_pde_reference", &inputs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn points(n: usize) -> Vec<f64> {
        (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
    }
    use crate::controlled::Activation;

    fn zero(d: usize) -> SmoothFunction {
        SmoothFunction::Constant {
            input_dim: d,
            value: vec![0.0; d],
        }
    }

    #[test]
    fn cancelled_reaction_is_the_shifted_heat_flow() {
        // f = -u and g = 0 leave ∂_t u = (∂² - 1)u
        let f = SmoothFunction::linear(vec![vec![-1.0]]);
        let g = zero(1);
        let n = 16;
        let xs = points(n);
        let p = ReferenceProblem {
            dim: 1,
            space_points: n,
            final_time: 0.5,
            output_steps: 2,
            f: &f,
            g: &g,
            initial: xs.iter().map(|x| x.sin() + 0.3 * (2.0 * x).cos()).collect(),
            driver: None,
            forcing: None,
        };
        let r = classical_pde_reference(&p, 64).unwrap();
        for (j, x) in xs.iter().enumerate() {
            let t: f64 = 0.5;
            let exact = (-2.0 * t).exp() * x.sin() + 0.3 * (-5.0 * t).exp() * (2.0 * x).cos();
            assert!((r.u[2][j] - exact).abs() < 1e-8);
        }
    }

    fn manufactured_error(substeps: usize) -> (f64, f64) {
        // u*(t, x) = e^{-t} sin x solves the equation with the forcing below
        let f = SmoothFunction::componentwise(Activation::Sin, 1, 0.3, 1.0);
        let g = SmoothFunction::componentwise(Activation::Tanh, 1, 0.5, 1.0);
        let n = 16;
        let xs = points(n);
        let exact = move |t: f64| -> Vec<f64> { xs.iter().map(|x| (-t).exp() * x.sin()).collect() };
        let xs2 = points(n);
        let forcing = move |t: f64| -> Vec<f64> {
            xs2.iter()
                .map(|x| {
                    let u = (-t).exp() * x.sin();
                    let ux = (-t).exp() * x.cos();
                    // ∂_t u - (∂² - 1)u = e^{-t} sin x
                    u - 0.3 * u.sin() - u - 0.5 * u.tanh() * ux
                })
                .collect()
        };
        let p = ReferenceProblem {
            dim: 1,
            space_points: n,
            final_time: 1.0,
            output_steps: 4,
            f: &f,
            g: &g,
            initial: exact(0.0),
            driver: None,
            forcing: Some(&forcing),
        };
        let r = classical_pde_reference(&p, substeps).unwrap();
        let err = r
            .u
            .iter()
            .zip(&r.times)
            .flat_map(|(u, t)| u.iter().zip(exact(*t)).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>())
            .fold(0.0, f64::max);
        (err, r.error_estimate)
    }

    #[test]
    fn manufactured_solution() {
        let (err, est) = manufactured_error(64);
        assert!(err < 1e-6, "{err}");
        assert!(est < 1e-6);
    }

    #[test]
    fn fourth_order_in_time() {
        let (e1, _) = manufactured_error(8);
        let (e2, _) = manufactured_error(16);
        let order = (e1 / e2).log2();
        assert!(order >= 3.0, "observed order {order}: {e1} {e2}");
    }

    #[test]
    fn refuses_unstable_steps() {
        let f = zero(1);
        let g = zero(1);
        let p = ReferenceProblem {
            dim: 1,
            space_points: 64,
            final_time: 1.0,
            output_steps: 4,
            f: &f,
            g: &g,
            initial: vec![0.0; 64],
            driver: None,
            forcing: None,
        };
        let msg = classical_pde_reference(&p, 1).unwrap_err().to_string();
        assert!(msg.contains(&stable_substeps(&p).to_string()), "{msg}");
    }
}

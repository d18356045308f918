//! Weak-form consistency of a computed solution against trigonometric test
//! functions.
//!
//! For `φ(x) = cos(kx + θ)` the weak form reads
//! `⟨v_t, φ⟩ = ⟨v_0, φ⟩ + ∫_0^t ⟨(∂²_x - 1)φ, v_s⟩ + ⟨φ, g(u_s) ∂_x v_s⟩
//! + ∫ φ g(u_s) dH_s + ⟨φ, f̂(u_s)⟩ ds`. Spatial pairings use the grid sum,
//! the rough term the same cell measure as the solver, and the time integral
//! the trapezoid rule.

use std::io::Write;

use serde::Serialize;

use super::config::SolverConfig;
use super::grid::PeriodicGrid;
use super::picard::rough_cell_terms;
use super::solution::SolutionField;
use crate::error::{Error, Result};
use crate::heat::HeatDriverSample;

/// Largest weak-form defect over time, per test mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeResidual {
    pub mode: usize,
    pub cos: f64,
    pub sin: f64,
}

/// Residuals for `cos kx` and `sin kx`, `k = 0..=modes`.
pub fn weak_residual(
    sol: &SolutionField,
    driver: &HeatDriverSample,
    config: &SolverConfig,
    modes: usize,
) -> Result<Vec<ModeResidual>> {
    (0..=modes)
        .map(|k| {
            Ok(ModeResidual {
                mode: k,
                cos: weak_residual_at_phase(sol, driver, config, k, 0.0)?,
                sin: if k == 0 {
                    0.0
                } else {
                    weak_residual_at_phase(sol, driver, config, k, -std::f64::consts::FRAC_PI_2)?
                },
            })
        })
        .collect()
}

/// Residual for `φ(x) = cos(kx + phase)`: the largest defect over time nodes
/// and components.
pub fn weak_residual_at_phase(
    sol: &SolutionField,
    driver: &HeatDriverSample,
    config: &SolverConfig,
    mode: usize,
    phase: f64,
) -> Result<f64> {
    let (d, nx) = (sol.dim(), sol.nx());
    if d != config.dim || nx != config.space_points {
        return Err(Error::DimensionMismatch("solution and configuration grids differ".into()));
    }
    let grid = PeriodicGrid::new(nx)?;
    let dx = grid.spacing();
    let k = mode as f64;
    let xs = grid.points();
    let phi: Vec<f64> = xs.iter().map(|x| (k * x + phase).cos()).collect();
    let phi_mid: Vec<f64> = xs.iter().map(|x| (k * (x + dx / 2.0) + phase).cos()).collect();
    let pair = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * dx;
    let v = sol.v();
    let all_times = config.times();
    let rough = driver.is_lifted();

    // per time node: ⟨v, φ⟩ and the integrand of the time integral
    let mut lhs = vec![vec![0.0; d]; sol.times().len()];
    let mut rate = vec![vec![0.0; d]; sol.times().len()];
    for (n, t) in sol.times().iter().enumerate() {
        let g_idx = all_times
            .iter()
            .position(|s| s == t)
            .ok_or_else(|| Error::Usage(format!("solution time {t} is off the configured grid")))?;
        let vs = v.time_slice(n);
        let us = sol.u().time_slice(n);
        let dv: Vec<Vec<f64>> = (0..d).map(|c| grid.derivative(v.slice(n, c))).collect();
        let mut transport = vec![vec![0.0; nx]; d];
        let mut reaction = vec![vec![0.0; nx]; d];
        let mut point = vec![0.0; d];
        for j in 0..nx {
            for c in 0..d {
                point[c] = us[c * nx + j];
            }
            let g = config.g.eval(&point);
            let f = config.f.eval(&point);
            for c in 0..d {
                transport[c][j] = (0..d).map(|e| g[c * d + e] * dv[e][j]).sum();
                reaction[c][j] = f[c] + point[c];
            }
        }
        let mu = if rough {
            let origin: Vec<f64> = (0..d).map(|c| driver.value(g_idx, c, 0)).collect();
            Some(rough_cell_terms(driver.lift_at(g_idx), vs, &origin, &config.g, nx)?)
        } else {
            None
        };
        for c in 0..d {
            let vc = &vs[c * nx..(c + 1) * nx];
            lhs[n][c] = pair(vc, &phi);
            let mut r = -(1.0 + k * k) * lhs[n][c] + pair(&transport[c], &phi) + pair(&reaction[c], &phi);
            if let Some(mu) = &mu {
                r += mu[c * nx..(c + 1) * nx].iter().zip(&phi_mid).map(|(m, p)| m * p).sum::<f64>();
            }
            rate[n][c] = r;
        }
    }
    let times = sol.times();
    let mut worst = 0.0f64;
    let mut integral = vec![0.0; d];
    for n in 1..times.len() {
        let h = times[n] - times[n - 1];
        for c in 0..d {
            integral[c] += 0.5 * h * (rate[n - 1][c] + rate[n][c]);
            worst = worst.max((lhs[n][c] - lhs[0][c] - integral[c]).abs());
        }
    }
    Ok(worst)
}

/// Rows `mode, cos, sin`.
pub fn write_residuals_csv<W: Write>(residuals: &[ModeResidual], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in residuals {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controlled::{Activation, SmoothFunction};
    use crate::heat::SpectralField;
    use crate::solver::solve_global;

    fn setup(steps: usize, nx: usize) -> (SolverConfig, HeatDriverSample, SolutionField) {
        let config = SolverConfig {
            time_steps: steps,
            space_points: nx,
            modes: 4,
            horizon: 0.5,
            g: SmoothFunction::componentwise(Activation::Tanh, 1, 0.3, 1.0),
            ..SolverConfig::default()
        };
        let driver = HeatDriverSample::zero(&config.times(), nx, 1).unwrap();
        let u0 = SpectralField::from_cos_sin(&[vec![0.1, 0.6, 0.2]], &[vec![0.0, 0.0, 0.3]]).unwrap();
        let sol = solve_global(&u0, &driver, &config).unwrap();
        (config, driver, sol)
    }

    #[test]
    fn zero_solution_has_zero_residual() {
        let config = SolverConfig {
            time_steps: 8,
            space_points: 16,
            modes: 4,
            g: SmoothFunction::Constant {
                input_dim: 1,
                value: vec![0.0],
            },
            ..SolverConfig::default()
        };
        let driver = HeatDriverSample::zero(&config.times(), 16, 1).unwrap();
        let sol = solve_global(&SpectralField::zeros(1, 4), &driver, &config).unwrap();
        for r in weak_residual(&sol, &driver, &config, 3).unwrap() {
            assert_eq!(r.cos, 0.0);
            assert_eq!(r.sin, 0.0);
        }
    }

    #[test]
    fn residual_small_and_decreasing() {
        let (c1, d1, s1) = setup(32, 32);
        let (c2, d2, s2) = setup(64, 32);
        let r1 = weak_residual(&s1, &d1, &c1, 3).unwrap();
        let r2 = weak_residual(&s2, &d2, &c2, 3).unwrap();
        for (a, b) in r1.iter().zip(&r2) {
            assert!(b.cos < 1e-3 && b.sin < 1e-3, "{b:?}");
            assert!(b.cos <= a.cos && b.sin <= a.sin, "{a:?} {b:?}");
        }
    }

    #[test]
    fn residual_is_periodic_in_phase() {
        let (c, d, s) = setup(16, 32);
        let a = weak_residual_at_phase(&s, &d, &c, 2, 0.3).unwrap();
        let b = weak_residual_at_phase(&s, &d, &c, 2, 0.3 + 2.0 * std::f64::consts::PI).unwrap();
        assert!((a - b).abs() < 1e-12 * (1.0 + a));
    }
}

use serde::{Deserialize, Serialize};

use crate::controlled::{Activation, SmoothFunction};
use crate::error::{Error, Result};
use crate::heat::{sample_stationary_heat, HeatDriverSample};
use crate::rough_path::GridPath;

/// Time discretisation of the Duhamel integral.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeQuadrature {
    /// Forcing interpolated linearly in time, exponential integrated exactly.
    #[default]
    ExponentialTrapezoid,
    /// Forcing frozen at the left endpoint of each step.
    LeftEndpoint,
}

/// Parameters of `du = (∂²_x u + f(u) + g(u) ∂_x u) dt + η dW` on
/// `[0, final_time] × [0, 2π)`, written with the shifted semigroup of
/// `∂²_x - 1` and `f̂(u) = f(u) + u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Dimension `d` of `u`.
    pub dim: usize,
    /// Regularity of the initial condition, in `(0, 1/2)`.
    pub beta: f64,
    /// Hölder exponent of the driver lift, in `(1/(N+1), beta)`.
    pub alpha: f64,
    /// Noise amplitude.
    pub eta: f64,
    pub time_steps: usize,
    pub space_points: usize,
    /// Fourier cutoff `K` of the driver.
    pub modes: usize,
    pub final_time: f64,
    /// Longest local horizon tried by the Picard iteration.
    pub horizon: f64,
    /// Stop when `‖w_{n+1} - w_n‖_{1,T}` drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Largest accepted successive-difference ratio.
    pub contraction_target: f64,
    pub quadrature: TimeQuadrature,
    /// `f: R^d → R^d`.
    pub f: SmoothFunction,
    /// `g: R^d → R^{d×d}`, row-major.
    pub g: SmoothFunction,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dim: 1,
            beta: 0.45,
            alpha: 0.4,
            eta: 0.0,
            time_steps: 128,
            space_points: 128,
            modes: 32,
            final_time: 1.0,
            horizon: 1.0,
            tolerance: 1e-10,
            max_iterations: 60,
            contraction_target: 0.5,
            quadrature: TimeQuadrature::ExponentialTrapezoid,
            f: SmoothFunction::Constant {
                input_dim: 1,
                value: vec![0.0],
            },
            g: SmoothFunction::componentwise(Activation::Tanh, 1, 0.2, 1.0),
            seed: 0,
        }
    }
}

impl SolverConfig {
    /// `N = ⌊1/β⌋`, the depth of the driver lift.
    pub fn depth(&self) -> usize {
        (1.0 / self.beta).floor() as usize
    }

    pub fn time_step(&self) -> f64 {
        self.final_time / self.time_steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        GridPath::uniform_times(0.0, self.final_time, self.time_steps)
    }

    /// Horizon in whole time steps, at least one.
    pub fn horizon_steps(&self) -> usize {
        ((self.horizon / self.time_step()).round() as usize).clamp(1, self.time_steps)
    }

    /// Checks every parameter invariant; the message names the one violated.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.dim == 0 {
            return bad("dim must be at least 1".into());
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return bad(format!("beta = {} violates 0 < beta < 1/2", self.beta));
        }
        let n = self.depth();
        let lower = 1.0 / (n as f64 + 1.0);
        if !(self.alpha > lower && self.alpha < self.beta) {
            return bad(format!(
                "alpha = {} violates 1/(N+1) = {lower:.6} < alpha < beta = {} with N = {n}",
                self.alpha, self.beta
            ));
        }
        if !(2.0 * self.alpha - self.beta > 0.0) {
            return bad(format!("2 alpha - beta = {} must be positive", 2.0 * self.alpha - self.beta));
        }
        if crate::tensor::check_shape(self.dim, n).is_err() {
            return bad(format!("depth {n} in dimension {} exceeds the tensor limits", self.dim));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return bad(format!("eta = {} must be non-negative", self.eta));
        }
        if self.time_steps == 0 {
            return bad("time_steps must be at least 1".into());
        }
        if self.space_points < 8 {
            return bad(format!("space_points = {} must be at least 8", self.space_points));
        }
        if self.eta > 0.0 && self.space_points < 64 {
            return bad(format!(
                "space_points = {} must be at least 64 to lift a noisy driver",
                self.space_points
            ));
        }
        if self.modes == 0 || 2 * self.modes >= self.space_points {
            return bad(format!(
                "modes = {} must satisfy 1 <= modes < space_points / 2",
                self.modes
            ));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return bad(format!("final_time = {} must be positive", self.final_time));
        }
        if !(self.horizon > 0.0 && self.horizon <= 1.0) {
            return bad(format!("horizon = {} violates 0 < T <= 1", self.horizon));
        }
        if !(self.tolerance > 0.0) {
            return bad(format!("tolerance = {} must be positive", self.tolerance));
        }
        if self.max_iterations < 3 {
            return bad("max_iterations must be at least 3".into());
        }
        if !(self.contraction_target > 0.0 && self.contraction_target < 1.0) {
            return bad(format!(
                "contraction_target = {} must lie in (0, 1)",
                self.contraction_target
            ));
        }
        let d = self.dim;
        self.f.validate().or_else(|e| bad(format!("f: {e}")))?;
        self.g.validate().or_else(|e| bad(format!("g: {e}")))?;
        if self.f.input_dim() != d || self.f.output_dim() != d {
            return bad(format!(
                "f maps R^{} to R^{}, expected R^{d} to R^{d}",
                self.f.input_dim(),
                self.f.output_dim()
            ));
        }
        if self.g.input_dim() != d || self.g.output_dim() != d * d {
            return bad(format!(
                "g maps R^{} to R^{}, expected R^{d} to R^{}",
                self.g.input_dim(),
                self.g.output_dim(),
                d * d
            ));
        }
        Ok(())
    }

    /// Samples the stationary driver on the solver grid and lifts it when
    /// `eta > 0`.
    pub fn sample_driver(&self) -> Result<HeatDriverSample> {
        self.validate()?;
        let mut driver = sample_stationary_heat(
            self.seed,
            self.modes,
            self.eta,
            self.dim,
            &self.times(),
            self.space_points,
        )?;
        if self.eta > 0.0 {
            driver.lift(self.depth(), self.alpha)?;
        }
        Ok(driver)
    }
}

//! Uniform periodic grids `x_j = 2πj/n` and FFT-based spectral operations.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// FFT plans and wavenumbers for one grid size.
#[derive(Clone)]
pub struct PeriodicGrid {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicGrid").field("n", &self.n).finish()
    }
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::Usage(format!("periodic grid needs at least 4 points, got {n}")));
        }
        let mut planner = FftPlanner::new();
        Ok(PeriodicGrid {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.spacing() * j as f64).collect()
    }

    /// Signed wavenumber of FFT index `i`; the Nyquist index maps to `+n/2`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        if 2 * i <= self.n {
            i as f64
        } else {
            i as f64 - self.n as f64
        }
    }

    /// Two-thirds dealiasing rule: modes with `|k| <= n/3` survive.
    pub fn keeps(&self, i: usize) -> bool {
        3.0 * self.wavenumber(i).abs() <= self.n as f64
    }

    /// Coefficients `c_k` with `values_j = Σ_k c_k e^{ikx_j}`.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.n);
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Unnormalised transform `Σ_j v_j e^{-ikx_j}`.
    pub fn forward_sum(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Real part of `Σ_k c_k e^{ikx_j}`.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.n);
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    /// Zeroes the modes removed by the dealiasing rule.
    pub fn filter(&self, coeffs: &mut [Complex64]) {
        for (i, c) in coeffs.iter_mut().enumerate() {
            if !self.keeps(i) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Dealiased spectral derivative of coefficients.
    pub fn derivative_coeffs(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if self.keeps(i) {
                    c * Complex64::new(0.0, self.wavenumber(i))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    }

    /// Dealiased spectral derivative of grid values.
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        self.inverse(&self.derivative_coeffs(&self.forward(values)))
    }
}

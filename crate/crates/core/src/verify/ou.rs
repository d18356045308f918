//! Stationary variances of the Ornstein–Uhlenbeck mode equations
//! `da = -(1 + k²) a dt + η dB`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{digest_inputs, OracleResult};

/// `η² / (2(1 + k²))` for `k = 0..=k_max`.
pub fn ou_variance_oracle(k_max: usize, eta: f64) -> OracleResult {
    let values: Vec<f64> = (0..=k_max)
        .map(|k| eta * eta / (2.0 * (1.0 + (k * k) as f64)))
        .collect();
    let error_estimate = values.iter().fold(0.0f64, |m, v| m.max(v.abs())) * f64::EPSILON;
    OracleResult {
        name: "ou_variance".into(),
        values,
        error_estimate,
        digest: digest_inputs("ou_variance", &[k_max as f64, eta]),
    }
}

/// Mean, variance and the standard error of the variance of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VarianceEstimate {
    pub mean: f64,
    pub variance: f64,
    pub standard_error: f64,
}

pub fn sample_variance(samples: &[f64]) -> VarianceEstimate {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    VarianceEstimate {
        mean,
        variance: m2 * n / (n - 1.0),
        standard_error: ((m4 - m2 * m2) / n).max(0.0).sqrt(),
    }
}

/// Simulates `samples` independent OU paths from 0 with the exact Gaussian
/// transition over steps of `dt` until time `horizon`, and returns the
/// sample variance of the endpoints. The per-step variance
/// `η² ∫_0^dt e^{-2 rate s} ds` is computed by Simpson's rule.
pub fn ou_transition_variance(rate: f64, eta: f64, dt: f64, horizon: f64, samples: usize, seed: u64) -> VarianceEstimate {
    let n = 2000;
    let h = dt / n as f64;
    let kernel = |s: f64| (-2.0 * rate * s).exp();
    let simpson = (0..n)
        .map(|i| {
            let a = i as f64 * h;
            (kernel(a) + 4.0 * kernel(a + h / 2.0) + kernel(a + h)) * h / 6.0
        })
        .sum::<f64>();
    let sd = eta * simpson.sqrt();
    let decay = (-rate * dt).exp();
    let steps = (horizon / dt).ceil() as usize;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let ends: Vec<f64> = (0..samples)
        .map(|_| {
            let mut a = 0.0;
            for _ in 0..steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                a = decay * a + sd * z;
            }
            a
        })
        .collect();
    sample_variance(&ends)
}

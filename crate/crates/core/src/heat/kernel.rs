//! The 2π-periodic Gaussian kernel and its spatial derivative.
//!
//! `p_t(x) = Σ_n (2πt)^{-1/2} exp(-(x - 2πn)² / (2t))`, whose Fourier
//! coefficients are `e^{-k²t/2} / 2π`. The derivative admits the scaling form
//! `∂_x p_t(x) = f_t(x/√t) / t` with
//! `f_t(y) = -(2π)^{-1/2} Σ_n (y - 2πn/√t) exp(-(y - 2πn/√t)² / 2)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integral::ScaledFunction;

const TWO_PI: f64 = 2.0 * PI;

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Usage(format!("kernel time must be positive, got {t}")));
    }
    Ok(())
}

/// Number of images on each side: `ceil(8√t / 2π) + 2`.
pub fn image_count(t: f64) -> i64 {
    (8.0 * t.sqrt() / TWO_PI).ceil() as i64 + 2
}

/// `term(0) + Σ_{k=1}^{n} (term(k) + term(-k))`; pairing mirror images keeps
/// odd sums exactly zero at the origin.
fn image_sum<F: Fn(i64) -> f64>(n: i64, term: F) -> f64 {
    (1..=n).fold(term(0), |acc, k| acc + (term(k) + term(-k)))
}

/// Representative of `x` in `[-π, π)`.
pub fn wrap(x: f64) -> f64 {
    x - TWO_PI * ((x + PI) / TWO_PI).floor()
}

pub fn heat_kernel(t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    let x = wrap(x);
    let n = image_count(t);
    let norm = (TWO_PI * t).sqrt().recip();
    Ok(image_sum(n, |k| {
        let y = x - TWO_PI * k as f64;
        norm * (-y * y / (2.0 * t)).exp()
    }))
}

/// The same kernel from its Fourier series with `|k| <= modes`.
pub fn heat_kernel_spectral(t: f64, x: f64, modes: usize) -> Result<f64> {
    check_time(t)?;
    let series: f64 = (1..=modes)
        .map(|k| {
            let k = k as f64;
            2.0 * (-k * k * t / 2.0).exp() * (k * x).cos()
        })
        .sum();
    Ok((1.0 + series) / TWO_PI)
}

/// `∂_x p_t(x)` from the image sum.
pub fn dx_heat_kernel(t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    let x = wrap(x);
    let n = image_count(t);
    let norm = (TWO_PI * t).sqrt().recip();
    Ok(image_sum(n, |k| {
        let y = x - TWO_PI * k as f64;
        -y / t * norm * (-y * y / (2.0 * t)).exp()
    }))
}

/// `f_t(y)`.
pub fn derivative_profile(t: f64, y: f64) -> Result<f64> {
    profile_terms(t, y).map(|(f, _)| f)
}

/// `(f_t(y), f_t'(y))`.
fn profile_terms(t: f64, y: f64) -> Result<(f64, f64)> {
    check_time(t)?;
    let period = TWO_PI / t.sqrt();
    let y = y - period * (y / period + 0.5).floor();
    let n = image_count(t);
    let c = (TWO_PI).sqrt().recip();
    let (mut f, mut df) = (0.0, 0.0);
    for k in -n..=n {
        let z = y - period * k as f64;
        let g = (-0.5 * z * z).exp();
        f -= c * z * g;
        df -= c * (1.0 - z * z) * g;
    }
    Ok((f, df))
}

/// `∂_x p_t(x)` through the scaling form `f_t(x/√t) / t`.
pub fn dx_heat_kernel_scaled(t: f64, x: f64) -> Result<f64> {
    Ok(derivative_profile(t, x / t.sqrt())? / t)
}

/// `f_t` as a scaled function. `f_t` is periodic with period `2π/√t`, so its
/// `‖·‖_{1,1}` is taken over one period `[-π/√t, π/√t]`.
pub fn derivative_profile_function(t: f64) -> Result<ScaledFunction> {
    check_time(t)?;
    let half = PI / t.sqrt();
    Ok(ScaledFunction::new(
        "heat_derivative_profile",
        move |y| profile_terms(t, y).map(|p| p.0).unwrap_or(f64::NAN),
        move |y| profile_terms(t, y).map(|p| p.1).unwrap_or(f64::NAN),
    )
    .with_window(-half, half))
}

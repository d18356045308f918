//! Grid-restricted Hölder seminorms and log-log slope fits.
//!
//! The continuum seminorm `sup_{s<t} |x_t - x_s| / |t - s|^γ` is replaced by
//! its supremum over pairs of grid points, which can only underestimate it.

use rayon::prelude::*;

/// `sup_{i<j} dist(i, j) / (t_j - t_i)^exponent` over all pairs of grid indices.
///
/// `dist` must be a pure function; pairs are visited in parallel.
pub fn pair_sup<F>(times: &[f64], exponent: f64, dist: F) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let n = times.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for j in i + 1..n {
                let gap = times[j] - times[i];
                best = best.max(dist(i, j) / gap.powf(exponent));
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Hölder seminorm of a vector-valued grid path, Euclidean norm on values.
pub fn path_seminorm(times: &[f64], values: &[Vec<f64>], exponent: f64) -> f64 {
    pair_sup(times, exponent, |i, j| euclidean_distance(&values[i], &values[j]))
}

/// Hölder seminorm of a scalar grid path.
pub fn scalar_seminorm(times: &[f64], values: &[f64], exponent: f64) -> f64 {
    pair_sup(times, exponent, |i, j| (values[j] - values[i]).abs())
}

/// `sup |x| + [x]_γ` for a scalar grid path.
pub fn scalar_norm(times: &[f64], values: &[f64], exponent: f64) -> f64 {
    let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    sup + scalar_seminorm(times, values, exponent)
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn euclidean_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Least-squares line through `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

impl LineFit {
    pub fn residual(&self, x: f64, y: f64) -> f64 {
        y - (self.intercept + self.slope * x)
    }
}

/// Ordinary least squares; `None` with fewer than two distinct abscissae.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs[..n].iter().zip(&ys[..n]) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Slope of `log y` against `log x`, skipping non-positive entries.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    fit_line(&lx, &ly)
}

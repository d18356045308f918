//! Samples of the stationary solution of `dh = (∂²_x - 1)h dt + η dW` and
//! their spatial rough-path lifts.
//!
//! Each component is `h_t(x) = Σ_{k=0}^{K} a_k(t) cos kx + b_k(t) sin kx`
//! with independent Ornstein–Uhlenbeck amplitudes of rate `1 + k²` and
//! stationary variance `η² / (2(1 + k²))` (no `b_0`). Amplitudes are
//! advanced with the exact Gaussian transition. Every `(component, mode,
//! cos/sin)` triple owns a random stream, so raising `K` adds modes without
//! changing the existing ones.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::spectral::SpectralField;
use crate::error::{Error, Result};
use crate::holder;
use crate::rough_path::{signature_lift, GridPath, RoughPathGrid};
use crate::sampling::{standard_normal, stream_rng};

/// Stationary variance of one OU amplitude of wavenumber `k`.
pub fn mode_variance(k: usize, eta: f64) -> f64 {
    eta * eta / (2.0 * (1.0 + (k * k) as f64))
}

fn stream_id(component: usize, k: usize, sine: bool) -> u64 {
    ((component as u64) << 40) | ((k as u64) << 1) | sine as u64
}

/// OU amplitudes of one `(component, mode, cos/sin)` triple over `times`.
fn amplitude_path(seed: u64, component: usize, k: usize, sine: bool, eta: f64, times: &[f64]) -> Vec<f64> {
    let var = mode_variance(k, eta);
    let rate = 1.0 + (k * k) as f64;
    let mut rng = stream_rng(seed, stream_id(component, k, sine));
    let mut out = Vec::with_capacity(times.len());
    let mut a = var.sqrt() * standard_normal(&mut rng);
    out.push(a);
    for w in times.windows(2) {
        let decay = (-rate * (w[1] - w[0])).exp();
        let sd = (var * (1.0 - decay * decay)).sqrt();
        a = decay * a + sd * standard_normal(&mut rng);
        out.push(a);
    }
    out
}

/// The stationary field at the first sample time, as a spectral field.
pub fn stationary_field(seed: u64, k_max: usize, eta: f64, dim: usize) -> SpectralField {
    let a: Vec<Vec<f64>> = (0..dim)
        .map(|c| (0..=k_max).map(|k| amplitude_path(seed, c, k, false, eta, &[0.0])[0]).collect())
        .collect();
    let b: Vec<Vec<f64>> = (0..dim)
        .map(|c| {
            (0..=k_max)
                .map(|k| if k == 0 { 0.0 } else { amplitude_path(seed, c, k, true, eta, &[0.0])[0] })
                .collect()
        })
        .collect();
    SpectralField::from_cos_sin(&a, &b).expect("consistent amplitude rows")
}

/// Grid samples of a driver field `H_t(x)` with optional per-slice lifts.
#[derive(Clone, Debug)]
pub struct HeatDriverSample {
    times: Vec<f64>,
    n_x: usize,
    dim: usize,
    eta: f64,
    seed: u64,
    k_max: usize,
    /// `[time][component][x index]`, `n_x` points per period.
    values: Vec<f64>,
    lifts: Vec<RoughPathGrid>,
}

/// Lift norms of one time slice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SliceNorm {
    pub time: f64,
    pub sup: f64,
    pub hoelder: f64,
}

fn check_grid(times: &[f64], n_x: usize) -> Result<()> {
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("driver times must be nonempty and increasing".into()));
    }
    if n_x < 2 {
        return Err(Error::Usage("spatial grid needs at least two points".into()));
    }
    Ok(())
}

/// Spatial points `x_j = 2πj / n_x` for `j = 0..=n_x`.
pub fn spatial_grid(n_x: usize) -> Vec<f64> {
    (0..=n_x)
        .map(|j| if j == n_x { 2.0 * PI } else { 2.0 * PI * j as f64 / n_x as f64 })
        .collect()
}

/// Simulates the stationary solution on `times × {2πj/n_x}`. Identical
/// arguments give bitwise-identical samples.
pub fn sample_stationary_heat(
    seed: u64,
    k_max: usize,
    eta: f64,
    dim: usize,
    times: &[f64],
    n_x: usize,
) -> Result<HeatDriverSample> {
    check_grid(times, n_x)?;
    if k_max == 0 {
        return Err(Error::Usage("at least one Fourier mode is required".into()));
    }
    if !(eta >= 0.0) {
        return Err(Error::Usage(format!("noise amplitude must be non-negative, got {eta}")));
    }
    let nt = times.len();
    // amplitudes[c][k] = (cos path, sin path)
    let amplitudes: Vec<Vec<(Vec<f64>, Vec<f64>)>> = (0..dim)
        .map(|c| {
            (0..=k_max)
                .into_par_iter()
                .map(|k| {
                    let a = amplitude_path(seed, c, k, false, eta, times);
                    let b = if k == 0 {
                        vec![0.0; nt]
                    } else {
                        amplitude_path(seed, c, k, true, eta, times)
                    };
                    (a, b)
                })
                .collect()
        })
        .collect();
    let cos_table: Vec<f64> = (0..n_x).map(|j| (2.0 * PI * j as f64 / n_x as f64).cos()).collect();
    let sin_table: Vec<f64> = (0..n_x).map(|j| (2.0 * PI * j as f64 / n_x as f64).sin()).collect();
    let values: Vec<f64> = (0..nt)
        .into_par_iter()
        .flat_map_iter(|n| {
            let mut slice = vec![0.0; dim * n_x];
            for c in 0..dim {
                for (k, (a, b)) in amplitudes[c].iter().enumerate() {
                    let (ak, bk) = (a[n], b[n]);
                    if ak == 0.0 && bk == 0.0 {
                        continue;
                    }
                    for j in 0..n_x {
                        let idx = (k * j) % n_x;
                        slice[c * n_x + j] += ak * cos_table[idx] + bk * sin_table[idx];
                    }
                }
            }
            slice
        })
        .collect();
    Ok(HeatDriverSample {
        times: times.to_vec(),
        n_x,
        dim,
        eta,
        seed,
        k_max,
        values,
        lifts: Vec::new(),
    })
}

impl HeatDriverSample {
    /// A driver given by an explicit field `h(t, x) ∈ R^dim`.
    pub fn from_field<F>(times: &[f64], n_x: usize, dim: usize, h: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Vec<f64> + Sync,
    {
        check_grid(times, n_x)?;
        let xs = spatial_grid(n_x);
        let values = times
            .par_iter()
            .flat_map_iter(|&t| {
                let mut slice = vec![0.0; dim * n_x];
                for (j, &x) in xs[..n_x].iter().enumerate() {
                    let v = h(t, x);
                    for c in 0..dim {
                        slice[c * n_x + j] = v[c];
                    }
                }
                slice
            })
            .collect();
        Ok(HeatDriverSample {
            times: times.to_vec(),
            n_x,
            dim,
            eta: 0.0,
            seed: 0,
            k_max: 0,
            values,
            lifts: Vec::new(),
        })
    }

    /// The zero driver.
    pub fn zero(times: &[f64], n_x: usize, dim: usize) -> Result<Self> {
        Self::from_field(times, n_x, dim, |_, _| vec![0.0; dim])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Values of component `c` at time index `n`, one per spatial point.
    pub fn slice(&self, n: usize, c: usize) -> &[f64] {
        let start = (n * self.dim + c) * self.n_x;
        &self.values[start..start + self.n_x]
    }

    pub fn value(&self, n: usize, c: usize, j: usize) -> f64 {
        self.slice(n, c)[j % self.n_x]
    }

    /// `x ↦ H_{t_n}(x)` on `[0, 2π]`, closing the loop at `x = 2π`.
    pub fn spatial_path(&self, n: usize) -> Result<GridPath> {
        let xs = spatial_grid(self.n_x);
        let values = (0..=self.n_x)
            .map(|j| (0..self.dim).map(|c| self.value(n, c, j)).collect())
            .collect();
        GridPath::new(xs, values)
    }

    /// Signature-lifts every time slice of the spatial path.
    pub fn lift(&mut self, depth: usize, alpha: f64) -> Result<()> {
        if self.n_x < 64 {
            return Err(Error::Usage(format!(
                "lifting needs at least 64 spatial points, got {}",
                self.n_x
            )));
        }
        self.lifts = (0..self.times.len())
            .into_par_iter()
            .map(|n| signature_lift(&self.spatial_path(n)?, depth, alpha))
            .collect::<Result<Vec<_>>>()?;
        Ok(())
    }

    pub fn is_lifted(&self) -> bool {
        !self.lifts.is_empty()
    }

    /// The lift of time slice `n`; panics if [`HeatDriverSample::lift`] has
    /// not run.
    pub fn lift_at(&self, n: usize) -> &RoughPathGrid {
        &self.lifts[n]
    }

    /// `sup_x |H_t|` and `‖Ha_t‖_α` per slice.
    pub fn slice_norms(&self) -> Result<Vec<SliceNorm>> {
        if !self.is_lifted() {
            return Err(Error::Usage("driver has not been lifted".into()));
        }
        Ok((0..self.times.len())
            .into_par_iter()
            .map(|n| {
                let sup = (0..self.n_x)
                    .map(|j| {
                        holder::euclidean_norm(
                            &(0..self.dim).map(|c| self.value(n, c, j)).collect::<Vec<_>>(),
                        )
                    })
                    .fold(0.0, f64::max);
                SliceNorm {
                    time: self.times[n],
                    sup,
                    hoelder: self.lifts[n].hoelder_norm().total,
                }
            })
            .collect())
    }

    /// `sup_t (‖H_t‖_∞ + ‖Ha_t‖_α)`.
    pub fn driver_norm(&self) -> Result<f64> {
        Ok(self
            .slice_norms()?
            .iter()
            .map(|s| s.sup + s.hoelder)
            .fold(0.0, f64::max))
    }

    /// Rows `t, x, h1, …, hd`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string(), "x".to_string()];
        header.extend((1..=self.dim).map(|c| format!("h{c}")));
        w.write_record(&header)?;
        let xs = spatial_grid(self.n_x);
        for (n, t) in self.times.iter().enumerate() {
            for (j, x) in xs[..self.n_x].iter().enumerate() {
                let mut row = vec![t.to_string(), x.to_string()];
                row.extend((0..self.dim).map(|c| self.value(n, c, j).to_string()));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes `t, sup, hoelder` rows.
pub fn write_slice_norms_csv<W: Write>(norms: &[SliceNorm], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "sup", "hoelder"])?;
    for s in norms {
        w.write_record([s.time.to_string(), s.sup.to_string(), s.hoelder.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_gives_zero_field() {
        let s = sample_stationary_heat(1, 8, 0.0, 1, &[0.0, 0.5, 1.0], 16).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_field_lifts_to_unit() {
        let mut s = HeatDriverSample::zero(&[0.0, 1.0], 64, 2).unwrap();
        s.lift(2, 0.4).unwrap();
        let x = s.lift_at(1);
        assert!(x.elements().iter().all(|e| e.level(1).iter().chain(e.level(2)).all(|&v| v == 0.0)));
        assert_eq!(s.driver_norm().unwrap(), 0.0);
    }

    #[test]
    fn seeded_samples_are_bitwise_reproducible() {
        let times = [0.0, 0.25, 0.5];
        let a = sample_stationary_heat(42, 16, 0.1, 2, &times, 64).unwrap();
        let b = sample_stationary_heat(42, 16, 0.1, 2, &times, 64).unwrap();
        let c = sample_stationary_heat(43, 16, 0.1, 2, &times, 64).unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn modes_are_nested_in_the_cutoff() {
        let times = [0.0, 0.1];
        let small = stationary_field(5, 4, 1.0, 1);
        let large = stationary_field(5, 8, 1.0, 1);
        for k in -4..=4 {
            assert_eq!(small.coefficient(0, k), large.coefficient(0, k));
        }
        let s = sample_stationary_heat(5, 4, 1.0, 1, &times, 32).unwrap();
        for j in 0..32 {
            let x = 2.0 * PI * j as f64 / 32.0;
            assert!((s.value(0, 0, j) - small.eval(0, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_amplitude_scales_linearly() {
        let times = [0.0, 0.3];
        let a = sample_stationary_heat(9, 8, 0.1, 1, &times, 16).unwrap();
        let b = sample_stationary_heat(9, 8, 0.05, 1, &times, 16).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - 2.0 * y).abs() < 1e-15);
        }
    }

    #[test]
    fn lifts_satisfy_algebraic_relations() {
        let mut s = sample_stationary_heat(3, 32, 1.0, 2, &[0.0, 0.5], 64).unwrap();
        s.lift(3, 0.3).unwrap();
        for n in 0..2 {
            let x = s.lift_at(n);
            assert!(x.check_chen(1e-10).passed);
            assert!(x.check_shuffle(1e-10, 50, 1).passed);
        }
        assert!(s.driver_norm().unwrap() > 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(sample_stationary_heat(1, 0, 1.0, 1, &[0.0], 16).is_err());
        assert!(sample_stationary_heat(1, 4, 1.0, 1, &[0.0, 0.0], 16).is_err());
        let mut s = HeatDriverSample::zero(&[0.0], 32, 1).unwrap();
        assert!(s.lift(2, 0.4).is_err());
        assert!(s.slice_norms().is_err());
    }
}

//! Periodic fields as truncated Fourier series and the heat semigroup.
//!
//! A [`SpectralField`] holds, per component, coefficients `c_k` for
//! `|k| <= K` with the field `Σ_k c_k e^{ikx}` on `[0, 2π]`. The semigroup
//! is the one generated by `∂²_x`, acting by `e^{-k²t}` on mode `k`; its
//! convolution kernel is `p_{2t}` in the normalisation of
//! [`heat_kernel`](super::kernel::heat_kernel). The shifted variant
//! generated by `∂²_x - 1` multiplies by an extra `e^{-t}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which generator the semigroup comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemigroupKind {
    /// `∂²_x`.
    Heat,
    /// `∂²_x - 1`.
    Shifted,
}

impl SemigroupKind {
    /// Decay rate of mode `k`.
    pub fn rate(self, k: f64) -> f64 {
        match self {
            SemigroupKind::Heat => k * k,
            SemigroupKind::Shifted => 1.0 + k * k,
        }
    }

    pub fn symbol(self, k: f64, t: f64) -> f64 {
        (-self.rate(k) * t).exp()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    k_max: usize,
    coeffs: Vec<Vec<Complex64>>,
}

impl SpectralField {
    pub fn zeros(dim: usize, k_max: usize) -> Self {
        SpectralField {
            k_max,
            coeffs: vec![vec![Complex64::new(0.0, 0.0); 2 * k_max + 1]; dim],
        }
    }

    /// The constant field with the given component values.
    pub fn constant(values: &[f64], k_max: usize) -> Self {
        let mut f = Self::zeros(values.len(), k_max);
        for (c, v) in values.iter().enumerate() {
            f.coeffs[c][k_max] = Complex64::new(*v, 0.0);
        }
        f
    }

    /// `c_k` per component, index `k + K`. Each row must have `2K + 1`
    /// entries and be Hermitian.
    pub fn from_coefficients(coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        let len = coeffs.first().map_or(0, Vec::len);
        if len % 2 == 0 || coeffs.iter().any(|c| c.len() != len) {
            return Err(Error::DimensionMismatch(
                "coefficient rows must share an odd length 2K+1".into(),
            ));
        }
        let f = SpectralField {
            k_max: len / 2,
            coeffs,
        };
        if !f.is_hermitian(1e-12) {
            return Err(Error::Usage("coefficients do not describe a real field".into()));
        }
        Ok(f)
    }

    /// From real cosine and sine amplitudes `a_k, b_k` (`k = 0..=K`) of
    /// `Σ_k a_k cos kx + b_k sin kx`; `b_0` is ignored.
    pub fn from_cos_sin(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::DimensionMismatch("cosine and sine rows differ".into()));
        }
        let k_max = a[0].len() - 1;
        let mut f = Self::zeros(a.len(), k_max);
        for (c, (ac, bc)) in a.iter().zip(b).enumerate() {
            if ac.len() != k_max + 1 || bc.len() != k_max + 1 {
                return Err(Error::DimensionMismatch("amplitude rows of unequal length".into()));
            }
            f.coeffs[c][k_max] = Complex64::new(ac[0], 0.0);
            for k in 1..=k_max {
                let z = Complex64::new(ac[k] / 2.0, -bc[k] / 2.0);
                f.coeffs[c][k_max + k] = z;
                f.coeffs[c][k_max - k] = z.conj();
            }
        }
        Ok(f)
    }

    /// Interpolates `f` from `4K + 4` equispaced samples (discrete Fourier
    /// transform, modes `|k| <= K` kept).
    pub fn from_fn<F: Fn(f64) -> Vec<f64>>(dim: usize, k_max: usize, f: F) -> Result<Self> {
        let n = 4 * k_max + 4;
        let samples: Vec<Vec<f64>> = (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect();
        if samples.iter().any(|s| s.len() != dim) {
            return Err(Error::DimensionMismatch("sampled values of the wrong dimension".into()));
        }
        let per_comp: Vec<Vec<f64>> = (0..dim)
            .map(|c| samples.iter().map(|s| s[c]).collect())
            .collect();
        Self::from_samples(&per_comp, k_max)
    }

    /// Fourier coefficients `|k| <= K` of uniformly sampled periodic data
    /// (one row per component, `n > 2K` samples at `x_j = 2πj/n`).
    pub fn from_samples(rows: &[Vec<f64>], k_max: usize) -> Result<Self> {
        let mut f = Self::zeros(rows.len(), k_max);
        for (c, row) in rows.iter().enumerate() {
            let n = row.len();
            if n <= 2 * k_max {
                return Err(Error::Usage(format!(
                    "{n} samples cannot resolve {k_max} modes"
                )));
            }
            for k in 0..=k_max {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, v) in row.iter().enumerate() {
                    let theta = -2.0 * PI * (k * j % n) as f64 / n as f64;
                    acc += Complex64::from_polar(*v, theta);
                }
                let ck = acc / n as f64;
                f.coeffs[c][k_max + k] = ck;
                f.coeffs[c][k_max - k] = ck.conj();
            }
            f.coeffs[c][k_max].im = 0.0;
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `c_k` of component `c`.
    pub fn coefficient(&self, c: usize, k: i64) -> Complex64 {
        let idx = k + self.k_max as i64;
        if idx < 0 || idx as usize >= self.coeffs[c].len() {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[c][idx as usize]
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let k = self.k_max;
        self.coeffs.iter().all(|row| {
            (0..=k).all(|j| (row[k + j] - row[k - j].conj()).norm() <= tol)
        })
    }

    /// Value of component `c` at `x`.
    pub fn eval(&self, c: usize, x: f64) -> f64 {
        let row = &self.coeffs[c];
        let k = self.k_max;
        let mut acc = row[k].re;
        for j in 1..=k {
            let e = Complex64::from_polar(1.0, j as f64 * x);
            acc += 2.0 * (row[k + j] * e).re;
        }
        acc
    }

    /// All components at `x_j = 2πj/n`, `j = 0..n`.
    pub fn sample(&self, n: usize) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|c| {
                (0..n)
                    .map(|j| self.eval(c, 2.0 * PI * j as f64 / n as f64))
                    .collect()
            })
            .collect()
    }

    /// Spatial derivative.
    pub fn derivative(&self) -> Self {
        let k = self.k_max as i64;
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(i, c)| c * Complex64::new(0.0, (i as i64 - k) as f64))
                    .collect()
            })
            .collect();
        SpectralField {
            k_max: self.k_max,
            coeffs,
        }
    }

    /// Multiplies mode `k` by `m(k)`.
    pub fn map_modes<F: Fn(f64) -> f64>(&self, m: F) -> Self {
        let k = self.k_max as i64;
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(i, c)| c * m((i as i64 - k) as f64))
                    .collect()
            })
            .collect();
        SpectralField {
            k_max: self.k_max,
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() || self.k_max != other.k_max {
            return Err(Error::DimensionMismatch("spectral fields of different shape".into()));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.iter().zip(b).map(|(p, q)| p - q).collect())
            .collect();
        Ok(SpectralField {
            k_max: self.k_max,
            coeffs,
        })
    }

    /// Largest coefficient difference.
    pub fn max_coefficient_distance(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).norm()))
            .fold(0.0, f64::max)
    }
}

/// `S_t field` for the chosen generator.
pub fn apply_semigroup(t: f64, field: &SpectralField, kind: SemigroupKind) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(Error::Usage(format!("semigroup time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(field.clone());
    }
    Ok(field.map_modes(|k| kind.symbol(k, t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::kernel::heat_kernel;

    fn sample_field() -> SpectralField {
        SpectralField::from_fn(2, 8, |x| vec![(2.0 * x).sin() + 0.5, (x).cos() * (x).cos()]).unwrap()
    }

    #[test]
    fn identity_at_time_zero() {
        let f = sample_field();
        assert_eq!(apply_semigroup(0.0, &f, SemigroupKind::Heat).unwrap(), f);
        assert!(apply_semigroup(-1.0, &f, SemigroupKind::Heat).is_err());
    }

    #[test]
    fn semigroup_property() {
        let f = sample_field();
        for kind in [SemigroupKind::Heat, SemigroupKind::Shifted] {
            let a = apply_semigroup(0.3, &apply_semigroup(0.2, &f, kind).unwrap(), kind).unwrap();
            let b = apply_semigroup(0.5, &f, kind).unwrap();
            assert!(a.max_coefficient_distance(&b) < 1e-12);
        }
    }

    #[test]
    fn constants() {
        let c = SpectralField::constant(&[2.0], 4);
        let heat = apply_semigroup(0.7, &c, SemigroupKind::Heat).unwrap();
        assert_eq!(heat, c);
        let shifted = apply_semigroup(0.7, &c, SemigroupKind::Shifted).unwrap();
        assert!((shifted.eval(0, 1.0) - 2.0 * (-0.7f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn kernel_convolution_matches_symbol() {
        // S_t u(x) = ∫ p_{2t}(x - y) u(y) dy
        let f = sample_field();
        let t = 0.1;
        let s = apply_semigroup(t, &f, SemigroupKind::Heat).unwrap();
        let n = 512;
        let h = 2.0 * PI / n as f64;
        for x in [0.0, 1.3, 4.0] {
            let conv: f64 = (0..n)
                .map(|j| {
                    let y = j as f64 * h;
                    heat_kernel(2.0 * t, x - y).unwrap() * f.eval(0, y)
                })
                .sum::<f64>()
                * h;
            assert!((conv - s.eval(0, x)).abs() < 1e-10);
        }
    }

    #[test]
    fn sampling_roundtrip_and_symmetry() {
        let f = sample_field();
        assert!(f.is_hermitian(1e-14));
        let back = SpectralField::from_samples(&f.sample(64), 8).unwrap();
        assert!(back.max_coefficient_distance(&f) < 1e-13);
        assert!((f.eval(0, 0.3) - ((0.6f64).sin() + 0.5)).abs() < 1e-13);
        let d = f.derivative();
        assert!((d.eval(0, 0.3) - 2.0 * (0.6f64).cos()).abs() < 1e-12);
    }

    #[test]
    fn cos_sin_amplitudes() {
        let f = SpectralField::from_cos_sin(&[vec![1.0, 0.5, 0.0]], &[vec![0.0, 0.0, 2.0]]).unwrap();
        let x: f64 = 0.9;
        let expected = 1.0 + 0.5 * x.cos() + 2.0 * (2.0 * x).sin();
        assert!((f.eval(0, x) - expected).abs() < 1e-14);
        let bad = vec![vec![Complex64::new(0.0, 1.0); 3]];
        assert!(SpectralField::from_coefficients(bad).is_err());
    }
}

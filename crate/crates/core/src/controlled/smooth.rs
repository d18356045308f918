//! A closed registry of smooth functions with analytic differentials.
//!
//! Every entry can evaluate `D^jφ(y)[v_1, …, v_j]` for any order `j` in closed
//! form and reports `‖D^jφ‖_∞` where that is finite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar nonlinearity used by [`SmoothFunction::Ridge`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Sin,
    Cos,
    Identity,
}

impl Activation {
    /// `σ^{(j)}(z)`.
    pub fn derivative(self, j: usize, z: f64) -> f64 {
        match self {
            Activation::Tanh => eval_poly(&tanh_derivative_poly(j), z.tanh()),
            Activation::Sin => (z + j as f64 * std::f64::consts::FRAC_PI_2).sin(),
            Activation::Cos => (z + j as f64 * std::f64::consts::FRAC_PI_2).cos(),
            Activation::Identity => match j {
                0 => z,
                1 => 1.0,
                _ => 0.0,
            },
        }
    }

    /// `sup_z |σ^{(j)}(z)|`, `None` when unbounded.
    pub fn sup(self, j: usize) -> Option<f64> {
        match self {
            Activation::Tanh => {
                let p = tanh_derivative_poly(j);
                Some(sampled_max(-1.0, 1.0, 4001, |t| eval_poly(&p, t).abs()))
            }
            Activation::Sin | Activation::Cos => Some(1.0),
            Activation::Identity => match j {
                0 => None,
                1 => Some(1.0),
                _ => Some(0.0),
            },
        }
    }
}

/// Coefficients (ascending powers of `t = tanh z`) of the polynomial giving
/// the `j`-th derivative of `tanh`: `P_0 = t`, `P_{j+1} = (1 - t²) P_j'`.
pub fn tanh_derivative_poly(j: usize) -> Vec<f64> {
    let mut p = vec![0.0, 1.0];
    for _ in 0..j {
        let dp: Vec<f64> = p.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
        let mut next = vec![0.0; dp.len() + 2];
        for (k, c) in dp.iter().enumerate() {
            next[k] += c;
            next[k + 2] -= c;
        }
        p = next;
    }
    p
}

fn eval_poly(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn sampled_max<F: Fn(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> f64 {
    (0..n)
        .map(|i| f(a + (b - a) * i as f64 / (n - 1) as f64))
        .fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Probabilists' Hermite polynomial `He_j(x)`.
fn hermite(j: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if j == 0 {
        return prev;
    }
    for k in 1..j {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Smooth maps `R^m → R^p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SmoothFunction {
    Identity {
        dim: usize,
    },
    Constant {
        input_dim: usize,
        value: Vec<f64>,
    },
    /// `φ_r(y) = amplitude_r · σ(weights_r · y + bias_r)`.
    Ridge {
        activation: Activation,
        amplitude: Vec<f64>,
        weights: Vec<Vec<f64>>,
        bias: Vec<f64>,
    },
    /// Scalar bump `amplitude · exp(-|y - center|² / (2 width²))`.
    Gaussian {
        amplitude: f64,
        center: Vec<f64>,
        width: f64,
    },
    /// `outer ∘ inner`.
    Composition {
        outer: Box<SmoothFunction>,
        inner: Box<SmoothFunction>,
    },
}

impl SmoothFunction {
    /// `y ↦ amplitude · σ(slope · y_c)` applied to each of `dim` components.
    pub fn componentwise(activation: Activation, dim: usize, amplitude: f64, slope: f64) -> Self {
        let weights = (0..dim)
            .map(|r| (0..dim).map(|c| if r == c { slope } else { 0.0 }).collect())
            .collect();
        SmoothFunction::Ridge {
            activation,
            amplitude: vec![amplitude; dim],
            weights,
            bias: vec![0.0; dim],
        }
    }

    /// The linear map with the given matrix (rows are outputs).
    pub fn linear(matrix: Vec<Vec<f64>>) -> Self {
        let p = matrix.len();
        SmoothFunction::Ridge {
            activation: Activation::Identity,
            amplitude: vec![1.0; p],
            weights: matrix,
            bias: vec![0.0; p],
        }
    }

    pub fn compose_with(self, inner: SmoothFunction) -> Self {
        SmoothFunction::Composition {
            outer: Box::new(self),
            inner: Box::new(inner),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            SmoothFunction::Identity { dim } => *dim,
            SmoothFunction::Constant { input_dim, .. } => *input_dim,
            SmoothFunction::Ridge { weights, .. } => weights.first().map_or(0, Vec::len),
            SmoothFunction::Gaussian { center, .. } => center.len(),
            SmoothFunction::Composition { inner, .. } => inner.input_dim(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            SmoothFunction::Identity { dim } => *dim,
            SmoothFunction::Constant { value, .. } => value.len(),
            SmoothFunction::Ridge { amplitude, .. } => amplitude.len(),
            SmoothFunction::Gaussian { .. } => 1,
            SmoothFunction::Composition { outer, .. } => outer.output_dim(),
        }
    }

    /// Checks internal shape consistency.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        match self {
            SmoothFunction::Identity { dim } if *dim == 0 => bad("identity of dimension 0".into()),
            SmoothFunction::Constant { input_dim, value } if *input_dim == 0 || value.is_empty() => {
                bad("constant needs positive input and output dimensions".into())
            }
            SmoothFunction::Ridge {
                amplitude,
                weights,
                bias,
                ..
            } => {
                let m = weights.first().map_or(0, Vec::len);
                if amplitude.is_empty() || m == 0 {
                    return bad("ridge function needs at least one output and input".into());
                }
                if weights.len() != amplitude.len()
                    || bias.len() != amplitude.len()
                    || weights.iter().any(|w| w.len() != m)
                {
                    return bad("ridge amplitude, weights and bias disagree in shape".into());
                }
                Ok(())
            }
            SmoothFunction::Gaussian { center, width, .. } if center.is_empty() || *width <= 0.0 => {
                bad("gaussian needs a nonempty center and positive width".into())
            }
            SmoothFunction::Composition { outer, inner } => {
                outer.validate()?;
                inner.validate()?;
                if outer.input_dim() != inner.output_dim() {
                    return bad(format!(
                        "composition mismatch: inner gives {} values, outer takes {}",
                        inner.output_dim(),
                        outer.input_dim()
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.output_dim()];
        self.derivative(y, &[], &mut out);
        out
    }

    /// `D^jφ(y)[v_1, …, v_j]` with `j = vs.len()`, written into `out`.
    pub fn derivative(&self, y: &[f64], vs: &[&[f64]], out: &mut [f64]) {
        let j = vs.len();
        match self {
            SmoothFunction::Identity { .. } => match j {
                0 => out.copy_from_slice(y),
                1 => out.copy_from_slice(vs[0]),
                _ => out.iter_mut().for_each(|o| *o = 0.0),
            },
            SmoothFunction::Constant { value, .. } => {
                if j == 0 {
                    out.copy_from_slice(value);
                } else {
                    out.iter_mut().for_each(|o| *o = 0.0);
                }
            }
            SmoothFunction::Ridge {
                activation,
                amplitude,
                weights,
                bias,
            } => {
                for (r, o) in out.iter_mut().enumerate() {
                    let w = &weights[r];
                    let z = dot(w, y) + bias[r];
                    let directional: f64 = vs.iter().map(|v| dot(w, v)).product();
                    *o = amplitude[r] * activation.derivative(j, z) * directional;
                }
            }
            SmoothFunction::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let z: Vec<f64> = y.iter().zip(center).map(|(a, c)| (a - c) / width).collect();
                let envelope = (-0.5 * dot(&z, &z)).exp();
                let mut total = 0.0;
                for partition in set_partitions(j) {
                    if partition.iter().any(|b| b.len() > 2) {
                        continue;
                    }
                    let term: f64 = partition
                        .iter()
                        .map(|b| match b.as_slice() {
                            [a] => -dot(&z, vs[*a]),
                            [a, c] => -dot(vs[*a], vs[*c]),
                            _ => unreachable!(),
                        })
                        .product();
                    total += term;
                }
                out[0] = amplitude * envelope * total * width.powi(-(j as i32));
            }
            SmoothFunction::Composition { outer, inner } => {
                let inner_value = inner.eval(y);
                if j == 0 {
                    outer.derivative(&inner_value, &[], out);
                    return;
                }
                let q = inner.output_dim();
                out.iter_mut().for_each(|o| *o = 0.0);
                let mut term = vec![0.0; out.len()];
                for partition in set_partitions(j) {
                    let blocks: Vec<Vec<f64>> = partition
                        .iter()
                        .map(|b| {
                            let sub: Vec<&[f64]> = b.iter().map(|&k| vs[k]).collect();
                            let mut v = vec![0.0; q];
                            inner.derivative(y, &sub, &mut v);
                            v
                        })
                        .collect();
                    let refs: Vec<&[f64]> = blocks.iter().map(Vec::as_slice).collect();
                    outer.derivative(&inner_value, &refs, &mut term);
                    for (o, t) in out.iter_mut().zip(&term) {
                        *o += t;
                    }
                }
            }
        }
    }

    /// `‖D^jφ‖_∞` for `j = 0..=order` (operator norms with Euclidean
    /// norms on arguments and values), `None` where unbounded or unknown.
    pub fn sup_norms(&self, order: usize) -> Vec<Option<f64>> {
        (0..=order).map(|j| self.sup_norm(j)).collect()
    }

    fn sup_norm(&self, j: usize) -> Option<f64> {
        match self {
            SmoothFunction::Identity { .. } => match j {
                0 => None,
                1 => Some(1.0),
                _ => Some(0.0),
            },
            SmoothFunction::Constant { value, .. } => Some(if j == 0 {
                value.iter().map(|v| v * v).sum::<f64>().sqrt()
            } else {
                0.0
            }),
            SmoothFunction::Ridge {
                activation,
                amplitude,
                weights,
                ..
            } => {
                let s = activation.sup(j)?;
                let sq: f64 = amplitude
                    .iter()
                    .zip(weights)
                    .map(|(a, w)| (a * dot(w, w).sqrt().powi(j as i32) * s).powi(2))
                    .sum();
                Some(sq.sqrt())
            }
            SmoothFunction::Gaussian {
                amplitude, width, ..
            } => {
                let s = sampled_max(-12.0, 12.0, 24001, |x| {
                    (hermite(j, x) * (-0.5 * x * x).exp()).abs()
                });
                Some(amplitude.abs() * s * width.powi(-(j as i32)))
            }
            SmoothFunction::Composition { outer, inner } => {
                if j == 0 {
                    return outer.sup_norm(0);
                }
                // Faà di Bruno bound
                let mut total = 0.0;
                for partition in set_partitions(j) {
                    let mut term = outer.sup_norm(partition.len())?;
                    for b in &partition {
                        term *= inner.sup_norm(b.len())?;
                    }
                    total += term;
                }
                Some(total)
            }
        }
    }
}

/// All set partitions of `{0, …, n-1}`; the empty set has one (empty) partition.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    fn rec(k: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        if k == labels.len() {
            let blocks = labels.iter().copied().max().map_or(0, |m| m + 1);
            let mut parts = vec![Vec::new(); blocks];
            for (i, &l) in labels.iter().enumerate() {
                parts[l].push(i);
            }
            out.push(parts);
            return;
        }
        for l in 0..=max {
            labels[k] = l;
            rec(k + 1, max.max(l + 1), labels, out);
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    rec(1, 1, &mut labels, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric_directional(f: &SmoothFunction, y: &[f64], v: &[f64], j: usize) -> Vec<f64> {
        // central difference of D^{j-1}φ(y)[v,…,v] along v
        let h = 1e-5;
        let vs: Vec<&[f64]> = vec![v; j - 1];
        let shift = |s: f64| -> Vec<f64> {
            let yy: Vec<f64> = y.iter().zip(v).map(|(a, b)| a + s * b).collect();
            let mut out = vec![0.0; f.output_dim()];
            f.derivative(&yy, &vs, &mut out);
            out
        };
        let (p, m) = (shift(h), shift(-h));
        p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    }

    fn registry() -> Vec<SmoothFunction> {
        vec![
            SmoothFunction::componentwise(Activation::Tanh, 2, 0.7, 1.3),
            SmoothFunction::Ridge {
                activation: Activation::Sin,
                amplitude: vec![1.0, -0.5, 2.0],
                weights: vec![vec![1.0, 0.5], vec![-0.3, 2.0], vec![0.2, 0.2]],
                bias: vec![0.1, 0.0, -1.0],
            },
            SmoothFunction::Gaussian {
                amplitude: 1.5,
                center: vec![0.2, -0.1],
                width: 0.8,
            },
            SmoothFunction::componentwise(Activation::Cos, 2, 1.0, 1.0)
                .compose_with(SmoothFunction::componentwise(Activation::Tanh, 2, 1.0, 0.5)),
        ]
    }

    #[test]
    fn tanh_polynomials() {
        assert_eq!(tanh_derivative_poly(1), vec![1.0, 0.0, -1.0]);
        assert_eq!(tanh_derivative_poly(2), vec![0.0, -2.0, 0.0, 2.0]);
        assert!((Activation::Tanh.sup(1).unwrap() - 1.0).abs() < 1e-12);
        // |tanh''| peaks at 4/(3√3)
        let s2 = Activation::Tanh.sup(2).unwrap();
        assert!((s2 - 4.0 / (3.0 * 3f64.sqrt())).abs() < 1e-5);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let y = [0.3, -0.4];
        let v = [0.6, 0.8];
        for f in registry() {
            f.validate().unwrap();
            for j in 1..=4 {
                let mut exact = vec![0.0; f.output_dim()];
                let vs: Vec<&[f64]> = vec![&v; j];
                f.derivative(&y, &vs, &mut exact);
                let approx = numeric_directional(&f, &y, &v, j);
                for (a, b) in exact.iter().zip(&approx) {
                    assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{f:?} j={j}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn derivatives_are_symmetric() {
        let y = [0.5, 0.25];
        let (a, b, c) = ([1.0, 0.0], [0.3, -2.0], [0.7, 0.1]);
        for f in registry() {
            let mut x1 = vec![0.0; f.output_dim()];
            let mut x2 = vec![0.0; f.output_dim()];
            f.derivative(&y, &[&a, &b, &c], &mut x1);
            f.derivative(&y, &[&c, &a, &b], &mut x2);
            for (p, q) in x1.iter().zip(&x2) {
                assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_and_constant() {
        let id = SmoothFunction::Identity { dim: 2 };
        assert_eq!(id.eval(&[1.0, 2.0]), vec![1.0, 2.0]);
        assert_eq!(id.sup_norms(2), vec![None, Some(1.0), Some(0.0)]);
        let c = SmoothFunction::Constant {
            input_dim: 2,
            value: vec![3.0, 4.0],
        };
        assert_eq!(c.eval(&[9.0, 9.0]), vec![3.0, 4.0]);
        assert_eq!(c.sup_norms(1), vec![Some(5.0), Some(0.0)]);
    }

    #[test]
    fn gaussian_sup_norms() {
        let g = SmoothFunction::Gaussian {
            amplitude: 2.0,
            center: vec![0.0],
            width: 0.5,
        };
        let s = g.sup_norms(1);
        assert!((s[0].unwrap() - 2.0).abs() < 1e-12);
        // sup |x e^{-x²/2}| = e^{-1/2}, scaled by 1/width
        assert!((s[1].unwrap() - 4.0 * (-0.5f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn set_partition_counts_are_bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52];
        for (n, b) in bell.iter().enumerate() {
            assert_eq!(set_partitions(n).len(), *b);
        }
    }

    #[test]
    fn rejects_inconsistent_shapes() {
        let bad = SmoothFunction::Ridge {
            activation: Activation::Tanh,
            amplitude: vec![1.0, 1.0],
            weights: vec![vec![1.0]],
            bias: vec![0.0, 0.0],
        };
        assert!(bad.validate().is_err());
        let mismatched = SmoothFunction::Identity { dim: 3 }
            .compose_with(SmoothFunction::Identity { dim: 2 });
        assert!(mismatched.validate().is_err());
    }

    #[test]
    fn serde_tagging() {
        let f = SmoothFunction::componentwise(Activation::Tanh, 1, 0.3, 1.0);
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.contains("\"kind\":\"ridge\""));
        let back: SmoothFunction = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }
}

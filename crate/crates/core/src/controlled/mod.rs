//! Controlled rough paths.
//!
//! A path `Y = (Y⁰, …, Y^{N-1})` controlled by a rough path `X` of depth `N`
//! stores, at every grid time, level `i` as a dense `m × d^i` matrix
//! (row-major) representing a linear map `(R^d)^{⊗i} → R^m`.
//!
//! Products between a level and a tensor contract the *leading* slots:
//! `(Y^{i+j} X^j)(e_w) = Y^{i+j}(X^j ⊗ e_w)`, so column `u·d^i + w` of
//! `Y^{i+j}` pairs with entry `u` of `X^j`. The remainders are then
//! `R^i_{s,t} = Y^i_t - Y^i_s - Σ_{j=1}^{N-1-i} Y^{i+j}_s X^j_{s,t}`.

pub mod delta;
pub mod smooth;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::holder;
use crate::rough_path::RoughPathGrid;
use crate::tensor::TruncatedTensor;

pub use delta::{delta_split, distributions, SplitBlock};
pub use smooth::{Activation, SmoothFunction};

#[derive(Clone, Debug, PartialEq)]
pub struct ControlledPath {
    times: Vec<f64>,
    dim: usize,
    target: usize,
    levels: Vec<Vec<f64>>,
}

impl ControlledPath {
    /// `levels[i]` holds `times.len()` consecutive `target × dim^i` matrices.
    pub fn new(times: Vec<f64>, dim: usize, target: usize, levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Usage("a controlled path needs at least level 0".into()));
        }
        for (i, level) in levels.iter().enumerate() {
            let want = times.len() * target * dim.pow(i as u32);
            if level.len() != want {
                return Err(Error::DimensionMismatch(format!(
                    "level {i} has {} entries, expected {want}",
                    level.len()
                )));
            }
        }
        Ok(ControlledPath {
            times,
            dim,
            target,
            levels,
        })
    }

    pub fn zeros(times: Vec<f64>, dim: usize, target: usize, num_levels: usize) -> Self {
        let n = times.len();
        let levels = (0..num_levels)
            .map(|i| vec![0.0; n * target * dim.pow(i as u32)])
            .collect();
        ControlledPath {
            times,
            dim,
            target,
            levels,
        }
    }

    /// `(x_0 + X¹_{0,t}, id, 0, …, 0)`: the path underlying `X`, started at
    /// `origin`, controlled by `X` itself.
    pub fn canonical(x: &RoughPathGrid, origin: &[f64]) -> Result<Self> {
        let d = x.dim();
        if origin.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "origin has {} entries, path dimension is {d}",
                origin.len()
            )));
        }
        let mut y = Self::zeros(x.times().to_vec(), d, d, x.depth().max(1));
        for t in 0..x.len() {
            let lvl1 = x.element(t).level(1);
            for (c, v) in y.at_mut(0, t).iter_mut().enumerate() {
                *v = origin[c] + lvl1[c];
            }
            if y.num_levels() > 1 {
                let id = y.at_mut(1, t);
                for c in 0..d {
                    id[c * d + c] = 1.0;
                }
            }
        }
        Ok(y)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn target_dim(&self) -> usize {
        self.target
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    fn block(&self, i: usize) -> usize {
        self.target * self.dim.pow(i as u32)
    }

    /// Level `i` at grid index `t`, a `target × d^i` row-major matrix.
    pub fn at(&self, i: usize, t: usize) -> &[f64] {
        let b = self.block(i);
        &self.levels[i][t * b..(t + 1) * b]
    }

    pub fn at_mut(&mut self, i: usize, t: usize) -> &mut [f64] {
        let b = self.block(i);
        &mut self.levels[i][t * b..(t + 1) * b]
    }

    /// All grid values of level `i`, concatenated.
    pub fn level(&self, i: usize) -> &[f64] {
        &self.levels[i]
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.times != other.times
            || self.dim != other.dim
            || self.target != other.target
            || self.levels.len() != other.levels.len()
        {
            return Err(Error::DimensionMismatch("controlled paths of different shape".into()));
        }
        Ok(())
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_same_shape(other)?;
        let levels = self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            .collect();
        Ok(ControlledPath {
            levels,
            times: self.times.clone(),
            ..*self
        })
    }

    /// Adds a constant vector to level 0 at every time.
    pub fn shift(&self, constant: &[f64]) -> Result<Self> {
        if constant.len() != self.target {
            return Err(Error::DimensionMismatch("shift length differs from target".into()));
        }
        let mut out = self.clone();
        for chunk in out.levels[0].chunks_mut(self.target) {
            for (v, c) in chunk.iter_mut().zip(constant) {
                *v += c;
            }
        }
        Ok(out)
    }

    /// `δY_{0,·}`: level 0 minus its initial value, higher levels unchanged.
    pub fn increment_from_start(&self) -> Self {
        let start: Vec<f64> = self.at(0, 0).iter().map(|v| -v).collect();
        self.shift(&start).expect("own target dimension")
    }

    fn check_against(&self, x: &RoughPathGrid) -> Result<()> {
        if self.times != x.times() {
            return Err(Error::DimensionMismatch("controlled path and rough path grids differ".into()));
        }
        if self.dim != x.dim() {
            return Err(Error::DimensionMismatch(format!(
                "controlled path over R^{} but rough path in R^{}",
                self.dim,
                x.dim()
            )));
        }
        if self.num_levels() != x.depth() {
            return Err(Error::DimensionMismatch(format!(
                "{} controlled levels for a depth-{} rough path",
                self.num_levels(),
                x.depth()
            )));
        }
        Ok(())
    }

    /// `R^i_{s,t}` given the increment `X_{s,t}`.
    pub fn remainder_with(&self, i: usize, s: usize, t: usize, inc: &TruncatedTensor) -> Vec<f64> {
        let mut r: Vec<f64> = self
            .at(i, t)
            .iter()
            .zip(self.at(i, s))
            .map(|(a, b)| a - b)
            .collect();
        let wi = self.dim.pow(i as u32);
        let n = self.num_levels();
        for j in 1..n.saturating_sub(i) {
            let y = self.at(i + j, s);
            let xj = inc.level(j);
            let wij = self.dim.pow((i + j) as u32);
            for row in 0..self.target {
                for (u, &xu) in xj.iter().enumerate() {
                    if xu == 0.0 {
                        continue;
                    }
                    let base = row * wij + u * wi;
                    for w in 0..wi {
                        r[row * wi + w] -= y[base + w] * xu;
                    }
                }
            }
        }
        r
    }

    /// `R^i_{s,t}` for grid indices `s <= t`.
    pub fn remainder(&self, x: &RoughPathGrid, i: usize, s: usize, t: usize) -> Result<Vec<f64>> {
        self.check_against(x)?;
        let inc = x.increment(s, t)?;
        Ok(self.remainder_with(i, s, t, &inc))
    }

    /// `(t, level, entries…)` rows; row lengths vary with the level.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
        for (t, time) in self.times.iter().enumerate() {
            for i in 0..self.num_levels() {
                let mut row = vec![time.to_string(), i.to_string()];
                row.extend(self.at(i, t).iter().map(f64::to_string));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn frobenius(m: &[f64]) -> f64 {
    holder::euclidean_norm(m)
}

/// Remainder seminorms and the controlled norm of a path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemainderReport {
    /// `‖R^i‖_{(N-i)α}` over grid pairs.
    pub seminorms: Vec<f64>,
    /// `max_{s<t} |R^i_{s,t}|`.
    pub max_abs: Vec<f64>,
    /// `|Y^i_0|`, Frobenius.
    pub initial_norms: Vec<f64>,
    pub controlled_norm: f64,
}

/// Remainders of `y` against `x` over every pair of grid points.
pub fn remainders(y: &ControlledPath, x: &RoughPathGrid) -> Result<RemainderReport> {
    y.check_against(x)?;
    let n = y.len();
    let levels = y.num_levels();
    let alpha = x.alpha();
    let times = y.times();
    let zero = || (vec![0.0f64; levels], vec![0.0f64; levels]);
    let (seminorms, max_abs) = (0..n)
        .into_par_iter()
        .map(|s| {
            let (mut sem, mut mx) = zero();
            let mut inc = TruncatedTensor::zero(x.dim(), x.depth()).expect("valid shape");
            for t in s + 1..n {
                x.increment_into(s, t, &mut inc);
                let gap = times[t] - times[s];
                for i in 0..levels {
                    let r = frobenius(&y.remainder_with(i, s, t, &inc));
                    let exponent = (levels - i) as f64 * alpha;
                    sem[i] = sem[i].max(r / gap.powf(exponent));
                    mx[i] = mx[i].max(r);
                }
            }
            (sem, mx)
        })
        .reduce(zero, |(a, b), (c, d)| {
            (
                a.iter().zip(&c).map(|(p, q)| p.max(*q)).collect(),
                b.iter().zip(&d).map(|(p, q)| p.max(*q)).collect(),
            )
        });
    let initial_norms: Vec<f64> = (0..levels).map(|i| frobenius(y.at(i, 0))).collect();
    let controlled_norm = initial_norms.iter().sum::<f64>() + seminorms.iter().sum::<f64>();
    Ok(RemainderReport {
        seminorms,
        max_abs,
        initial_norms,
        controlled_norm,
    })
}

/// `Σ_i |Y^i_0| + Σ_i ‖R^i‖_{(N-i)α}`.
pub fn controlled_norm(y: &ControlledPath, x: &RoughPathGrid) -> Result<f64> {
    Ok(remainders(y, x)?.controlled_norm)
}

/// `(g_t Y⁰_t, …, g_t Y^{N-1}_t)` for a scalar path `g` on the same grid.
pub fn scalar_multiply(g: &[f64], y: &ControlledPath) -> Result<ControlledPath> {
    if g.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "scalar path has {} points, controlled path {}",
            g.len(),
            y.len()
        )));
    }
    let mut out = y.clone();
    for i in 0..out.num_levels() {
        let b = out.block(i);
        for (chunk, gt) in out.levels[i].chunks_mut(b).zip(g) {
            chunk.iter_mut().for_each(|v| *v *= gt);
        }
    }
    Ok(out)
}

/// Precomputed column bookkeeping for composing with a smooth function.
struct ComposePlan {
    /// For each output level `r >= 1`: `(j, 1/j!, per output column the
    /// (level, column) of each slot)`.
    terms: Vec<Vec<(usize, f64, Vec<Vec<(usize, usize)>>)>>,
}

impl ComposePlan {
    fn new(dim: usize, levels: usize) -> Self {
        let mut terms = vec![Vec::new()];
        for r in 1..levels {
            let width = dim.pow(r as u32);
            let mut per_r = Vec::new();
            let mut factorial = 1.0;
            for j in 1..=r {
                factorial *= j as f64;
                for dist in distributions(r, j) {
                    let cols: Vec<Vec<(usize, usize)>> = (0..width)
                        .map(|w| {
                            let letters = crate::tensor::Word::from_flat_index(dim, r, w);
                            let letters: Vec<usize> = letters.letters().collect();
                            (0..j)
                                .map(|slot| {
                                    let sub: Vec<usize> = letters
                                        .iter()
                                        .zip(&dist)
                                        .filter(|(_, &s)| s == slot)
                                        .map(|(&l, _)| l - 1)
                                        .collect();
                                    let col = sub.iter().fold(0, |acc, l| acc * dim + l);
                                    (sub.len(), col)
                                })
                                .collect()
                        })
                        .collect();
                    per_r.push((j, 1.0 / factorial, cols));
                }
            }
            terms.push(per_r);
        }
        ComposePlan { terms }
    }
}

/// `φ(Y)`: level 0 is `φ(Y⁰_t)` and level `r >= 1` is
/// `Σ_{j=1}^{r} (1/j!) D^jφ(Y⁰_t)[(Y^{i_1}_t ⊗ … ⊗ Y^{i_j}_t) ∘ δ_j]`
/// restricted to `(R^d)^{⊗r}`.
pub fn compose(phi: &SmoothFunction, y: &ControlledPath) -> Result<ControlledPath> {
    phi.validate()?;
    if phi.input_dim() != y.target_dim() {
        return Err(Error::DimensionMismatch(format!(
            "function takes R^{} but the path lives in R^{}",
            phi.input_dim(),
            y.target_dim()
        )));
    }
    let m = y.target_dim();
    let p = phi.output_dim();
    let d = y.dim();
    let levels = y.num_levels();
    let plan = ComposePlan::new(d, levels);
    let per_time: Vec<Vec<Vec<f64>>> = (0..y.len())
        .into_par_iter()
        .map(|t| {
            let y0 = y.at(0, t);
            let mut out = Vec::with_capacity(levels);
            out.push(phi.eval(y0));
            // columns of every level as vectors in R^m
            let columns: Vec<Vec<Vec<f64>>> = (0..levels)
                .map(|i| {
                    let width = d.pow(i as u32);
                    let mat = y.at(i, t);
                    (0..width)
                        .map(|c| (0..m).map(|row| mat[row * width + c]).collect())
                        .collect()
                })
                .collect();
            let mut buf = vec![0.0; p];
            for r in 1..levels {
                let width = d.pow(r as u32);
                let mut mat = vec![0.0; p * width];
                for (j, weight, cols) in &plan.terms[r] {
                    for (w, slots) in cols.iter().enumerate() {
                        let args: Vec<&[f64]> = slots
                            .iter()
                            .map(|&(lvl, col)| columns[lvl][col].as_slice())
                            .collect();
                        debug_assert_eq!(args.len(), *j);
                        phi.derivative(y0, &args, &mut buf);
                        for (row, v) in buf.iter().enumerate() {
                            mat[row * width + w] += weight * v;
                        }
                    }
                }
                out.push(mat);
            }
            out
        })
        .collect();
    let mut result = ControlledPath::zeros(y.times().to_vec(), d, p, levels);
    for (t, lv) in per_time.into_iter().enumerate() {
        for (i, mat) in lv.into_iter().enumerate() {
            result.at_mut(i, t).copy_from_slice(&mat);
        }
    }
    Ok(result)
}

/// Ingredients of the composition bound, normalised with unit exponents.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionBound {
    /// `‖φ(Y)‖_{X,α}`.
    pub composed_norm: f64,
    /// `Σ_{j=0}^{N} ‖D^jφ‖_∞`.
    pub derivative_sum: f64,
    /// `Σ_i ‖Y^i‖_{C^α}` (sup plus α-seminorm, every level at exponent α).
    pub path_sum: f64,
    /// `‖Y‖_{X,α}`.
    pub controlled_norm: f64,
    /// `composed_norm / (derivative_sum · path_sum · (1 + controlled_norm))`.
    pub ratio: f64,
}

/// Computes both sides of the composition bound for a fixed `(φ, Y, X)`.
/// Fails when some `‖D^jφ‖_∞` is unbounded.
pub fn composition_bound_report(
    phi: &SmoothFunction,
    y: &ControlledPath,
    x: &RoughPathGrid,
) -> Result<CompositionBound> {
    let composed = compose(phi, y)?;
    let composed_norm = controlled_norm(&composed, x)?;
    let derivative_sum = phi
        .sup_norms(x.depth())
        .into_iter()
        .map(|s| s.ok_or_else(|| Error::Usage("function has an unbounded differential".into())))
        .sum::<Result<f64>>()?;
    let times = y.times();
    let path_sum: f64 = (0..y.num_levels())
        .map(|i| {
            let vals: Vec<Vec<f64>> = (0..y.len()).map(|t| y.at(i, t).to_vec()).collect();
            let sup = vals.iter().map(|v| frobenius(v)).fold(0.0, f64::max);
            sup + holder::path_seminorm(times, &vals, x.alpha())
        })
        .sum();
    let controlled_norm = controlled_norm(y, x)?;
    let ratio = composed_norm / (derivative_sum * path_sum * (1.0 + controlled_norm));
    Ok(CompositionBound {
        composed_norm,
        derivative_sum,
        path_sum,
        controlled_norm,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rough_path::{signature_lift, GridPath};
    use crate::sampling::brownian_path;

    fn lifted(seed: u64, dim: usize, steps: usize, depth: usize, alpha: f64) -> RoughPathGrid {
        signature_lift(&brownian_path(seed, dim, steps, 1.0).unwrap(), depth, alpha).unwrap()
    }

    #[test]
    fn canonical_path_has_zero_remainders() {
        for depth in 1..=4 {
            let x = lifted(1, 2, 24, depth, 1.0 / (depth as f64 + 0.5));
            let y = ControlledPath::canonical(&x, &[0.5, -1.0]).unwrap();
            if depth == 1 {
                continue;
            }
            let r = remainders(&y, &x).unwrap();
            assert!(r.max_abs.iter().all(|&v| v < 1e-12), "{r:?}");
            let expected = (0.25f64 + 1.0).sqrt() + 2f64.sqrt();
            assert!((r.controlled_norm - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_path() {
        let x = lifted(2, 1, 16, 2, 0.4);
        let mut y = ControlledPath::zeros(x.times().to_vec(), 1, 1, 2);
        for t in 0..y.len() {
            y.at_mut(0, t)[0] = 3.0;
        }
        let r = remainders(&y, &x).unwrap();
        assert_eq!(r.max_abs[0], 0.0);
        let zero = ControlledPath::zeros(x.times().to_vec(), 1, 1, 2);
        assert_eq!(controlled_norm(&zero, &x).unwrap(), 0.0);
    }

    #[test]
    fn smooth_remainder_is_second_order() {
        // X(t) = (t, t²) lifted, Y⁰ = sin(X¹), Y¹ = (cos(X¹), 0)
        let errs: Vec<f64> = [64usize, 128, 256]
            .iter()
            .map(|&n| {
                let times = GridPath::uniform_times(0.0, 1.0, n);
                let p = GridPath::from_fn(times, |t| vec![t, t * t]).unwrap();
                let x = signature_lift(&p, 2, 0.5).unwrap();
                let mut y = ControlledPath::zeros(x.times().to_vec(), 2, 1, 2);
                for t in 0..y.len() {
                    let u = p.value(t)[0];
                    y.at_mut(0, t)[0] = u.sin();
                    y.at_mut(1, t)[0] = u.cos();
                }
                // neighbouring points only: local remainder size
                (0..n)
                    .map(|s| y.remainder(&x, 0, s, s + 1).unwrap()[0].abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > 1.9, "rate {rate}");
        }
    }

    #[test]
    fn triangle_inequality() {
        let x = lifted(3, 2, 20, 2, 0.4);
        let a = ControlledPath::canonical(&x, &[0.0, 1.0]).unwrap();
        let b = compose(&SmoothFunction::componentwise(Activation::Sin, 2, 1.0, 2.0), &a).unwrap();
        let sum = a.combine(1.0, &b, 1.0).unwrap();
        let lhs = controlled_norm(&sum, &x).unwrap();
        let rhs = controlled_norm(&a, &x).unwrap() + controlled_norm(&b, &x).unwrap();
        assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn compose_identity_and_constant() {
        let x = lifted(4, 2, 16, 3, 0.3);
        let y = ControlledPath::canonical(&x, &[0.1, 0.2]).unwrap();
        let same = compose(&SmoothFunction::Identity { dim: 2 }, &y).unwrap();
        assert_eq!(same, y);
        let c = compose(
            &SmoothFunction::Constant {
                input_dim: 2,
                value: vec![7.0],
            },
            &y,
        )
        .unwrap();
        assert!(c.level(0).iter().all(|&v| v == 7.0));
        assert!(c.level(1).iter().chain(c.level(2)).all(|&v| v == 0.0));
    }

    #[test]
    fn compose_first_level_is_chain_rule() {
        let x = lifted(5, 1, 32, 2, 0.4);
        let y = ControlledPath::canonical(&x, &[0.3]).unwrap();
        let z = compose(&SmoothFunction::componentwise(Activation::Tanh, 1, 1.0, 1.0), &y).unwrap();
        for t in 0..z.len() {
            let u = y.at(0, t)[0];
            assert_eq!(z.at(0, t)[0], u.tanh());
            let deriv = 1.0 - u.tanh().powi(2);
            assert!((z.at(1, t)[0] - deriv).abs() < 1e-14);
        }
    }

    #[test]
    fn composed_canonical_has_small_remainders() {
        // φ(X) is again controlled: remainders shrink like the Taylor rest
        let phi = SmoothFunction::componentwise(Activation::Sin, 2, 1.0, 1.0);
        let times = GridPath::uniform_times(0.0, 1.0, 64);
        let p = GridPath::from_fn(times, |t| vec![(3.0 * t).sin(), t * t]).unwrap();
        for depth in 2..=4 {
            let x = signature_lift(&p, depth, 1.0 / depth as f64).unwrap();
            let y = ControlledPath::canonical(&x, &[0.0, 0.0]).unwrap();
            let z = compose(&phi, &y).unwrap();
            let r = z.remainder(&x, 0, 10, 11).unwrap();
            let h: f64 = 1.0 / 64.0;
            assert!(r[0].abs() < 20.0 * h.powi(depth as i32), "depth {depth}: {r:?}");
        }
    }

    #[test]
    fn compose_chain_rule_for_compositions() {
        let x = lifted(6, 1, 32, 2, 0.45);
        let y = ControlledPath::canonical(&x, &[0.2]).unwrap();
        let inner = SmoothFunction::componentwise(Activation::Tanh, 1, 1.0, 0.7);
        let outer = SmoothFunction::componentwise(Activation::Sin, 1, 2.0, 1.0);
        let direct = compose(&outer.clone().compose_with(inner.clone()), &y).unwrap();
        let nested = compose(&outer, &compose(&inner, &y).unwrap()).unwrap();
        assert_eq!(direct.level(0), nested.level(0));
        for (a, b) in direct.level(1).iter().zip(nested.level(1)) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn scalar_multiplication() {
        let x = lifted(7, 2, 16, 2, 0.4);
        let y = ControlledPath::canonical(&x, &[1.0, 1.0]).unwrap();
        let n = y.len();
        assert_eq!(scalar_multiply(&vec![1.0; n], &y).unwrap(), y);
        let zero = scalar_multiply(&vec![0.0; n], &y).unwrap();
        assert!(zero.level(0).iter().chain(zero.level(1)).all(|&v| v == 0.0));
        assert!(scalar_multiply(&[1.0], &y).is_err());
    }

    #[test]
    fn shape_mismatches() {
        let x = lifted(8, 2, 8, 2, 0.4);
        let y = ControlledPath::canonical(&x, &[0.0, 0.0]).unwrap();
        let x3 = lifted(8, 2, 8, 3, 0.3);
        assert!(remainders(&y, &x3).is_err());
        assert!(compose(&SmoothFunction::Identity { dim: 3 }, &y).is_err());
        assert!(ControlledPath::new(vec![0.0, 1.0], 2, 1, vec![vec![0.0; 3]]).is_err());
    }

    #[test]
    fn constant_function_bound_is_finite() {
        let x = lifted(9, 1, 32, 2, 0.4);
        let y = ControlledPath::canonical(&x, &[0.0]).unwrap();
        let c = SmoothFunction::Constant {
            input_dim: 1,
            value: vec![-2.0],
        };
        let report = composition_bound_report(&c, &y, &x).unwrap();
        assert!((report.composed_norm - 2.0).abs() < 1e-12);
        assert!(report.ratio.is_finite() && report.ratio > 0.0);
        assert!(composition_bound_report(&SmoothFunction::Identity { dim: 1 }, &y, &x).is_err());
    }

    #[test]
    fn csv_rows() {
        let x = lifted(10, 2, 2, 2, 0.4);
        let y = ControlledPath::canonical(&x, &[0.0, 0.0]).unwrap();
        let mut buf = Vec::new();
        y.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first: Vec<&str> = text.lines().take(2).collect();
        assert_eq!(first, vec!["0,0,0,0", "0,1,1,0,0,1"]);
    }
}

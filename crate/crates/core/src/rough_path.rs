//! Rough paths sampled on a grid.
//!
//! A [`RoughPathGrid`] stores only the group elements `X_{0,t_i}`. Every
//! two-parameter increment is recovered through Chen's relation
//! `X_{s,t} = X_{0,s}^{-1} ⊗ X_{0,t}`, so memory stays linear in the grid and
//! the relation holds by construction for anything built this way.

use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::holder;
use crate::sampling::stream_rng;
use crate::tensor::{check_shape, exp_into, mul_into, shuffle_words, TruncatedTensor, Word};

/// Triple counts above which [`check_chen_family`] samples instead of
/// enumerating.
pub const EXHAUSTIVE_CHEN_POINTS: usize = 128;
const SAMPLED_TRIPLES: usize = 10_000;

/// A path in `R^d` sampled at strictly increasing times.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPath {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    dim: usize,
}

impl GridPath {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::Usage("empty path".into()));
        }
        if times[0] < 0.0 || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Usage("times must be finite and start at t >= 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Usage("times must be strictly increasing".into()));
        }
        let dim = values[0].len();
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch(
                "every value must have the same positive dimension".into(),
            ));
        }
        Ok(GridPath { times, values, dim })
    }

    /// Samples `f` at the given times.
    pub fn from_fn<F: Fn(f64) -> Vec<f64>>(times: Vec<f64>, f: F) -> Result<Self> {
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times, values)
    }

    /// `n + 1` uniform times on `[a, b]`.
    pub fn uniform_times(a: f64, b: f64, n: usize) -> Vec<f64> {
        let h = (b - a) / n as f64;
        (0..=n).map(|i| if i == n { b } else { a + i as f64 * h }).collect()
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

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    /// Writes columns `t, x1, ..., xd`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|c| format!("x{c}")));
        w.write_record(&header)?;
        for (t, v) in self.times.iter().zip(&self.values) {
            let mut row = vec![t.to_string()];
            row.extend(v.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`GridPath::write_csv`].
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for record in r.records() {
            let record = record?;
            let mut fields = record.iter().map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Usage(format!("bad number {s:?}: {e}")))
            });
            let t = fields
                .next()
                .ok_or_else(|| Error::Usage("empty row".into()))??;
            times.push(t);
            values.push(fields.collect::<Result<Vec<f64>>>()?);
        }
        Self::new(times, values)
    }
}

/// Per-level grid Hölder seminorms `‖X^i‖_{iα}` and their sum `‖X‖_α`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HoelderReport {
    pub per_level: Vec<f64>,
    pub total: f64,
}

/// Outcome of a Chen or shuffle check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationReport {
    pub max_violation: f64,
    pub checked: usize,
    pub passed: bool,
}

/// `⌊1/α⌋`, the depth carried by an `α`-Hölder rough path.
pub fn default_depth(alpha: f64) -> usize {
    (1.0 / alpha).floor() as usize
}

/// A group-valued path `t_i ↦ X_{0,t_i}` together with its regularity `α`.
#[derive(Clone, Debug)]
pub struct RoughPathGrid {
    times: Vec<f64>,
    elems: Vec<TruncatedTensor>,
    inverses: Vec<TruncatedTensor>,
    alpha: f64,
    depth: usize,
    dim: usize,
}

impl RoughPathGrid {
    /// Wraps precomputed group elements. The first must be the unit.
    pub fn from_elements(times: Vec<f64>, elems: Vec<TruncatedTensor>, alpha: f64) -> Result<Self> {
        if times.len() != elems.len() || times.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} times but {} group elements",
                times.len(),
                elems.len()
            )));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Usage(format!("alpha {alpha} outside (0, 1]")));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Usage("times must be strictly increasing".into()));
        }
        let (dim, depth) = (elems[0].dim(), elems[0].depth());
        if elems.iter().any(|e| e.dim() != dim || e.depth() != depth) {
            return Err(Error::DimensionMismatch("mixed tensor shapes".into()));
        }
        let unit = TruncatedTensor::unit(dim, depth)?;
        if elems[0].relative_distance(&unit)? > 1e-12 {
            return Err(Error::Usage("first group element must be the unit".into()));
        }
        let inverses = elems
            .par_iter()
            .map(TruncatedTensor::inverse)
            .collect::<Result<Vec<_>>>()?;
        Ok(RoughPathGrid {
            times,
            elems,
            inverses,
            alpha,
            depth,
            dim,
        })
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

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `X_{0,t_i}`.
    pub fn element(&self, i: usize) -> &TruncatedTensor {
        &self.elems[i]
    }

    pub fn elements(&self) -> &[TruncatedTensor] {
        &self.elems
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// `X_{t_i,t_j}` for `i <= j`.
    pub fn increment(&self, i: usize, j: usize) -> Result<TruncatedTensor> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i > j {
            return Err(Error::Usage(format!("increment({i}, {j}) needs i <= j")));
        }
        let mut out = TruncatedTensor::zero(self.dim, self.depth)?;
        self.increment_into(i, j, &mut out);
        Ok(out)
    }

    /// Non-allocating form of [`RoughPathGrid::increment`]; indices unchecked.
    pub(crate) fn increment_into(&self, i: usize, j: usize, out: &mut TruncatedTensor) {
        mul_into(&self.inverses[i], &self.elems[j], out);
    }

    /// Level `k` of `X_{t_i,t_j}` written into `out` (length `d^k`).
    pub fn increment_level(&self, i: usize, j: usize, k: usize, out: &mut [f64]) {
        let d = self.dim;
        out.iter_mut().for_each(|v| *v = 0.0);
        let a = &self.inverses[i];
        let b = &self.elems[j];
        for p in 0..=k {
            let ap = a.level(p);
            let bq = b.level(k - p);
            let bw = bq.len();
            for (u, &au) in ap.iter().enumerate() {
                if au == 0.0 {
                    continue;
                }
                for (o, &bv) in out[u * bw..(u + 1) * bw].iter_mut().zip(bq) {
                    *o += au * bv;
                }
            }
        }
        debug_assert_eq!(out.len(), d.pow(k as u32));
    }

    /// Chen's relation over all triples, or 10⁴ seeded random triples when the
    /// grid has more than [`EXHAUSTIVE_CHEN_POINTS`] points.
    pub fn check_chen(&self, tol: f64) -> RelationReport {
        check_chen_family(self.len(), tol, 0, |i, j| {
            self.increment(i, j).expect("indices in range")
        })
    }

    /// Shuffle identity `⟨X_{s,t}, w₁⧢w₂⟩ = ⟨X_{s,t}, w₁⟩⟨X_{s,t}, w₂⟩` for all
    /// nonempty word pairs with `|w₁| + |w₂| <= N`, on `samples` seeded
    /// random increments. Violations are relative to `max(1, |⟨X, w₁⧢w₂⟩|,
    /// |⟨X,w₁⟩⟨X,w₂⟩|)`.
    pub fn check_shuffle(&self, tol: f64, samples: usize, seed: u64) -> RelationReport {
        let n = self.len();
        let pairs = word_pairs(self.dim, self.depth);
        let shuffles: Vec<Vec<(Word, u64)>> =
            pairs.iter().map(|(a, b)| shuffle_words(a, b)).collect();
        let mut rng = stream_rng(seed, 0x5_u64);
        let intervals: Vec<(usize, usize)> = (0..samples)
            .map(|_| {
                if n < 2 {
                    return (0, 0);
                }
                let i = rng.random_range(0..n - 1);
                let j = rng.random_range(i + 1..n);
                (i, j)
            })
            .collect();
        let max_violation = intervals
            .par_iter()
            .map(|&(i, j)| {
                let x = self.increment(i, j).expect("indices in range");
                shuffle_violation(&x, &pairs, &shuffles)
            })
            .reduce(|| 0.0, f64::max);
        RelationReport {
            max_violation,
            checked: intervals.len() * pairs.len(),
            passed: max_violation <= tol,
        }
    }

    /// Grid Hölder norms. A lower bound for the continuum seminorms.
    pub fn hoelder_norm(&self) -> HoelderReport {
        let per_level: Vec<f64> = (1..=self.depth)
            .map(|k| {
                let width = self.dim.pow(k as u32);
                holder::pair_sup(&self.times, k as f64 * self.alpha, |i, j| {
                    let mut buf = vec![0.0; width];
                    self.increment_level(i, j, k, &mut buf);
                    holder::euclidean_norm(&buf)
                })
            })
            .collect();
        let total = per_level.iter().sum();
        HoelderReport { per_level, total }
    }
}

/// Maximum relative shuffle-identity violation of a single element.
pub fn shuffle_violation(
    x: &TruncatedTensor,
    pairs: &[(Word, Word)],
    shuffles: &[Vec<(Word, u64)>],
) -> f64 {
    pairs
        .iter()
        .zip(shuffles)
        .map(|((a, b), sh)| {
            let lhs: f64 = sh.iter().map(|(w, c)| *c as f64 * x.get(w)).sum();
            let rhs = x.get(a) * x.get(b);
            (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0)
        })
        .fold(0.0, f64::max)
}

/// All pairs of nonempty words with total length at most `depth`.
pub fn word_pairs(dim: usize, depth: usize) -> Vec<(Word, Word)> {
    let mut out = Vec::new();
    for p in 1..depth {
        for q in 1..=(depth - p) {
            for a in Word::all(dim, p) {
                for b in Word::all(dim, q) {
                    out.push((a.clone(), b));
                }
            }
        }
    }
    out
}

/// Chen's relation `X_{i,k} ⊗ X_{k,j} = X_{i,j}` for an arbitrary
/// two-parameter family on `n` grid points, given as a closure. Triples are
/// enumerated exhaustively up to [`EXHAUSTIVE_CHEN_POINTS`] points and
/// sampled (seeded) above.
pub fn check_chen_family<F>(n: usize, tol: f64, seed: u64, increment: F) -> RelationReport
where
    F: Fn(usize, usize) -> TruncatedTensor + Sync,
{
    let triples: Vec<(usize, usize, usize)> = if n <= EXHAUSTIVE_CHEN_POINTS {
        let mut t = Vec::new();
        for i in 0..n {
            for k in i..n {
                for j in k..n {
                    t.push((i, k, j));
                }
            }
        }
        t
    } else {
        let mut rng = stream_rng(seed, 0xC4E4);
        (0..SAMPLED_TRIPLES)
            .map(|_| {
                let mut v = [
                    rng.random_range(0..n),
                    rng.random_range(0..n),
                    rng.random_range(0..n),
                ];
                v.sort_unstable();
                (v[0], v[1], v[2])
            })
            .collect()
    };
    let max_violation = triples
        .par_iter()
        .map(|&(i, k, j)| {
            let left = increment(i, k)
                .tensor_mul(&increment(k, j))
                .expect("consistent shapes");
            left.relative_distance(&increment(i, j))
                .expect("consistent shapes")
        })
        .reduce(|| 0.0, f64::max);
    RelationReport {
        max_violation,
        checked: triples.len(),
        passed: max_violation <= tol,
    }
}

/// Signature of the piecewise-linear interpolant: `X_{0,t_i}` is the product
/// of the segment exponentials `exp(Δ_1) ⊗ ... ⊗ exp(Δ_i)`.
pub fn signature_lift(path: &GridPath, depth: usize, alpha: f64) -> Result<RoughPathGrid> {
    if path.len() < 2 {
        return Err(Error::Usage("a lift needs at least two points".into()));
    }
    let dim = path.dim();
    check_shape(dim, depth)?;
    let mut elems = Vec::with_capacity(path.len());
    let mut current = TruncatedTensor::unit(dim, depth)?;
    let mut step = TruncatedTensor::unit(dim, depth)?;
    let mut next = TruncatedTensor::unit(dim, depth)?;
    let mut delta = vec![0.0; dim];
    elems.push(current.clone());
    for i in 1..path.len() {
        for (c, d) in delta.iter_mut().enumerate() {
            *d = path.value(i)[c] - path.value(i - 1)[c];
        }
        exp_into(&delta, &mut step);
        mul_into(&current, &step, &mut next);
        std::mem::swap(&mut current, &mut next);
        elems.push(current.clone());
    }
    RoughPathGrid::from_elements(path.times().to_vec(), elems, alpha)
}

/// Writes `level,norm` rows from a Hölder report.
pub fn write_norms_csv<W: Write>(report: &HoelderReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["level", "norm"])?;
    for (k, v) in report.per_level.iter().enumerate() {
        w.write_record([(k + 1).to_string(), v.to_string()])?;
    }
    w.write_record(["total".to_string(), report.total.to_string()])?;
    w.flush()?;
    Ok(())
}

//! Truncated tensor algebra `T^{<=N}(R^d)`.
//!
//! Elements are stored densely: level `k` holds the `d^k` coefficients of the
//! basis words of length `k` in lexicographic order, so the word
//! `(j_1, ..., j_k)` (letters `1..=d`) sits at flat index
//! `sum_i (j_i - 1) d^(k - i)`. All levels live in one contiguous buffer.
//!
//! The same space carries two products: the concatenation (tensor) product
//! used by Chen's relation and the shuffle product used by the weak
//! geometricity condition. The natural pairing identifies the space with its
//! dual, so `⟨g, u ⧢ v⟩ = ⟨g, u⟩⟨g, v⟩` can be checked coefficientwise.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};

/// Largest supported depth `N`.
pub const MAX_DEPTH: usize = 6;
/// Largest supported ambient dimension `d`.
pub const MAX_DIM: usize = 4;

/// Validates a `(dim, depth)` pair against the dense-storage limits.
pub fn check_shape(dim: usize, depth: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::ShapeLimit(format!(
            "dimension {dim} outside 1..={MAX_DIM}"
        )));
    }
    if depth > MAX_DEPTH {
        return Err(Error::ShapeLimit(format!(
            "depth {depth} exceeds {MAX_DEPTH}"
        )));
    }
    Ok(())
}

fn level_offsets(dim: usize, depth: usize) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(depth + 2);
    let mut acc = 0;
    let mut width = 1;
    for _ in 0..=depth {
        offsets.push(acc);
        acc += width;
        width *= dim;
    }
    offsets.push(acc);
    offsets
}

/// A word `e_{j_1} ⊗ ... ⊗ e_{j_k}` with letters in `1..=d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    /// The empty word, dual to the unit.
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word, checking every letter lies in `1..=dim`.
    pub fn new(letters: &[usize], dim: usize) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&l| l == 0 || l > dim) {
            return Err(Error::Usage(format!(
                "letter {bad} outside 1..={dim}"
            )));
        }
        Ok(Word(letters.iter().map(|&l| l as u8).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Letters, 1-based.
    pub fn letters(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&l| l as usize)
    }

    /// Lexicographic flat index within its level.
    pub fn flat_index(&self, dim: usize) -> usize {
        self.0
            .iter()
            .fold(0, |acc, &l| acc * dim + (l as usize - 1))
    }

    /// Inverse of [`Word::flat_index`].
    pub fn from_flat_index(dim: usize, len: usize, mut index: usize) -> Self {
        let mut letters = vec![0u8; len];
        for slot in letters.iter_mut().rev() {
            *slot = (index % dim) as u8 + 1;
            index /= dim;
        }
        Word(letters)
    }

    /// All `dim^len` words of the given length, in lexicographic order.
    pub fn all(dim: usize, len: usize) -> impl Iterator<Item = Word> {
        let count = dim.pow(len as u32);
        (0..count).map(move |i| Word::from_flat_index(dim, len, i))
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// Every split `(prefix, suffix)` with `prefix · suffix = self`.
    pub fn deconcatenations(&self) -> impl Iterator<Item = (Word, Word)> + '_ {
        (0..=self.0.len()).map(move |i| (Word(self.0[..i].to_vec()), Word(self.0[i..].to_vec())))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Element of the truncated tensor algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedTensor {
    dim: usize,
    depth: usize,
    data: Vec<f64>,
}

impl TruncatedTensor {
    pub fn zero(dim: usize, depth: usize) -> Result<Self> {
        check_shape(dim, depth)?;
        let len = level_offsets(dim, depth)[depth + 1];
        Ok(TruncatedTensor {
            dim,
            depth,
            data: vec![0.0; len],
        })
    }

    pub fn unit(dim: usize, depth: usize) -> Result<Self> {
        let mut t = Self::zero(dim, depth)?;
        t.data[0] = 1.0;
        Ok(t)
    }

    /// Builds an element from explicit levels; level `k` must have `d^k` entries.
    pub fn from_levels(dim: usize, depth: usize, levels: &[Vec<f64>]) -> Result<Self> {
        check_shape(dim, depth)?;
        if levels.len() != depth + 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} levels, got {}",
                depth + 1,
                levels.len()
            )));
        }
        let mut data = Vec::with_capacity(level_offsets(dim, depth)[depth + 1]);
        for (k, level) in levels.iter().enumerate() {
            let want = dim.pow(k as u32);
            if level.len() != want {
                return Err(Error::DimensionMismatch(format!(
                    "level {k} has {} entries, expected {want}",
                    level.len()
                )));
            }
            data.extend_from_slice(level);
        }
        Ok(TruncatedTensor { dim, depth, data })
    }

    /// The basis element dual to `word`.
    pub fn basis(dim: usize, depth: usize, word: &Word) -> Result<Self> {
        let mut t = Self::zero(dim, depth)?;
        if word.len() > depth {
            return Err(Error::Usage(format!(
                "word of length {} exceeds depth {depth}",
                word.len()
            )));
        }
        t.set(word, 1.0);
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    fn offset(&self, k: usize) -> usize {
        // (d^k - 1) / (d - 1) without the division special case
        let mut acc = 0;
        let mut width = 1;
        for _ in 0..k {
            acc += width;
            width *= self.dim;
        }
        acc
    }

    pub fn level(&self, k: usize) -> &[f64] {
        let start = self.offset(k);
        &self.data[start..start + self.dim.pow(k as u32)]
    }

    pub fn level_mut(&mut self, k: usize) -> &mut [f64] {
        let start = self.offset(k);
        let width = self.dim.pow(k as u32);
        &mut self.data[start..start + width]
    }

    /// All coefficients, level by level.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scalar(&self) -> f64 {
        self.data[0]
    }

    /// Coefficient of `word`; zero for words longer than the depth.
    pub fn get(&self, word: &Word) -> f64 {
        if word.len() > self.depth {
            return 0.0;
        }
        self.level(word.len())[word.flat_index(self.dim)]
    }

    pub fn set(&mut self, word: &Word, value: f64) {
        let idx = word.flat_index(self.dim);
        self.level_mut(word.len())[idx] = value;
    }

    /// Level 0 equals one to within `1e-12`.
    pub fn is_group_like(&self) -> bool {
        (self.data[0] - 1.0).abs() <= 1e-12
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Euclidean norm of level `k`.
    pub fn level_norm(&self, k: usize) -> f64 {
        self.level(k).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.depth != other.depth {
            return Err(Error::DimensionMismatch(format!(
                "(d={}, N={}) vs (d={}, N={})",
                self.dim, self.depth, other.dim, other.depth
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(TruncatedTensor { data, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(TruncatedTensor { data, ..*self })
    }

    pub fn scale(&self, factor: f64) -> Self {
        TruncatedTensor {
            data: self.data.iter().map(|v| v * factor).collect(),
            ..*self
        }
    }

    /// Largest coefficient difference, divided by `max(1, largest entry of
    /// either operand)`.
    pub fn relative_distance(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        let scale = self.max_abs().max(other.max_abs()).max(1.0);
        let diff = self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        Ok(diff / scale)
    }

    /// Truncated concatenation product `self ⊗ other`.
    pub fn tensor_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = TruncatedTensor {
            data: vec![0.0; self.data.len()],
            ..*self
        };
        mul_into(self, other, &mut out);
        Ok(out)
    }

    /// Truncated shuffle product `self ⧢ other`.
    pub fn shuffle_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let (d, n) = (self.dim, self.depth);
        let mut out = TruncatedTensor::zero(d, n)?;
        for p in 0..=n {
            let a = self.level(p);
            if a.iter().all(|&v| v == 0.0) {
                continue;
            }
            for q in 0..=(n - p) {
                let b = other.level(q);
                if b.iter().all(|&v| v == 0.0) {
                    continue;
                }
                let table = InterleaveTable::new(d, p, q);
                let start = out.offset(p + q);
                for (i, &ai) in a.iter().enumerate() {
                    if ai == 0.0 {
                        continue;
                    }
                    for (j, &bj) in b.iter().enumerate() {
                        if bj == 0.0 {
                            continue;
                        }
                        let c = ai * bj;
                        for m in 0..table.masks {
                            out.data[start + table.left[m * table.left_len + i] + table.right[m * table.right_len + j]] += c;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Natural pairing `Σ_k ⟨a_k, b_k⟩`.
    pub fn pairing(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    /// Tensor exponential of a level-1 vector: level `k` is `v^{⊗k} / k!`.
    pub fn exp(v: &[f64], depth: usize) -> Result<Self> {
        let dim = v.len();
        let mut out = Self::unit(dim, depth)?;
        exp_into(v, &mut out);
        Ok(out)
    }

    /// Inverse of a group-like element via the truncated Neumann series
    /// `Σ_k (-(a - 1))^{⊗k}`.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_group_like() {
            return Err(Error::NotGroupLike(self.data[0]));
        }
        let mut nil = self.clone();
        nil.data[0] = 0.0;
        let neg = nil.scale(-1.0);
        let mut result = Self::unit(self.dim, self.depth)?;
        let mut term = result.clone();
        for _ in 0..self.depth {
            term = term.tensor_mul(&neg)?;
            for (r, t) in result.data.iter_mut().zip(&term.data) {
                *r += t;
            }
        }
        Ok(result)
    }

    /// Writes `level,index,value` rows, one per coefficient, indices in
    /// lexicographic word order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["level", "index", "value"])?;
        for k in 0..=self.depth {
            for (i, v) in self.level(k).iter().enumerate() {
                w.write_record([k.to_string(), i.to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `out = a ⊗ b`; `out` must share the shape of `a` and `b`.
pub(crate) fn mul_into(a: &TruncatedTensor, b: &TruncatedTensor, out: &mut TruncatedTensor) {
    let d = a.dim;
    let n = a.depth;
    let offsets = level_offsets(d, n);
    out.data.iter_mut().for_each(|v| *v = 0.0);
    for r in 0..=n {
        let out_start = offsets[r];
        for p in 0..=r {
            let q = r - p;
            let a_lvl = &a.data[offsets[p]..offsets[p + 1]];
            let b_lvl = &b.data[offsets[q]..offsets[q + 1]];
            let bw = b_lvl.len();
            for (i, &ai) in a_lvl.iter().enumerate() {
                if ai == 0.0 {
                    continue;
                }
                let row = &mut out.data[out_start + i * bw..out_start + (i + 1) * bw];
                for (o, &bj) in row.iter_mut().zip(b_lvl) {
                    *o += ai * bj;
                }
            }
        }
    }
}

/// Overwrites `out` with `exp(v)`.
pub(crate) fn exp_into(v: &[f64], out: &mut TruncatedTensor) {
    let d = out.dim;
    let offsets = level_offsets(d, out.depth);
    out.data[0] = 1.0;
    for k in 1..=out.depth {
        let (prev, cur) = out.data.split_at_mut(offsets[k]);
        let prev = &prev[offsets[k - 1]..];
        let inv_k = 1.0 / k as f64;
        for (i, &pi) in prev.iter().enumerate() {
            for (c, &vc) in v.iter().enumerate() {
                cur[i * d + c] = pi * vc * inv_k;
            }
        }
    }
}

/// Output offsets for every interleaving of a length-`p` word with a
/// length-`q` word: the shuffled word's flat index is
/// `left[mask][i] + right[mask][j]`.
struct InterleaveTable {
    masks: usize,
    left_len: usize,
    right_len: usize,
    left: Vec<usize>,
    right: Vec<usize>,
}

impl InterleaveTable {
    fn new(dim: usize, p: usize, q: usize) -> Self {
        let n = p + q;
        let masks: Vec<u32> = (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize == p)
            .collect();
        let left_len = dim.pow(p as u32);
        let right_len = dim.pow(q as u32);
        let mut left = Vec::with_capacity(masks.len() * left_len);
        let mut right = Vec::with_capacity(masks.len() * right_len);
        for &mask in &masks {
            // position weights, position 0 is the most significant letter
            let mut wl = Vec::with_capacity(p);
            let mut wr = Vec::with_capacity(q);
            for pos in 0..n {
                let weight = dim.pow((n - 1 - pos) as u32);
                if mask & (1 << pos) != 0 {
                    wl.push(weight);
                } else {
                    wr.push(weight);
                }
            }
            for i in 0..left_len {
                left.push(digit_weighted(i, dim, &wl));
            }
            for j in 0..right_len {
                right.push(digit_weighted(j, dim, &wr));
            }
        }
        InterleaveTable {
            masks: masks.len(),
            left_len,
            right_len,
            left,
            right,
        }
    }
}

fn digit_weighted(mut index: usize, dim: usize, weights: &[usize]) -> usize {
    let mut acc = 0;
    for w in weights.iter().rev() {
        acc += (index % dim) * w;
        index /= dim;
    }
    acc
}

/// Shuffle product of two words as a list of `(word, multiplicity)` pairs,
/// sorted lexicographically.
pub fn shuffle_words(a: &Word, b: &Word) -> Vec<(Word, u64)> {
    let mut acc: std::collections::BTreeMap<Word, u64> = std::collections::BTreeMap::new();
    let (p, q) = (a.len(), b.len());
    for mask in 0u32..(1 << (p + q)) {
        if mask.count_ones() as usize != p {
            continue;
        }
        let (mut ia, mut ib) = (0, 0);
        let mut letters = Vec::with_capacity(p + q);
        for pos in 0..p + q {
            if mask & (1 << pos) != 0 {
                letters.push(a.0[ia]);
                ia += 1;
            } else {
                letters.push(b.0[ib]);
                ib += 1;
            }
        }
        *acc.entry(Word(letters)).or_insert(0) += 1;
    }
    acc.into_iter().collect()
}

/// `⟨x, a ⧢ b⟩` evaluated coefficientwise.
pub fn pair_with_shuffle(x: &TruncatedTensor, a: &Word, b: &Word) -> f64 {
    shuffle_words(a, b)
        .into_iter()
        .map(|(w, c)| c as f64 * x.get(&w))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(letters: &[usize], d: usize) -> Word {
        Word::new(letters, d).unwrap()
    }

    #[test]
    fn basis_product_is_concatenation() {
        let e1 = TruncatedTensor::basis(2, 3, &w(&[1], 2)).unwrap();
        let e2 = TruncatedTensor::basis(2, 3, &w(&[2], 2)).unwrap();
        let prod = e1.tensor_mul(&e2).unwrap();
        let expected = TruncatedTensor::basis(2, 3, &w(&[1, 2], 2)).unwrap();
        assert_eq!(prod, expected);
    }

    #[test]
    fn unit_is_identity() {
        let a = TruncatedTensor::exp(&[0.3, -1.2], 4).unwrap();
        let one = TruncatedTensor::unit(2, 4).unwrap();
        assert_eq!(one.tensor_mul(&a).unwrap(), a);
        assert_eq!(a.tensor_mul(&one).unwrap(), a);
        assert_eq!(a.shuffle_mul(&one).unwrap(), a);
    }

    #[test]
    fn two_letter_shuffle() {
        let e1 = TruncatedTensor::basis(2, 2, &w(&[1], 2)).unwrap();
        let e2 = TruncatedTensor::basis(2, 2, &w(&[2], 2)).unwrap();
        let s = e1.shuffle_mul(&e2).unwrap();
        assert_eq!(s.get(&w(&[1, 2], 2)), 1.0);
        assert_eq!(s.get(&w(&[2, 1], 2)), 1.0);
        assert_eq!(s.level(1).iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn letter_shuffled_into_word() {
        // (1) ⧢ (12) = 2·(112) + (121)
        let a = TruncatedTensor::basis(2, 3, &w(&[1], 2)).unwrap();
        let b = TruncatedTensor::basis(2, 3, &w(&[1, 2], 2)).unwrap();
        let s = a.shuffle_mul(&b).unwrap();
        assert_eq!(s.get(&w(&[1, 1, 2], 2)), 2.0);
        assert_eq!(s.get(&w(&[1, 2, 1], 2)), 1.0);
        assert_eq!(s.level(3).iter().sum::<f64>(), 3.0);
    }

    #[test]
    fn scalar_exponential_series() {
        let e = TruncatedTensor::exp(&[2.0], 3).unwrap();
        assert_eq!(e.as_slice(), &[1.0, 2.0, 2.0, 4.0 / 3.0]);
        let zero = TruncatedTensor::exp(&[0.0, 0.0], 3).unwrap();
        assert_eq!(zero, TruncatedTensor::unit(2, 3).unwrap());
    }

    #[test]
    fn pairing_of_basis_and_unit() {
        let b = TruncatedTensor::basis(2, 2, &w(&[1, 2], 2)).unwrap();
        assert_eq!(b.pairing(&b).unwrap(), 1.0);
        let one = TruncatedTensor::unit(3, 4).unwrap();
        assert_eq!(one.pairing(&one).unwrap(), 1.0);
    }

    #[test]
    fn inverse_of_exponential() {
        let v = [0.7, -0.4, 1.1];
        let e = TruncatedTensor::exp(&v, 4).unwrap();
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let inv = e.inverse().unwrap();
        let expected = TruncatedTensor::exp(&neg, 4).unwrap();
        assert!(inv.relative_distance(&expected).unwrap() < 1e-12);
        let one = TruncatedTensor::unit(3, 4).unwrap();
        assert_eq!(one.inverse().unwrap(), one);
    }

    #[test]
    fn inverse_rejects_non_group_like() {
        let z = TruncatedTensor::zero(2, 2).unwrap();
        assert!(matches!(z.inverse(), Err(Error::NotGroupLike(_))));
    }

    #[test]
    fn shape_checks() {
        assert!(matches!(TruncatedTensor::zero(5, 2), Err(Error::ShapeLimit(_))));
        assert!(matches!(TruncatedTensor::zero(2, 7), Err(Error::ShapeLimit(_))));
        let a = TruncatedTensor::unit(2, 3).unwrap();
        let b = TruncatedTensor::unit(2, 2).unwrap();
        assert!(matches!(a.tensor_mul(&b), Err(Error::DimensionMismatch(_))));
        assert!(matches!(a.shuffle_mul(&b), Err(Error::DimensionMismatch(_))));
        assert!(matches!(a.pairing(&b), Err(Error::DimensionMismatch(_))));
        assert!(Word::new(&[3], 2).is_err());
    }

    #[test]
    fn word_index_roundtrip() {
        for len in 0..4 {
            for (i, word) in Word::all(3, len).enumerate() {
                assert_eq!(word.flat_index(3), i);
            }
        }
        assert_eq!(w(&[2, 1, 3], 3).flat_index(3), 9 + 2);
    }

    #[test]
    fn csv_rows_in_lexicographic_order() {
        let e = TruncatedTensor::exp(&[1.0, 2.0], 2).unwrap();
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "level,index,value");
        assert_eq!(lines.len(), 1 + 1 + 2 + 4);
        assert_eq!(lines[4], "2,0,0.5");
        assert_eq!(lines[5], "2,1,1");
    }
}

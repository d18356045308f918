//! Word combinatorics computed from first principles. Letters are 1-based.

use crate::error::{Error, Result};

/// Longest combined length accepted by [`shuffle_enumerate`].
pub const MAX_SHUFFLE_LETTERS: usize = 8;

fn interleave(a: &[usize], b: &[usize], prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if a.is_empty() || b.is_empty() {
        let mut w = prefix.clone();
        w.extend_from_slice(a);
        w.extend_from_slice(b);
        out.push(w);
        return;
    }
    prefix.push(a[0]);
    interleave(&a[1..], b, prefix, out);
    prefix.pop();
    prefix.push(b[0]);
    interleave(a, &b[1..], prefix, out);
    prefix.pop();
}

/// Every interleaving of `a` and `b`, with repetitions, sorted.
pub fn shuffle_enumerate(a: &[usize], b: &[usize]) -> Result<Vec<Vec<usize>>> {
    if a.len() + b.len() > MAX_SHUFFLE_LETTERS {
        return Err(Error::ShapeLimit(format!(
            "shuffle enumeration is capped at {MAX_SHUFFLE_LETTERS} letters, got {}",
            a.len() + b.len()
        )));
    }
    let mut out = Vec::new();
    interleave(a, b, &mut Vec::new(), &mut out);
    out.sort();
    Ok(out)
}

/// Coefficient of the word in `exp(v)`: `Π v_{w_i} / |w|!`.
pub fn exp_entry(v: &[f64], word: &[usize]) -> f64 {
    let mut acc = 1.0;
    for (i, &l) in word.iter().enumerate() {
        acc *= v[l - 1] / (i + 1) as f64;
    }
    acc
}

/// Coefficient of the word in the signature of the piecewise-linear path
/// with the given segment increments, summing over every way of spreading
/// the word's letters across consecutive segments.
pub fn segment_signature_entry(increments: &[Vec<f64>], word: &[usize]) -> f64 {
    let k = word.len();
    // tail[p] = coefficient of word[p..] over the segments not yet used
    let mut tail = vec![0.0; k + 1];
    tail[k] = 1.0;
    for inc in increments.iter().rev() {
        let mut next = vec![0.0; k + 1];
        for (p, slot) in next.iter_mut().enumerate() {
            *slot = (p..=k).map(|e| exp_entry(inc, &word[p..e]) * tail[e]).sum();
        }
        tail = next;
    }
    tail[0]
}

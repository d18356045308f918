//! The splitting map `δ_j`.
//!
//! On a letter, `δ_j(v) = v⊗1⊗…⊗1 + … + 1⊗…⊗1⊗v`; extended multiplicatively
//! to words it distributes the letters of a word into `j` ordered slots, each
//! slot keeping the letters in their original order. Restricted to words of
//! length `r` and to slots that are all nonempty, the terms are indexed by
//! surjections from letter positions onto slots.

/// A block `(i_1, …, i_j)` of `δ_j` on level `r`, with the number of letter
/// distributions producing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitBlock {
    pub parts: Vec<usize>,
    pub coefficient: u64,
}

/// Compositions of `r` into `j` positive parts, in lexicographic order.
pub fn compositions(r: usize, j: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 0 {
            if left == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        // leave at least one letter for each remaining slot
        for first in 1..=left.saturating_sub(slots - 1) {
            prefix.push(first);
            rec(left - first, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if j == 0 || j > r {
        return out;
    }
    rec(r, j, &mut Vec::with_capacity(j), &mut out);
    out
}

/// Multinomial `r! / (i_1! ⋯ i_j!)`.
pub fn multinomial(parts: &[usize]) -> u64 {
    let mut acc = 1u64;
    let mut n = 0u64;
    for &p in parts {
        for k in 1..=p as u64 {
            n += 1;
            acc = acc * n / k;
        }
    }
    acc
}

/// Blocks of `δ_j` on level `r` with their multiplicities. Empty when
/// `j > r` or `j = 0`.
pub fn delta_split(r: usize, j: usize) -> Vec<SplitBlock> {
    compositions(r, j)
        .into_iter()
        .map(|parts| {
            let coefficient = multinomial(&parts);
            SplitBlock { parts, coefficient }
        })
        .collect()
}

/// Every order-preserving distribution of `r` letter positions into `j`
/// nonempty slots, as the slot index of each position.
pub fn distributions(r: usize, j: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for parts in compositions(r, j) {
        let mut assignment = vec![usize::MAX; r];
        fill_slots(&parts, 0, &mut assignment, &mut out);
    }
    out
}

fn fill_slots(parts: &[usize], slot: usize, assignment: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if slot == parts.len() {
        out.push(assignment.clone());
        return;
    }
    let free: Vec<usize> = (0..assignment.len())
        .filter(|&p| assignment[p] == usize::MAX)
        .collect();
    for chosen in combinations(&free, parts[slot]) {
        for &p in &chosen {
            assignment[p] = slot;
        }
        fill_slots(parts, slot + 1, assignment, out);
        for &p in &chosen {
            assignment[p] = usize::MAX;
        }
    }
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

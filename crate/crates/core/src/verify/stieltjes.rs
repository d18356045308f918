//! Riemann–Stieltjes integrals `∫ Z dX` of smooth integrands by the
//! trapezoid rule with Romberg extrapolation.

use super::{digest_inputs, OracleResult};
use crate::error::{Error, Result};

const MAX_LEVEL: usize = 16;

fn trapezoid<Z, X>(z: &Z, x: &X, s: f64, t: f64, panels: usize) -> Vec<f64>
where
    Z: Fn(f64) -> Vec<f64>,
    X: Fn(f64) -> Vec<f64>,
{
    let h = (t - s) / panels as f64;
    let point = |i: usize| if i == panels { t } else { s + i as f64 * h };
    let (mut z0, mut x0) = (z(s), x(s));
    let d = x0.len();
    let m = z0.len() / d;
    let mut acc = vec![0.0; m];
    for i in 1..=panels {
        let u = point(i);
        let (z1, x1) = (z(u), x(u));
        for (r, a) in acc.iter_mut().enumerate() {
            for c in 0..d {
                *a += 0.5 * (z0[r * d + c] + z1[r * d + c]) * (x1[c] - x0[c]);
            }
        }
        z0 = z1;
        x0 = x1;
    }
    acc
}

/// `∫_s^t Z dX` for `Z: R → L(R^d, R^m)` (row-major `m × d`) and
/// `X: R → R^d`. The estimate is the change between the last two diagonal
/// Romberg entries.
pub fn riemann_stieltjes<Z, X>(z: Z, x: X, s: f64, t: f64) -> OracleResult
where
    Z: Fn(f64) -> Vec<f64>,
    X: Fn(f64) -> Vec<f64>,
{
    let mut rows: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut best = Vec::new();
    let mut estimate = f64::INFINITY;
    for level in 0..=MAX_LEVEL {
        let mut row = vec![trapezoid(&z, &x, s, t, 1 << level)];
        for j in 1..=level {
            let factor = 4f64.powi(j as i32);
            let prev = &rows[level - 1][j - 1];
            let next: Vec<f64> = row[j - 1]
                .iter()
                .zip(prev)
                .map(|(a, b)| (factor * a - b) / (factor - 1.0))
                .collect();
            row.push(next);
        }
        let diag = row[level].clone();
        if level > 0 {
            estimate = diag.iter().zip(&best).map(|(a, b): (&f64, &f64)| (a - b).abs()).fold(0.0, f64::max);
            let scale = diag.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            best = diag;
            if level >= 4 && estimate < 1e-14 * scale {
                break;
            }
        } else {
            best = diag;
        }
        rows.push(row);
    }
    OracleResult {
        name: "riemann_stieltjes".into(),
        values: best,
        error_estimate: estimate,
        digest: digest_inputs("riemann_stieltjes", &[s, t]),
    }
}

/// `∫ Z dX` from values on a common uniform grid with `4k + 1` points:
/// trapezoid sums at strides 1, 2 and 4, Richardson-extrapolated.
pub fn stieltjes_on_grid(z: &[Vec<f64>], x: &[Vec<f64>]) -> Result<OracleResult> {
    let n = x.len();
    if z.len() != n || n < 5 || (n - 1) % 4 != 0 {
        return Err(Error::Usage(format!(
            "grid oracle needs matching grids of 4k + 1 points, got {} and {n}",
            z.len()
        )));
    }
    let d = x[0].len();
    let m = z[0].len() / d;
    let sum = |stride: usize| -> Vec<f64> {
        let mut acc = vec![0.0; m];
        let mut i = 0;
        while i + stride < n {
            let j = i + stride;
            for (r, a) in acc.iter_mut().enumerate() {
                for c in 0..d {
                    *a += 0.5 * (z[i][r * d + c] + z[j][r * d + c]) * (x[j][c] - x[i][c]);
                }
            }
            i = j;
        }
        acc
    };
    let (t1, t2, t4) = (sum(1), sum(2), sum(4));
    let r1: Vec<f64> = t1.iter().zip(&t2).map(|(a, b)| (4.0 * a - b) / 3.0).collect();
    let r2: Vec<f64> = t2.iter().zip(&t4).map(|(a, b)| (4.0 * a - b) / 3.0).collect();
    let values: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| (16.0 * a - b) / 15.0).collect();
    let error_estimate = values.iter().zip(&r1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let flat: Vec<f64> = z.iter().chain(x).flatten().copied().collect();
    Ok(OracleResult {
        name: "stieltjes_on_grid".into(),
        values,
        error_estimate,
        digest: digest_inputs("stieltjes_on_grid", &flat),
    })
}

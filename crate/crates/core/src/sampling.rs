//! Seeded random streams and Brownian sample paths.
//!
//! Every random quantity is drawn from a ChaCha8 generator keyed by
//! `(seed, stream)`, so independent pieces of a simulation can be produced
//! in any order, or in parallel, with identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::rough_path::GridPath;

/// Generator for the given `(seed, stream)` pair.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Standard `dim`-dimensional Brownian motion on `[0, horizon]` sampled at
/// `steps + 1` uniform points, started at the origin.
pub fn brownian_path(seed: u64, dim: usize, steps: usize, horizon: f64) -> Result<GridPath> {
    let dt = horizon / steps as f64;
    let sd = dt.sqrt();
    let mut rngs: Vec<ChaCha8Rng> = (0..dim as u64).map(|c| stream_rng(seed, c)).collect();
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut current = vec![0.0; dim];
    times.push(0.0);
    values.push(current.clone());
    for i in 1..=steps {
        for (x, rng) in current.iter_mut().zip(rngs.iter_mut()) {
            *x += sd * standard_normal(rng);
        }
        times.push(i as f64 * dt);
        values.push(current.clone());
    }
    GridPath::new(times, values)
}

/// Keeps every `stride`-th point of a path (and always the last one).
pub fn subsample(path: &GridPath, stride: usize) -> Result<GridPath> {
    let n = path.len();
    let mut idx: Vec<usize> = (0..n).step_by(stride.max(1)).collect();
    if *idx.last().unwrap() != n - 1 {
        idx.push(n - 1);
    }
    GridPath::new(
        idx.iter().map(|&i| path.times()[i]).collect(),
        idx.iter().map(|&i| path.value(i).to_vec()).collect(),
    )
}

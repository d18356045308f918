use std::io::Write;

use serde::Serialize;

use super::grid::PeriodicGrid;
use crate::error::{Error, Result};

/// Values on a `slices × dim × nx` space-time grid, component rows
/// contiguous within each time slice.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    slices: usize,
    dim: usize,
    nx: usize,
    data: Vec<f64>,
}

impl GridField {
    pub fn zeros(slices: usize, dim: usize, nx: usize) -> Self {
        GridField {
            slices,
            dim,
            nx,
            data: vec![0.0; slices * dim * nx],
        }
    }

    /// `value(n, c, j)` at time slice `n`, component `c`, grid point `j`.
    pub fn from_fn<F: Fn(usize, usize, usize) -> f64>(slices: usize, dim: usize, nx: usize, value: F) -> Self {
        let mut f = Self::zeros(slices, dim, nx);
        for n in 0..slices {
            for c in 0..dim {
                for (j, v) in f.slice_mut(n, c).iter_mut().enumerate() {
                    *v = value(n, c, j);
                }
            }
        }
        f
    }

    pub(crate) fn from_slices(dim: usize, nx: usize, slices: Vec<Vec<f64>>) -> Self {
        let n = slices.len();
        let data: Vec<f64> = slices.into_iter().flatten().collect();
        debug_assert_eq!(data.len(), n * dim * nx);
        GridField {
            slices: n,
            dim,
            nx,
            data,
        }
    }

    pub fn slices(&self) -> usize {
        self.slices
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn slice(&self, n: usize, c: usize) -> &[f64] {
        let start = (n * self.dim + c) * self.nx;
        &self.data[start..start + self.nx]
    }

    pub fn slice_mut(&mut self, n: usize, c: usize) -> &mut [f64] {
        let start = (n * self.dim + c) * self.nx;
        &mut self.data[start..start + self.nx]
    }

    /// All components of slice `n`.
    pub fn time_slice(&self, n: usize) -> &[f64] {
        let len = self.dim * self.nx;
        &self.data[n * len..(n + 1) * len]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if (self.slices, self.dim, self.nx) != (other.slices, other.dim, other.nx) {
            return Err(Error::DimensionMismatch(format!(
                "grid fields of shape {}x{}x{} and {}x{}x{}",
                self.slices, self.dim, self.nx, other.slices, other.dim, other.nx
            )));
        }
        Ok(())
    }

    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_same(other)?;
        let data = self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect();
        Ok(GridField { data, ..*self })
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max))
    }

    /// `sup_t (sup_x |v_t| + sup_x |∂_x v_t|)` with Euclidean norms over
    /// components and dealiased spectral derivatives.
    pub fn c1_norm(&self, grid: &PeriodicGrid) -> f64 {
        (0..self.slices)
            .map(|n| {
                let derivs: Vec<Vec<f64>> = (0..self.dim).map(|c| grid.derivative(self.slice(n, c))).collect();
                let mut sup = 0.0f64;
                let mut dsup = 0.0f64;
                for j in 0..self.nx {
                    let v: f64 = (0..self.dim).map(|c| self.slice(n, c)[j].powi(2)).sum();
                    let dv: f64 = derivs.iter().map(|d| d[j] * d[j]).sum();
                    sup = sup.max(v.sqrt());
                    dsup = dsup.max(dv.sqrt());
                }
                sup + dsup
            })
            .fold(0.0, f64::max)
    }
}

/// Record of one local Picard solve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentTrace {
    pub start_time: f64,
    /// Accepted horizon `T`.
    pub horizon: f64,
    pub steps: usize,
    /// `‖w_n‖_{1,T}`, starting with `w_0 = 0`.
    pub iterate_norms: Vec<f64>,
    /// `‖w_n - w_{n-1}‖_{1,T}` for `n >= 1`.
    pub differences: Vec<f64>,
    /// `d_n / d_{n-1}` for `n >= 2`; `None` when either difference sits at
    /// the roundoff floor.
    pub ratios: Vec<Option<f64>>,
    /// Largest recorded ratio, 0 when none was recorded.
    pub contraction_ratio: f64,
    /// Horizons tried and rejected before `horizon`.
    pub rejected_horizons: Vec<f64>,
}

/// Picard iteration history over all local solves.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PicardTrace {
    pub segments: Vec<SegmentTrace>,
}

impl PicardTrace {
    /// Largest contraction ratio over all segments.
    pub fn contraction_ratio(&self) -> f64 {
        self.segments.iter().map(|s| s.contraction_ratio).fold(0.0, f64::max)
    }

    /// Horizon accepted by the first local solve.
    pub fn accepted_horizon(&self) -> Option<f64> {
        self.segments.first().map(|s| s.horizon)
    }

    /// Start times of every local solve after the first.
    pub fn restart_times(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.start_time).collect()
    }

    /// Rows `segment, start_time, horizon, iteration, norm, difference, ratio`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["segment", "start_time", "horizon", "iteration", "norm", "difference", "ratio"])?;
        for (s, seg) in self.segments.iter().enumerate() {
            for (it, norm) in seg.iterate_norms.iter().enumerate() {
                let diff = if it == 0 { String::new() } else { seg.differences[it - 1].to_string() };
                let ratio = match it.checked_sub(2).and_then(|i| seg.ratios.get(i)) {
                    Some(Some(r)) => r.to_string(),
                    _ => String::new(),
                };
                w.write_record([
                    s.to_string(),
                    seg.start_time.to_string(),
                    seg.horizon.to_string(),
                    it.to_string(),
                    norm.to_string(),
                    diff,
                    ratio,
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// A solve on the time grid: the fixed point `w`, the free evolution
/// `U_t = S_t(u_0 - h_0)` (restarted at every restart time), the driver `H`
/// and `u = w + H + U`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionField {
    pub(crate) times: Vec<f64>,
    pub(crate) w: GridField,
    pub(crate) linear: GridField,
    pub(crate) driver: GridField,
    pub(crate) u: GridField,
    pub(crate) restarts: Vec<usize>,
    pub(crate) trace: PicardTrace,
}

impl SolutionField {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn nx(&self) -> usize {
        self.u.nx()
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    pub fn points(&self) -> Vec<f64> {
        let h = 2.0 * std::f64::consts::PI / self.nx() as f64;
        (0..self.nx()).map(|j| h * j as f64).collect()
    }

    pub fn u(&self) -> &GridField {
        &self.u
    }

    pub fn w(&self) -> &GridField {
        &self.w
    }

    /// `U`.
    pub fn linear(&self) -> &GridField {
        &self.linear
    }

    /// `H` on the solution grid.
    pub fn driver(&self) -> &GridField {
        &self.driver
    }

    /// `v = u - H`.
    pub fn v(&self) -> GridField {
        self.u.combine(1.0, &self.driver, -1.0).expect("same shape")
    }

    /// Time indices at which a local solve restarted.
    pub fn restart_indices(&self) -> &[usize] {
        &self.restarts
    }

    pub fn trace(&self) -> &PicardTrace {
        &self.trace
    }

    /// `max |u - w - H - U|` over the grid.
    pub fn bookkeeping_error(&self) -> f64 {
        self.u
            .as_slice()
            .iter()
            .zip(self.w.as_slice())
            .zip(self.driver.as_slice().iter().zip(self.linear.as_slice()))
            .map(|((u, w), (h, l))| (u - w - h - l).abs())
            .fold(0.0, f64::max)
    }

    /// Last time slice of `u`, components concatenated.
    pub fn final_state(&self) -> &[f64] {
        self.u.time_slice(self.times.len() - 1)
    }

    /// `max |u - other.u|` on a common grid.
    pub fn max_distance(&self, other: &SolutionField) -> Result<f64> {
        self.u.max_abs_diff(&other.u)
    }

    /// Rows `t, x, u1, …, ud`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string(), "x".to_string()];
        header.extend((1..=self.dim()).map(|c| format!("u{c}")));
        w.write_record(&header)?;
        let xs = self.points();
        for (n, t) in self.times.iter().enumerate() {
            for (j, x) in xs.iter().enumerate() {
                let mut row = vec![t.to_string(), x.to_string()];
                row.extend((0..self.dim()).map(|c| self.u.slice(n, c)[j].to_string()));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// A solve that could not continue, with what was computed before.
#[derive(Debug)]
pub struct SolverFailure {
    pub message: String,
    pub trace: PicardTrace,
    pub partial: Option<SolutionField>,
}

impl From<SolverFailure> for Error {
    fn from(f: SolverFailure) -> Self {
        Error::Solver(Box::new(f))
    }
}

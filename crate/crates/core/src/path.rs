//! Sampled paths on a uniform time grid, running maxima, relative drawdown
//! and grid-level stopping times.
//!
//! Hitting times are detected at the first grid point past the threshold
//! (`>=` for levels, `<=` for drawdown floors). There is no sub-grid
//! interpolation, so every pathwise identity holds exactly on the grid.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Default relative tolerance for [`is_time_of_maximum`].
pub const DEFAULT_MAX_TOL: f64 = 1e-12;

/// Uniform grid `t_k = k * dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::invalid("grid needs at least one step"));
        }
        Ok(Self { dt, n_steps })
    }

    /// Grid covering `[0, t_max]` with `ceil(t_max / dt)` steps.
    pub fn with_horizon(dt: f64, t_max: f64) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::invalid(format!("horizon must be positive, got {t_max}")));
        }
        let steps = (t_max / dt - 1e-9).ceil().max(1.0);
        if !steps.is_finite() || steps > 1e10 {
            return Err(Error::invalid("horizon / dt is too large"));
        }
        Self::new(dt, steps as usize)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.n_steps)
    }
}

/// Grid index of a stopping time, or `Never` when the event does not occur
/// on the grid. `Never` compares greater than every index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StopIndex {
    At(usize),
    Never,
}

impl StopIndex {
    pub const ZERO: StopIndex = StopIndex::At(0);

    pub fn index(self) -> Option<usize> {
        match self {
            StopIndex::At(k) => Some(k),
            StopIndex::Never => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, StopIndex::At(_))
    }

    /// Index clamped to the last grid point (`Never` maps to `last`).
    pub fn clamp_to(self, last: usize) -> usize {
        match self {
            StopIndex::At(k) => k.min(last),
            StopIndex::Never => last,
        }
    }

    /// First index strictly after this one.
    fn next_start(self) -> Option<usize> {
        self.index().map(|k| k + 1)
    }
}

impl fmt::Display for StopIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopIndex::At(k) => write!(f, "{k}"),
            StopIndex::Never => f.write_str("inf"),
        }
    }
}

/// Nonnegative values on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl SampledPath {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "path has {} values but grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        check_values(&values)?;
        Ok(Self { grid, values })
    }

    /// Path with step `dt` and as many points as `values`. A single value
    /// is not enough to define a grid.
    pub fn from_values(dt: f64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("empty path"));
        }
        if values.len() == 1 {
            return Err(Error::invalid("path needs at least two points"));
        }
        let grid = TimeGrid::new(dt, values.len() - 1)?;
        Self::new(grid, values)
    }

    /// Skips validation; callers guarantee nonnegative finite values.
    pub(crate) fn from_parts_unchecked(grid: TimeGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last_index(&self) -> usize {
        self.values.len() - 1
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Value at a stopping time; `Never` reads the final grid point.
    pub fn at(&self, t: StopIndex) -> f64 {
        self.values[t.clamp_to(self.last_index())]
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().copied().map(f).collect())
    }
}

fn check_values(values: &[f64]) -> Result<()> {
    for (k, &v) in values.iter().enumerate() {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::invalid(format!(
                "path value at index {k} must be finite and nonnegative, got {v}"
            )));
        }
    }
    Ok(())
}

/// Prefix maximum of a slice.
pub fn running_max_slice(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut m = f64::NEG_INFINITY;
    for &v in values {
        if v > m {
            m = v;
        }
        out.push(m);
    }
    out
}

/// `X*_t = sup_{u <= t} X_u` on the grid.
pub fn running_max(path: &SampledPath) -> SampledPath {
    SampledPath::from_parts_unchecked(path.grid, running_max_slice(&path.values))
}

/// `X / X*`, valued in `[0, 1]` and equal to 1 at every time of maximum.
pub fn relative_drawdown(path: &SampledPath) -> Result<SampledPath> {
    if path.values[0] <= 0.0 {
        return Err(Error::invalid("relative drawdown needs a positive initial value"));
    }
    let values = relative_drawdown_slice(&path.values);
    Ok(SampledPath::from_parts_unchecked(path.grid, values))
}

pub(crate) fn relative_drawdown_slice(values: &[f64]) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    values
        .iter()
        .map(|&v| {
            if v > m {
                m = v;
            }
            v / m
        })
        .collect()
}

/// Smallest index `k > after` with `values[k] >= level`.
///
/// With `level = exp(l)` applied to the numeraire this realizes the
/// log-scale level-crossing time `tau_l`.
pub fn first_hit_level(path: &SampledPath, level: f64, after: StopIndex) -> StopIndex {
    let Some(start) = after.next_start() else {
        return StopIndex::Never;
    };
    path.values
        .iter()
        .enumerate()
        .skip(start)
        .find(|&(_, &v)| v >= level)
        .map_or(StopIndex::Never, |(k, _)| StopIndex::At(k))
}

/// Smallest index `k > after` with `X_k / X*_k <= alpha`; the running
/// maximum is taken from time zero.
pub fn first_drawdown_hit(path: &SampledPath, alpha: f64, after: StopIndex) -> Result<StopIndex> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "drawdown level must lie in (0, 1), got {alpha}"
        )));
    }
    let Some(start) = after.next_start() else {
        return Ok(StopIndex::Never);
    };
    let mut m = f64::NEG_INFINITY;
    for (k, &v) in path.values.iter().enumerate() {
        if v > m {
            m = v;
        }
        if k >= start && v <= alpha * m {
            return Ok(StopIndex::At(k));
        }
    }
    Ok(StopIndex::Never)
}

/// Whether `t` is a time of maximum: `|X_t - X*_t| <= tol * X*_t`.
/// `Never` counts as a time of maximum.
pub fn is_time_of_maximum(path: &SampledPath, t: StopIndex, tol: f64) -> Result<bool> {
    let k = match t {
        StopIndex::Never => return Ok(true),
        StopIndex::At(k) => k,
    };
    if k >= path.len() {
        return Err(Error::invalid(format!(
            "index {k} is off the grid of {} points",
            path.len()
        )));
    }
    let m = path.values[..=k].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((path.values[k] - m).abs() <= tol * m)
}

pub(crate) fn cmp_f64(a: &f64, b: &f64) -> Ordering {
    a.total_cmp(b)
}

//! Ito-diffusion market simulation and the numeraire (growth-optimal)
//! portfolio.
//!
//! Prices follow `dS^i / S^i = b^i dt + sum_j sigma^{ij} dW^j` and are
//! simulated with the log-Euler scheme, which is exact in law for constant
//! coefficients. Strategies are parametrized by the fraction of wealth held
//! in each asset; the remainder sits in the baseline asset (constant 1).
//! The numeraire holds `pi = c^+ b` with `c = sigma sigma^T`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::par;
use crate::path::{SampledPath, TimeGrid};
use crate::rng::PathRng;

/// Eigenvalue cutoff for the pseudo-inverse, relative to the spectral radius.
pub const DEFAULT_PINV_TOL: f64 = 1e-10;

/// Minimum-norm solution `rho` of `c rho = b` via the spectral decomposition
/// of the symmetric PSD matrix `c`.
///
/// Eigenvalues below `tol * lambda_max` are treated as zero. Fails with
/// [`Error::NoNumeraire`] when `b` is not in the range of `c`, i.e. when
/// `|c rho - b| > tol * |b|`.
pub fn pseudo_inverse_drift_solve(c: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
    let d = b.len();
    if c.nrows() != d || c.ncols() != d {
        return Err(Error::invalid(format!(
            "covariance is {}x{} but drift has {d} entries",
            c.nrows(),
            c.ncols()
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(format!(
            "pseudo-inverse tolerance must be positive, got {tol}"
        )));
    }
    if c.iter().chain(b.iter()).any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite covariance or drift"));
    }
    let scale = c.amax().max(f64::MIN_POSITIVE);
    if (c - c.transpose()).amax() > 1e-12 * scale {
        return Err(Error::invalid("covariance is not symmetric"));
    }
    let eig = SymmetricEigen::new(c.clone());
    let lambda_max = eig.eigenvalues.iter().copied().fold(0.0f64, |a, l| a.max(l.abs()));
    if eig.eigenvalues.iter().any(|&l| l < -tol * lambda_max.max(1.0)) {
        return Err(Error::invalid("covariance is not positive semidefinite"));
    }
    let cutoff = tol * lambda_max;
    let coords = eig.eigenvectors.transpose() * b;
    let mut scaled = DVector::zeros(d);
    for i in 0..d {
        let l = eig.eigenvalues[i];
        if l > cutoff && l > 0.0 {
            scaled[i] = coords[i] / l;
        }
    }
    let rho = &eig.eigenvectors * scaled;
    let residual = (c * &rho - b).norm();
    let bound = tol * b.norm();
    if residual > bound {
        return Err(Error::NoNumeraire {
            step: None,
            residual,
            bound,
        });
    }
    Ok(rho)
}

pub type DriftFn = Arc<dyn Fn(f64, &[f64]) -> DVector<f64> + Send + Sync>;
pub type VolFn = Arc<dyn Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync>;

#[derive(Clone)]
enum Coefficients {
    Constant {
        drift: DVector<f64>,
        vol: DMatrix<f64>,
        /// `c^+ b`, computed once.
        kelly: DVector<f64>,
    },
    StateDependent {
        drift: DriftFn,
        vol: VolFn,
    },
}

/// `d` assets driven by `m` Brownian factors.
#[derive(Clone)]
pub struct MarketModel {
    s0: Vec<f64>,
    n_factors: usize,
    pinv_tol: f64,
    coeffs: Coefficients,
}

impl fmt::Debug for MarketModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("MarketModel");
        s.field("s0", &self.s0)
            .field("n_factors", &self.n_factors)
            .field("pinv_tol", &self.pinv_tol);
        match &self.coeffs {
            Coefficients::Constant { drift, vol, .. } => s.field("drift", drift).field("vol", vol),
            Coefficients::StateDependent { .. } => s.field("coefficients", &"state-dependent"),
        };
        s.finish()
    }
}

fn check_s0(s0: &[f64]) -> Result<()> {
    if s0.is_empty() {
        return Err(Error::invalid("model needs at least one asset"));
    }
    if s0.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(Error::invalid("initial prices must be finite and positive"));
    }
    Ok(())
}

impl MarketModel {
    /// Constant-coefficient GBM market. Fails if the drift is not in the
    /// range of `sigma sigma^T`.
    pub fn constant(drift: DVector<f64>, vol: DMatrix<f64>, s0: Vec<f64>) -> Result<Self> {
        Self::constant_with_tol(drift, vol, s0, DEFAULT_PINV_TOL)
    }

    pub fn constant_with_tol(drift: DVector<f64>, vol: DMatrix<f64>, s0: Vec<f64>, pinv_tol: f64) -> Result<Self> {
        check_s0(&s0)?;
        let d = s0.len();
        if drift.len() != d || vol.nrows() != d || vol.ncols() == 0 {
            return Err(Error::invalid(format!(
                "dimension mismatch: {d} prices, {} drifts, {}x{} volatility",
                drift.len(),
                vol.nrows(),
                vol.ncols()
            )));
        }
        let c = &vol * vol.transpose();
        let kelly = pseudo_inverse_drift_solve(&c, &drift, pinv_tol)?;
        Ok(Self {
            n_factors: vol.ncols(),
            s0,
            pinv_tol,
            coeffs: Coefficients::Constant { drift, vol, kelly },
        })
    }

    /// Coefficients evaluated at `(t, prices)`; `vol` must return a
    /// `d x n_factors` matrix.
    pub fn state_dependent(s0: Vec<f64>, n_factors: usize, drift: DriftFn, vol: VolFn) -> Result<Self> {
        check_s0(&s0)?;
        if n_factors == 0 {
            return Err(Error::invalid("model needs at least one Brownian factor"));
        }
        Ok(Self {
            s0,
            n_factors,
            pinv_tol: DEFAULT_PINV_TOL,
            coeffs: Coefficients::StateDependent { drift, vol },
        })
    }

    /// One asset with drift 0.2 and volatility 0.2, so the Kelly fraction is
    /// 5 and the growth process is `G_t = t / 2`.
    pub fn gbm_preset() -> Self {
        Self::constant(
            DVector::from_element(1, 0.2),
            DMatrix::from_element(1, 1, 0.2),
            vec![1.0],
        )
        .expect("preset is valid")
    }

    /// One asset with unit drift and volatility. The numeraire is the asset
    /// itself, `X_t = exp(t/2 + W_t)`, with `G_t = t / 2`.
    pub fn dds_preset() -> Self {
        Self::constant(
            DVector::from_element(1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            vec![1.0],
        )
        .expect("preset is valid")
    }

    pub fn with_pinv_tol(mut self, tol: f64) -> Result<Self> {
        self.pinv_tol = tol;
        if let Coefficients::Constant { drift, vol, kelly } = &mut self.coeffs {
            let c = &*vol * vol.transpose();
            *kelly = pseudo_inverse_drift_solve(&c, drift, tol)?;
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.s0.len()
    }

    pub fn n_factors(&self) -> usize {
        self.n_factors
    }

    pub fn s0(&self) -> &[f64] {
        &self.s0
    }

    pub fn pinv_tol(&self) -> f64 {
        self.pinv_tol
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.coeffs, Coefficients::Constant { .. })
    }

    /// Drift vector and volatility matrix at `(t, prices)`.
    pub fn coefficients_at(&self, t: f64, prices: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        match &self.coeffs {
            Coefficients::Constant { drift, vol, .. } => Ok((drift.clone(), vol.clone())),
            Coefficients::StateDependent { drift, vol } => {
                let b = drift(t, prices);
                let s = vol(t, prices);
                let d = self.dim();
                if b.len() != d || s.nrows() != d || s.ncols() != self.n_factors {
                    return Err(Error::invalid(format!(
                        "coefficient functions returned {} drifts and a {}x{} volatility, expected {d} and {d}x{}",
                        b.len(),
                        s.nrows(),
                        s.ncols(),
                        self.n_factors
                    )));
                }
                if b.iter().chain(s.iter()).any(|x| !x.is_finite()) {
                    return Err(Error::invalid(format!("non-finite coefficients at t = {t}")));
                }
                Ok((b, s))
            }
        }
    }

    /// Numeraire fractions `c^+ b` and the growth rate `(b, c^+ b) / 2` at a state.
    pub fn kelly_at(&self, t: f64, prices: &[f64]) -> Result<(DVector<f64>, f64)> {
        let (b, pi) = match &self.coeffs {
            Coefficients::Constant { drift, kelly, .. } => (drift.clone(), kelly.clone()),
            Coefficients::StateDependent { .. } => {
                let (b, s) = self.coefficients_at(t, prices)?;
                let c = &s * s.transpose();
                let pi = pseudo_inverse_drift_solve(&c, &b, self.pinv_tol)?;
                (b, pi)
            }
        };
        let rate = (0.5 * b.dot(&pi)).max(0.0);
        Ok((pi, rate))
    }

    /// Log-Euler simulation driven by Brownian increments `dw` (row-major,
    /// `n_steps x n_factors`, each with variance `dt`).
    pub fn simulate_from_increments(&self, grid: TimeGrid, dw: Vec<f64>, path_index: usize) -> Result<SimulatedPath> {
        let d = self.dim();
        let m = self.n_factors;
        let n = grid.n_steps();
        if dw.len() != n * m {
            return Err(Error::invalid(format!(
                "expected {} Brownian increments, got {}",
                n * m,
                dw.len()
            )));
        }
        let dt = grid.dt();
        let mut prices = Vec::with_capacity((n + 1) * d);
        prices.extend_from_slice(&self.s0);
        // Cumulative log-returns; prices are s0 * exp(.) so a flat market stays
        // exactly at s0.
        let mut log_s = vec![0.0; d];
        let fail = |step: usize, reason: String| Error::Simulation {
            path: path_index,
            step,
            reason,
        };

        match &self.coeffs {
            Coefficients::Constant { drift, vol, .. } => {
                let mu: Vec<f64> = (0..d)
                    .map(|i| (drift[i] - 0.5 * vol.row(i).norm_squared()) * dt)
                    .collect();
                for k in 0..n {
                    let w = &dw[k * m..(k + 1) * m];
                    for i in 0..d {
                        let mut x = mu[i];
                        for (j, wj) in w.iter().enumerate() {
                            x += vol[(i, j)] * wj;
                        }
                        log_s[i] += x;
                        let s = self.s0[i] * log_s[i].exp();
                        if !s.is_finite() {
                            return Err(fail(k, format!("price of asset {} is not finite", i + 1)));
                        }
                        prices.push(s);
                    }
                }
            }
            Coefficients::StateDependent { .. } => {
                for k in 0..n {
                    let cur = &prices[k * d..(k + 1) * d];
                    let (b, s) = self
                        .coefficients_at(grid.time(k), cur)
                        .map_err(|e| fail(k, e.to_string()))?;
                    let w = DVector::from_column_slice(&dw[k * m..(k + 1) * m]);
                    let shock = &s * w;
                    for i in 0..d {
                        log_s[i] += (b[i] - 0.5 * s.row(i).norm_squared()) * dt + shock[i];
                    }
                    for (i, ls) in log_s.iter().enumerate() {
                        let s = self.s0[i] * ls.exp();
                        if !s.is_finite() {
                            return Err(fail(k, format!("price of asset {} is not finite", i + 1)));
                        }
                        prices.push(s);
                    }
                }
            }
        }
        Ok(SimulatedPath {
            grid,
            dim: d,
            n_factors: m,
            path_index,
            prices,
            increments: dw,
        })
    }

    fn kelly_schedule<'a>(&'a self, path: &'a SimulatedPath) -> KellySchedule<'a> {
        KellySchedule { model: self, path }
    }
}

struct KellySchedule<'a> {
    model: &'a MarketModel,
    path: &'a SimulatedPath,
}

impl KellySchedule<'_> {
    fn at(&self, k: usize) -> Result<(DVector<f64>, f64)> {
        self.model
            .kelly_at(self.path.grid.time(k), self.path.prices_at(k))
            .map_err(|e| match e {
                Error::NoNumeraire { residual, bound, .. } => Error::NoNumeraire {
                    step: Some(k),
                    residual,
                    bound,
                },
                other => Error::Simulation {
                    path: self.path.path_index,
                    step: k,
                    reason: other.to_string(),
                },
            })
    }
}

/// One simulated price path with its Brownian increments.
#[derive(Debug, Clone)]
pub struct SimulatedPath {
    grid: TimeGrid,
    dim: usize,
    n_factors: usize,
    path_index: usize,
    prices: Vec<f64>,
    increments: Vec<f64>,
}

impl SimulatedPath {
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn path_index(&self) -> usize {
        self.path_index
    }

    /// Price vector at grid index `k`.
    pub fn prices_at(&self, k: usize) -> &[f64] {
        &self.prices[k * self.dim..(k + 1) * self.dim]
    }

    /// Brownian increment vector over step `k -> k + 1`.
    pub fn increments_at(&self, k: usize) -> &[f64] {
        &self.increments[k * self.n_factors..(k + 1) * self.n_factors]
    }

    /// Price path of asset `i` (zero-based).
    pub fn asset(&self, i: usize) -> Vec<f64> {
        self.prices.iter().skip(i).step_by(self.dim).copied().collect()
    }

    fn returns_at(&self, k: usize, out: &mut [f64]) {
        let a = self.prices_at(k);
        let b = self.prices_at(k + 1);
        for i in 0..self.dim {
            out[i] = b[i] / a[i] - 1.0;
        }
    }

    /// Numeraire wealth, growth process and the held fractions `c^+ b`.
    pub fn numeraire(&self, model: &MarketModel) -> Result<NumerairePath> {
        let n = self.grid.n_steps();
        let d = self.dim;
        let dt = self.grid.dt();
        let kelly = model.kelly_schedule(self);
        let mut wealth = Vec::with_capacity(n + 1);
        let mut growth = Vec::with_capacity(n + 1);
        let mut proportions = Vec::with_capacity(n * d);
        let mut r = vec![0.0; d];
        let (mut x, mut g) = (1.0, 0.0);
        wealth.push(x);
        growth.push(g);
        let mut constant = None;
        for k in 0..n {
            let (pi, rate) = match (&constant, model.is_constant()) {
                (Some(c), _) => Clone::clone(c),
                (None, true) => {
                    let c = kelly.at(k)?;
                    constant = Some(c.clone());
                    c
                }
                (None, false) => kelly.at(k)?,
            };
            self.returns_at(k, &mut r);
            x = apply_gain(x, dot(pi.as_slice(), &r));
            g += rate * dt;
            wealth.push(x);
            growth.push(g);
            proportions.extend_from_slice(pi.as_slice());
        }
        Ok(NumerairePath {
            wealth: SampledPath::from_parts_unchecked(self.grid, wealth),
            growth: SampledPath::from_parts_unchecked(self.grid, growth),
            proportions,
            dim: d,
        })
    }

    /// Wealth of the self-financing strategy holding fractions given by
    /// `rule`. Absorbed at zero.
    pub fn wealth(&self, model: &MarketModel, rule: &ProportionRule) -> Result<SampledPath> {
        let gains = self.strategy_gains(model, rule)?;
        let mut values = Vec::with_capacity(gains.len() + 1);
        let mut x = 1.0;
        values.push(x);
        for g in gains {
            x = apply_gain(x, g);
            values.push(x);
        }
        Ok(SampledPath::from_parts_unchecked(self.grid, values))
    }

    /// Per-step portfolio returns `(pi_k, r_k)` of a proportion rule, where
    /// `r_k` are the simple asset returns over step `k -> k + 1`.
    pub fn strategy_gains(&self, model: &MarketModel, rule: &ProportionRule) -> Result<Vec<f64>> {
        let n = self.grid.n_steps();
        let d = self.dim;
        rule.check(d, n)?;
        let kelly = model.kelly_schedule(self);
        let mut gains = Vec::with_capacity(n);
        let mut r = vec![0.0; d];
        let mut scaled = vec![0.0; d];
        let mut cached: Option<DVector<f64>> = None;
        for k in 0..n {
            self.returns_at(k, &mut r);
            let g = match rule {
                ProportionRule::Baseline => 0.0,
                ProportionRule::Fixed(pi) => dot(pi, &r),
                ProportionRule::Schedule(rows) => dot(&rows[k], &r),
                ProportionRule::Kelly(f) => {
                    let pi = match &cached {
                        Some(pi) => pi.clone(),
                        None => {
                            let (pi, _) = kelly.at(k)?;
                            if model.is_constant() {
                                cached = Some(pi.clone());
                            }
                            pi
                        }
                    };
                    for i in 0..d {
                        scaled[i] = f * pi[i];
                    }
                    dot(&scaled, &r)
                }
            };
            gains.push(g);
        }
        Ok(gains)
    }
}

fn dot(pi: &[f64], r: &[f64]) -> f64 {
    let mut gain = 0.0;
    for (p, ri) in pi.iter().zip(r) {
        gain += p * ri;
    }
    gain
}

/// `x (1 + gain)`, clamped at zero; zero is absorbing.
pub(crate) fn apply_gain(x: f64, gain: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let next = x * (1.0 + gain);
    if next > 0.0 {
        next
    } else {
        0.0
    }
}

/// Fractions of wealth held in each risky asset.
#[derive(Debug, Clone, PartialEq)]
pub enum ProportionRule {
    /// Everything in the baseline asset.
    Baseline,
    /// Constant fractions.
    Fixed(Vec<f64>),
    /// A multiple of the numeraire fractions `c^+ b`; `Kelly(1.0)` is the
    /// numeraire itself.
    Kelly(f64),
    /// One row of fractions per step.
    Schedule(Vec<Vec<f64>>),
}

impl ProportionRule {
    /// All wealth in asset `i` (zero-based), i.e. buy-and-hold of that asset.
    pub fn all_in(dim: usize, i: usize) -> Self {
        let mut pi = vec![0.0; dim];
        pi[i] = 1.0;
        ProportionRule::Fixed(pi)
    }

    fn check(&self, dim: usize, n_steps: usize) -> Result<()> {
        let row_ok = |row: &[f64]| row.len() == dim && row.iter().all(|p| p.is_finite());
        match self {
            ProportionRule::Baseline => Ok(()),
            ProportionRule::Kelly(f) if f.is_finite() => Ok(()),
            ProportionRule::Kelly(f) => Err(Error::invalid(format!("Kelly multiple must be finite, got {f}"))),
            ProportionRule::Fixed(pi) if row_ok(pi) => Ok(()),
            ProportionRule::Fixed(_) => Err(Error::invalid(format!("fractions must be {dim} finite numbers"))),
            ProportionRule::Schedule(rows) => {
                if rows.len() < n_steps {
                    return Err(Error::invalid(format!(
                        "schedule has {} rows but the grid has {n_steps} steps",
                        rows.len()
                    )));
                }
                match rows.iter().position(|r| !row_ok(r)) {
                    Some(k) => Err(Error::invalid(format!("schedule row {k} must be {dim} finite numbers"))),
                    None => Ok(()),
                }
            }
        }
    }
}

/// Numeraire wealth `X`, growth process `G` and per-step fractions.
/// `log X = G + L` with `L` a local martingale.
#[derive(Debug, Clone)]
pub struct NumerairePath {
    pub wealth: SampledPath,
    pub growth: SampledPath,
    proportions: Vec<f64>,
    dim: usize,
}

impl NumerairePath {
    /// Fractions `c^+ b` held over step `k -> k + 1`.
    pub fn proportions_at(&self, k: usize) -> &[f64] {
        &self.proportions[k * self.dim..(k + 1) * self.dim]
    }
}

/// A reproducible batch of simulated paths. Path `i` depends only on
/// `(seed, i)` and is generated on demand.
#[derive(Debug, Clone)]
pub struct SimBatch {
    model: MarketModel,
    grid: TimeGrid,
    n_paths: usize,
    seed: u64,
}

impl SimBatch {
    pub fn new(model: MarketModel, grid: TimeGrid, n_paths: usize, seed: u64) -> Result<Self> {
        if n_paths == 0 {
            return Err(Error::invalid("batch needs at least one path"));
        }
        Ok(Self {
            model,
            grid,
            n_paths,
            seed,
        })
    }

    pub fn model(&self) -> &MarketModel {
        &self.model
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self, i: usize) -> Result<SimulatedPath> {
        if i >= self.n_paths {
            return Err(Error::invalid(format!(
                "path index {i} out of range (batch has {})",
                self.n_paths
            )));
        }
        let mut rng = PathRng::new(self.seed, i as u64);
        let sd = self.grid.dt().sqrt();
        let len = self.grid.n_steps() * self.model.n_factors();
        let dw: Vec<f64> = (0..len).map(|_| sd * rng.standard_normal()).collect();
        self.model.simulate_from_increments(self.grid, dw, i)
    }

    pub fn numeraire_path(&self, i: usize) -> Result<NumerairePath> {
        self.path(i)?.numeraire(&self.model)
    }

    pub fn wealth_from_proportions(&self, i: usize, rule: &ProportionRule) -> Result<SampledPath> {
        self.path(i)?.wealth(&self.model, rule)
    }

    /// Applies `f` to every path, in parallel, returning results in index order.
    pub fn map_paths<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&SimulatedPath) -> Result<T> + Sync + Send,
    {
        par::try_map_indices(self.n_paths, |i| f(&self.path(i)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn scalar_pseudo_inverse() {
        let rho = pseudo_inverse_drift_solve(&m(&[&[0.04]]), &DVector::from_vec(vec![0.2]), 1e-10).unwrap();
        assert_relative_eq!(rho[0], 5.0, max_relative = 1e-14);
    }

    #[test]
    fn singular_covariance_minimum_norm() {
        let c = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let rho = pseudo_inverse_drift_solve(&c, &DVector::from_vec(vec![1.0, 1.0]), 1e-10).unwrap();
        // Independent route: SVD-based least squares.
        let oracle = c.clone().svd(true, true).pseudo_inverse(1e-12).unwrap() * DVector::from_vec(vec![1.0, 1.0]);
        assert_relative_eq!(rho, oracle, epsilon = 1e-12);
        assert_relative_eq!(rho, DVector::from_vec(vec![0.5, 0.5]), epsilon = 1e-12);
    }

    #[test]
    fn drift_outside_range_has_no_numeraire() {
        let c = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let err = pseudo_inverse_drift_solve(&c, &DVector::from_vec(vec![1.0, 0.0]), 1e-10).unwrap_err();
        assert!(matches!(err, Error::NoNumeraire { .. }));
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        let b = DVector::from_vec(vec![1.0, 1.0]);
        assert!(pseudo_inverse_drift_solve(&m(&[&[1.0, 0.5], &[0.0, 1.0]]), &b, 1e-10).is_err());
        assert!(pseudo_inverse_drift_solve(&m(&[&[1.0, 0.0], &[0.0, -1.0]]), &b, 1e-10).is_err());
    }

    #[test]
    fn empty_batch_rejected() {
        let g = TimeGrid::new(0.01, 10).unwrap();
        assert!(SimBatch::new(MarketModel::gbm_preset(), g, 0, 1).is_err());
    }

    #[test]
    fn degenerate_model_is_constant() {
        let model = MarketModel::constant(DVector::zeros(2), DMatrix::zeros(2, 2), vec![1.0, 3.0]).unwrap();
        let batch = SimBatch::new(model, TimeGrid::new(0.1, 20).unwrap(), 3, 9).unwrap();
        for i in 0..3 {
            let p = batch.path(i).unwrap();
            for k in 0..=20 {
                assert_eq!(p.prices_at(k), &[1.0, 3.0]);
            }
            let num = batch.numeraire_path(i).unwrap();
            assert!(num.wealth.values().iter().all(|&x| x == 1.0));
            assert!(num.growth.values().iter().all(|&g| g == 0.0));
            assert_eq!(num.proportions_at(0), &[0.0, 0.0]);
        }
    }

    #[test]
    fn gbm_numeraire_fraction_and_growth() {
        let batch = SimBatch::new(MarketModel::gbm_preset(), TimeGrid::new(0.01, 500).unwrap(), 2, 3).unwrap();
        let num = batch.numeraire_path(1).unwrap();
        assert_relative_eq!(num.proportions_at(0)[0], 5.0, max_relative = 1e-14);
        assert_relative_eq!(num.proportions_at(499)[0], 5.0, max_relative = 1e-14);
        for (k, g) in num.growth.values().iter().enumerate() {
            assert_relative_eq!(*g, 0.5 * k as f64 * 0.01, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn wealth_rules() {
        let batch = SimBatch::new(MarketModel::gbm_preset(), TimeGrid::new(0.01, 300).unwrap(), 4, 17).unwrap();
        let path = batch.path(2).unwrap();
        let model = batch.model();
        let base = path.wealth(model, &ProportionRule::Baseline).unwrap();
        assert!(base.values().iter().all(|&x| x == 1.0));

        let hold = path.wealth(model, &ProportionRule::all_in(1, 0)).unwrap();
        for (x, s) in hold.values().iter().zip(path.asset(0)) {
            assert_relative_eq!(*x, s, max_relative = 1e-12);
        }

        let kelly = path.wealth(model, &ProportionRule::Kelly(1.0)).unwrap();
        let num = path.numeraire(model).unwrap();
        assert_eq!(kelly.values(), num.wealth.values());

        let fixed = path.wealth(model, &ProportionRule::Fixed(vec![5.0])).unwrap();
        assert_eq!(fixed.values(), num.wealth.values());
    }

    #[test]
    fn wealth_absorbed_at_zero() {
        // A 3x levered position in an asset that halves goes bankrupt.
        let grid = TimeGrid::new(1.0, 3).unwrap();
        let model = MarketModel::constant(DVector::zeros(1), DMatrix::from_element(1, 1, 1.0), vec![1.0]).unwrap();
        let dw = vec![0.5 + 0.5f64.ln(), 2.0, 0.0];
        let path = model.simulate_from_increments(grid, dw, 0).unwrap();
        let x = path.wealth(&model, &ProportionRule::Fixed(vec![3.0])).unwrap();
        assert_relative_eq!(path.prices_at(1)[0], 0.5, max_relative = 1e-14);
        assert_eq!(&x.values()[1..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn schedule_needs_one_row_per_step() {
        let batch = SimBatch::new(MarketModel::gbm_preset(), TimeGrid::new(0.1, 5).unwrap(), 1, 1).unwrap();
        let short = ProportionRule::Schedule(vec![vec![0.5]; 4]);
        assert!(batch.wealth_from_proportions(0, &short).is_err());
        let nan = ProportionRule::Fixed(vec![f64::NAN]);
        assert!(batch.wealth_from_proportions(0, &nan).is_err());
    }

    #[test]
    fn paths_depend_only_on_seed_and_index() {
        let g = TimeGrid::new(0.01, 50).unwrap();
        let a = SimBatch::new(MarketModel::gbm_preset(), g, 10, 5).unwrap();
        let b = SimBatch::new(MarketModel::gbm_preset(), g, 3, 5).unwrap();
        assert_eq!(a.path(2).unwrap().asset(0), b.path(2).unwrap().asset(0));
        assert_ne!(a.path(1).unwrap().asset(0), a.path(2).unwrap().asset(0));
    }

    #[test]
    fn state_dependent_model_matches_constant_one() {
        let drift: DriftFn = Arc::new(|_, _| DVector::from_element(1, 0.2));
        let vol: VolFn = Arc::new(|_, _| DMatrix::from_element(1, 1, 0.2));
        let sd = MarketModel::state_dependent(vec![1.0], 1, drift, vol).unwrap();
        let grid = TimeGrid::new(0.01, 100).unwrap();
        let a = SimBatch::new(sd, grid, 1, 4).unwrap();
        let b = SimBatch::new(MarketModel::gbm_preset(), grid, 1, 4).unwrap();
        let (na, nb) = (a.numeraire_path(0).unwrap(), b.numeraire_path(0).unwrap());
        for (x, y) in na.wealth.values().iter().zip(nb.wealth.values()) {
            assert_relative_eq!(*x, *y, max_relative = 1e-12);
        }
    }

    #[test]
    fn state_dependent_errors_carry_location() {
        let drift: DriftFn = Arc::new(|t, _| DVector::from_element(1, if t > 0.05 { f64::NAN } else { 0.1 }));
        let vol: VolFn = Arc::new(|_, _| DMatrix::from_element(1, 1, 0.2));
        let model = MarketModel::state_dependent(vec![1.0], 1, drift, vol).unwrap();
        let batch = SimBatch::new(model, TimeGrid::new(0.01, 10).unwrap(), 3, 1).unwrap();
        match batch.path(2).unwrap_err() {
            Error::Simulation { path, step, .. } => assert_eq!((path, step), (2, 6)),
            e => panic!("unexpected {e}"),
        }

        // Drift outside the range of a singular covariance.
        let drift: DriftFn = Arc::new(|_, _| DVector::from_vec(vec![1.0, 0.0]));
        let vol: VolFn = Arc::new(|_, _| DMatrix::from_element(2, 1, 1.0));
        let model = MarketModel::state_dependent(vec![1.0, 1.0], 1, drift, vol).unwrap();
        let batch = SimBatch::new(model, TimeGrid::new(0.01, 10).unwrap(), 1, 1).unwrap();
        assert!(matches!(
            batch.numeraire_path(0).unwrap_err(),
            Error::NoNumeraire { step: Some(0), .. }
        ));
    }

    #[test]
    fn constant_model_without_numeraire_is_rejected() {
        let vol = DMatrix::from_element(2, 1, 1.0);
        let err = MarketModel::constant(DVector::from_vec(vec![1.0, 0.0]), vol, vec![1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NoNumeraire { .. }));
    }
}

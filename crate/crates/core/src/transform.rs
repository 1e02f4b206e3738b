//! The Azema-Yor transform between unconstrained wealth paths and paths
//! that never fall below a fraction `alpha` of their running maximum.
//!
//! Forward map, with `M` the running maximum of `X`:
//!
//! ```text
//! aX = alpha * M^(1-alpha) + (1-alpha) * X * M^(-alpha)
//!    = M^(1-alpha) * (alpha + (1-alpha) * X / M)
//! ```
//!
//! The running maximum of `aX` is `M^(1-alpha)` and its relative drawdown
//! is `alpha + (1-alpha) X / M >= alpha`. The second form is what gets
//! evaluated, so the floor holds bitwise on the grid.

use crate::error::{Error, Result};
use crate::market::{apply_gain, MarketModel, ProportionRule, SimulatedPath};
use crate::path::{running_max_slice, SampledPath};

/// Default relative tolerance when checking that an input to
/// [`az_inverse`] satisfies the drawdown floor.
pub const DEFAULT_INVERSE_TOL: f64 = 1e-9;

const START_TOL: f64 = 1e-12;

/// Floor fraction `alpha` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DrawdownParam(f64);

impl DrawdownParam {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::invalid(format!("alpha must lie in [0, 1), got {alpha}")));
        }
        Ok(Self(alpha))
    }

    pub const ZERO: DrawdownParam = DrawdownParam(0.0);

    pub fn value(self) -> f64 {
        self.0
    }

    /// `gamma = 1 - (1 - alpha)(1 - beta)`: transforming by `alpha` and then
    /// by `beta` is the same as transforming by `gamma`.
    pub fn compose(self, beta: DrawdownParam) -> DrawdownParam {
        DrawdownParam(1.0 - (1.0 - self.0) * (1.0 - beta.0))
    }
}

impl TryFrom<f64> for DrawdownParam {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

fn check_start(values: &[f64], what: &str) -> Result<()> {
    if (values[0] - 1.0).abs() > START_TOL {
        return Err(Error::invalid(format!("{what} must start at 1, got {}", values[0])));
    }
    Ok(())
}

/// Constrained wealth `aX` from base wealth `X` (with `X_0 = 1`).
pub fn az_forward(x: &SampledPath, alpha: DrawdownParam) -> Result<SampledPath> {
    check_start(x.values(), "base wealth")?;
    Ok(SampledPath::from_parts_unchecked(
        x.grid(),
        az_forward_slice(x.values(), alpha.0),
    ))
}

pub(crate) fn az_forward_slice(x: &[f64], alpha: f64) -> Vec<f64> {
    if alpha == 0.0 {
        return x.to_vec();
    }
    let mut m = f64::NEG_INFINITY;
    let mut top = 0.0;
    x.iter()
        .map(|&v| {
            if v > m {
                m = v;
                top = m.powf(1.0 - alpha);
            }
            top * (alpha + (1.0 - alpha) * (v / m)).min(1.0)
        })
        .collect()
}

/// Base wealth `X` recovered from constrained wealth `chi`:
/// `X = chi*^(1/(1-alpha)) * (chi / chi* - alpha) / (1 - alpha)`.
///
/// Fails with [`Error::ConstraintViolation`] at the first index where
/// `chi < alpha * chi* * (1 - tol)`. Values within tolerance of the floor
/// map to zero.
pub fn az_inverse(chi: &SampledPath, alpha: DrawdownParam, tol: f64) -> Result<SampledPath> {
    check_start(chi.values(), "constrained wealth")?;
    let a = alpha.0;
    if a == 0.0 {
        return Ok(chi.clone());
    }
    let n = running_max_slice(chi.values());
    let mut out = Vec::with_capacity(chi.len());
    let mut base_max = f64::NAN;
    let mut last_max = f64::NAN;
    for (k, (&c, &m)) in chi.values().iter().zip(&n).enumerate() {
        let floor = a * m;
        if c < floor * (1.0 - tol) {
            return Err(Error::ConstraintViolation {
                index: k,
                value: c,
                floor,
            });
        }
        if m != last_max {
            last_max = m;
            base_max = m.powf(1.0 / (1.0 - a));
        }
        let ratio = ((c / m - a) / (1.0 - a)).clamp(0.0, 1.0);
        out.push(base_max * ratio);
    }
    Ok(SampledPath::from_parts_unchecked(chi.grid(), out))
}

/// Fraction of constrained wealth invested in the base strategy,
/// `(1-alpha) r / (alpha + (1-alpha) r)` for relative drawdown `r` of the
/// base wealth. Lies in `[0, 1 - alpha]`.
pub fn kelly_fraction(rel_dd: f64, alpha: DrawdownParam) -> Result<f64> {
    if !(0.0..=1.0).contains(&rel_dd) {
        return Err(Error::invalid(format!(
            "relative drawdown must lie in [0, 1], got {rel_dd}"
        )));
    }
    Ok(kelly_fraction_unchecked(rel_dd, alpha.0))
}

fn kelly_fraction_unchecked(rel_dd: f64, alpha: f64) -> f64 {
    if rel_dd == 0.0 {
        return 0.0;
    }
    let w = (1.0 - alpha) * rel_dd;
    w / (alpha + w)
}

/// Constrained wealth realized by trading: each step invests
/// [`kelly_fraction`] of current wealth in the base strategy, the rest in
/// the baseline asset. Converges to [`az_forward`] of the base wealth as the
/// grid is refined.
pub fn constrained_wealth_direct(
    path: &SimulatedPath,
    model: &MarketModel,
    base: &ProportionRule,
    alpha: DrawdownParam,
) -> Result<SampledPath> {
    let gains = path.strategy_gains(model, base)?;
    let mut values = Vec::with_capacity(gains.len() + 1);
    let (mut x, mut x_max, mut y) = (1.0f64, 1.0f64, 1.0f64);
    values.push(y);
    for g in gains {
        let f = if x > 0.0 {
            kelly_fraction_unchecked((x / x_max).min(1.0), alpha.0)
        } else {
            0.0
        };
        y = apply_gain(y, f * g);
        x = apply_gain(x, g);
        x_max = x_max.max(x);
        values.push(y);
    }
    Ok(SampledPath::from_parts_unchecked(path.grid(), values))
}

/// Indices where a path falls below its drawdown floor.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DrawdownReport {
    pub violations: Vec<usize>,
}

impl DrawdownReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Every index `k` with `path[k] < alpha * path*[k] - tol`.
pub fn verify_drawdown(path: &SampledPath, alpha: DrawdownParam, tol: f64) -> DrawdownReport {
    let m = running_max_slice(path.values());
    let violations = path
        .values()
        .iter()
        .zip(&m)
        .enumerate()
        .filter(|&(_, (&v, &mx))| v < alpha.0 * mx - tol)
        .map(|(k, _)| k)
        .collect();
    DrawdownReport { violations }
}

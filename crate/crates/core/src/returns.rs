//! Relative returns `rr_T(X | X') = X_T / X'_T - 1` (with `0/0 = 1`) and
//! Monte Carlo estimators of their expectations at stopping times.
//!
//! The constrained numeraire `aX` (the transform of the numeraire) beats
//! every constrained wealth `aX` in expected relative return at times of
//! maximum of the numeraire, in particular at the level-crossing times
//! `tau_l` realized by [`first_hit_level`].

use crate::error::{Error, Result};
use crate::market::{ProportionRule, SimBatch, SimulatedPath};
use crate::par;
use crate::path::{first_hit_level, SampledPath, StopIndex};
use crate::stats::MCEstimate;
use crate::transform::{az_forward, DrawdownParam};

/// Relative return of `x` against `x_ref` at `t`. `Never` reads the final
/// grid point as a finite-horizon stand-in for the limit.
pub fn rr_at(x: &SampledPath, x_ref: &SampledPath, t: StopIndex) -> Result<f64> {
    if x.grid() != x_ref.grid() {
        return Err(Error::invalid("relative return needs both paths on the same grid"));
    }
    Ok(rr_values(x.at(t), x_ref.at(t)))
}

pub(crate) fn rr_values(x: f64, x_ref: f64) -> f64 {
    if x == x_ref {
        0.0
    } else {
        x / x_ref - 1.0
    }
}

/// Both directions of a relative return and their consistency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrCheck {
    pub forward: f64,
    pub reverse: f64,
    /// `-forward / (1 + forward)`.
    pub expected_reverse: f64,
    pub holds: bool,
}

/// Checks `rr(x_ref | x) = -r / (1 + r)` with `r = rr(x | x_ref)` to 1e-12,
/// and `rr(x | x_ref) + rr(x_ref | x) >= 0`.
pub fn rr_inequality_check(x: &SampledPath, x_ref: &SampledPath, t: StopIndex) -> Result<RrCheck> {
    let forward = rr_at(x, x_ref, t)?;
    let reverse = rr_at(x_ref, x, t)?;
    Ok(rr_pair_check(forward, reverse))
}

pub(crate) fn rr_pair_check(forward: f64, reverse: f64) -> RrCheck {
    let expected_reverse = if forward == 0.0 {
        0.0
    } else {
        -forward / (1.0 + forward)
    };
    let close = if expected_reverse.is_infinite() || reverse.is_infinite() {
        expected_reverse == reverse
    } else {
        (reverse - expected_reverse).abs() <= 1e-12 * expected_reverse.abs().max(1.0)
    };
    let sum = forward + reverse;
    RrCheck {
        forward,
        reverse,
        expected_reverse,
        holds: close && (sum.is_nan() || sum >= -1e-12),
    }
}

/// Mean and standard error of per-path samples produced by `evaluator`,
/// called once per path index. Non-finite samples are flagged, not fatal.
pub fn err_mc<F>(n_paths: usize, evaluator: F) -> Result<MCEstimate>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    if n_paths < 2 {
        return Err(Error::invalid(format!("need at least two paths, got {n_paths}")));
    }
    let samples = par::try_map_indices(n_paths, evaluator)?;
    MCEstimate::from_samples(&samples)
}

/// `phi = alpha chi*^(1-alpha) + (1-alpha) chi chi*^(-alpha)` with
/// `chi = x / xhat`; a nonnegative local martingale started at 1 when
/// `xhat` is the numeraire.
pub fn phi_process(x: &SampledPath, xhat: &SampledPath, alpha: DrawdownParam) -> Result<SampledPath> {
    if x.grid() != xhat.grid() {
        return Err(Error::invalid("phi needs both paths on the same grid"));
    }
    if let Some(k) = xhat.values().iter().position(|&v| v <= 0.0) {
        return Err(Error::invalid(format!("reference wealth hits zero at index {k}")));
    }
    let chi: Vec<f64> = x.values().iter().zip(xhat.values()).map(|(a, b)| a / b).collect();
    az_forward(&SampledPath::new(x.grid(), chi)?, alpha)
}

/// Constrained test wealth and constrained numeraire on one simulated path,
/// plus the numeraire itself.
#[derive(Debug, Clone)]
pub struct ConstrainedPair {
    pub numeraire: SampledPath,
    pub base: SampledPath,
    pub constrained_numeraire: SampledPath,
    pub constrained_base: SampledPath,
}

impl ConstrainedPair {
    pub fn build(path: &SimulatedPath, batch: &SimBatch, rule: &ProportionRule, alpha: DrawdownParam) -> Result<Self> {
        let numeraire = path.numeraire(batch.model())?.wealth;
        let base = path.wealth(batch.model(), rule)?;
        Ok(Self {
            constrained_numeraire: az_forward(&numeraire, alpha)?,
            constrained_base: az_forward(&base, alpha)?,
            numeraire,
            base,
        })
    }

    /// `tau_l`: first index where the numeraire reaches `exp(level)`.
    pub fn level_time(&self, level: f64) -> StopIndex {
        first_hit_level(&self.numeraire, level.exp(), StopIndex::ZERO)
    }

    /// `rr_t(aX | aXhat)`.
    pub fn constrained_rr(&self, t: StopIndex) -> f64 {
        rr_values(self.constrained_base.at(t), self.constrained_numeraire.at(t))
    }
}

/// An estimate at a level-crossing time together with the number of paths
/// on which the level was not reached on the grid (evaluated at the end).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelEstimate {
    pub estimate: MCEstimate,
    pub censored: usize,
}

fn level_estimate(
    batch: &SimBatch,
    f: impl Fn(&SimulatedPath) -> Result<(f64, bool)> + Sync + Send,
) -> Result<LevelEstimate> {
    if batch.n_paths() < 2 {
        return Err(Error::invalid("need at least two paths"));
    }
    let rows = batch.map_paths(f)?;
    let samples: Vec<f64> = rows.iter().map(|r| r.0).collect();
    Ok(LevelEstimate {
        estimate: MCEstimate::from_samples(&samples)?,
        censored: rows.iter().filter(|r| r.1).count(),
    })
}

/// `E[rr_{tau_l}(aX | aXhat)]` where `X` follows `rule`. Should be `<= 0`.
pub fn err_at_level(
    batch: &SimBatch,
    rule: &ProportionRule,
    alpha: DrawdownParam,
    level: f64,
) -> Result<LevelEstimate> {
    level_estimate(batch, |path| {
        let pair = ConstrainedPair::build(path, batch, rule, alpha)?;
        let tau = pair.level_time(level);
        Ok((pair.constrained_rr(tau), !tau.is_finite()))
    })
}

/// `E[phi_{tau_l}]` for `phi` built from `X / Xhat`. Should be `<= 1`.
pub fn phi_at_level(
    batch: &SimBatch,
    rule: &ProportionRule,
    alpha: DrawdownParam,
    level: f64,
) -> Result<LevelEstimate> {
    level_estimate(batch, |path| {
        let numeraire = path.numeraire(batch.model())?.wealth;
        let base = path.wealth(batch.model(), rule)?;
        let tau = first_hit_level(&numeraire, level.exp(), StopIndex::ZERO);
        let phi = phi_process(&base, &numeraire, alpha)?;
        Ok((phi.at(tau), !tau.is_finite()))
    })
}

/// Relative return at an earlier time of maximum and the increment up to a
/// later one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupermartingaleCheck {
    pub at_sigma: MCEstimate,
    /// `rr_tau - rr_sigma`; should have mean `<= 0`.
    pub increment: MCEstimate,
}

/// Compares `rr(aX | aXhat)` at `sigma = tau_{l1}` and `tau = tau_{l2}`.
pub fn maxima_supermartingale_check(
    batch: &SimBatch,
    rule: &ProportionRule,
    alpha: DrawdownParam,
    sigma_level: f64,
    tau_level: f64,
) -> Result<SupermartingaleCheck> {
    let rows = batch.map_paths(|path| {
        let pair = ConstrainedPair::build(path, batch, rule, alpha)?;
        let sigma = pair.level_time(sigma_level);
        let tau = pair.level_time(tau_level);
        supermartingale_sample(&pair, sigma, tau, path.path_index())
    })?;
    let at_sigma: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let increment: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(SupermartingaleCheck {
        at_sigma: MCEstimate::from_samples(&at_sigma)?,
        increment: MCEstimate::from_samples(&increment)?,
    })
}

fn supermartingale_sample(pair: &ConstrainedPair, sigma: StopIndex, tau: StopIndex, path: usize) -> Result<(f64, f64)> {
    if sigma > tau {
        return Err(Error::invalid(format!(
            "sigma = {sigma} exceeds tau = {tau} on path {path}"
        )));
    }
    let rs = pair.constrained_rr(sigma);
    let rt = pair.constrained_rr(tau);
    Ok((rs, rt - rs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::MarketModel;
    use crate::path::TimeGrid;
    use approx::assert_relative_eq;

    fn p(v: &[f64]) -> SampledPath {
        SampledPath::from_values(0.1, v.to_vec()).unwrap()
    }

    #[test]
    fn rr_examples() {
        let t = StopIndex::At(1);
        assert_relative_eq!(
            rr_at(&p(&[1.0, 1.2]), &p(&[1.0, 1.0]), t).unwrap(),
            0.2,
            max_relative = 1e-15
        );
        let x = p(&[1.0, 1.3, 0.7]);
        for k in 0..3 {
            assert_eq!(rr_at(&x, &x, StopIndex::At(k)).unwrap(), 0.0);
        }
        assert_eq!(rr_at(&p(&[1.0, 0.0]), &p(&[1.0, 0.0]), t).unwrap(), 0.0);
        assert_eq!(rr_at(&p(&[1.0, 1.0]), &p(&[1.0, 0.0]), t).unwrap(), f64::INFINITY);
        // Never reads the last point.
        assert_relative_eq!(
            rr_at(&p(&[1.0, 1.0, 3.0]), &p(&[1.0, 1.0, 2.0]), StopIndex::Never).unwrap(),
            0.5
        );
        let other = SampledPath::from_values(0.2, vec![1.0, 1.0]).unwrap();
        assert!(rr_at(&p(&[1.0, 1.0]), &other, t).is_err());
    }

    #[test]
    fn rr_inequality_examples() {
        let t = StopIndex::At(1);
        let c = rr_inequality_check(&p(&[1.0, 1.2]), &p(&[1.0, 1.0]), t).unwrap();
        assert!(c.holds);
        assert_relative_eq!(c.reverse, -1.0 / 6.0, max_relative = 1e-14);

        let c = rr_inequality_check(&p(&[1.0, 0.5]), &p(&[1.0, 1.0]), t).unwrap();
        assert!(c.holds);
        assert_relative_eq!(c.forward, -0.5);
        assert_relative_eq!(c.reverse, 1.0);

        let c = rr_inequality_check(&p(&[1.0, 0.8]), &p(&[1.0, 0.8]), t).unwrap();
        assert!(c.holds);
        assert_eq!((c.forward, c.reverse), (0.0, 0.0));

        let c = rr_inequality_check(&p(&[1.0, 0.0]), &p(&[1.0, 2.0]), t).unwrap();
        assert!(c.holds);
        assert_eq!(c.reverse, f64::INFINITY);

        assert!(!rr_pair_check(0.2, -0.1).holds);
    }

    #[test]
    fn err_mc_identity_is_zero() {
        let batch = SimBatch::new(MarketModel::gbm_preset(), TimeGrid::new(0.01, 100).unwrap(), 20, 3).unwrap();
        let est = err_mc(batch.n_paths(), |i| {
            let x = batch.numeraire_path(i)?.wealth;
            rr_at(&x, &x, StopIndex::Never)
        })
        .unwrap();
        assert_eq!((est.mean, est.se, est.n), (0.0, 0.0, 20));
        assert!(err_mc(1, |_| Ok(0.0)).is_err());
    }

    #[test]
    fn err_mc_flags_infinite_samples() {
        let est = err_mc(4, |i| Ok(if i == 2 { f64::INFINITY } else { i as f64 })).unwrap();
        assert_eq!(est.flagged, 1);
        assert_eq!(est.n, 3);
    }

    #[test]
    fn phi_examples() {
        let xhat = p(&[1.0, 1.5, 1.2, 2.0]);
        let phi = phi_process(&xhat, &xhat, DrawdownParam::new(0.5).unwrap()).unwrap();
        assert!(phi.values().iter().all(|&v| v == 1.0));

        let x = p(&[1.0, 1.0, 2.0, 1.0]);
        let phi0 = phi_process(&x, &xhat, DrawdownParam::ZERO).unwrap();
        for ((f, a), b) in phi0.values().iter().zip(x.values()).zip(xhat.values()) {
            assert_eq!(*f, a / b);
        }
        assert!(phi_process(&x, &p(&[1.0, 0.0, 1.0, 1.0]), DrawdownParam::ZERO).is_err());
    }

    #[test]
    fn supermartingale_trivial_cases() {
        let batch = SimBatch::new(MarketModel::gbm_preset(), TimeGrid::new(0.01, 400).unwrap(), 10, 8).unwrap();
        let alpha = DrawdownParam::new(0.5).unwrap();
        let same = maxima_supermartingale_check(&batch, &ProportionRule::all_in(1, 0), alpha, 0.5, 0.5).unwrap();
        assert_eq!(same.increment.mean, 0.0);
        let kelly = maxima_supermartingale_check(&batch, &ProportionRule::Kelly(1.0), alpha, 0.5, 1.0).unwrap();
        assert_eq!((kelly.increment.mean, kelly.at_sigma.mean), (0.0, 0.0));

        let path = batch.path(0).unwrap();
        let pair = ConstrainedPair::build(&path, &batch, &ProportionRule::Baseline, alpha).unwrap();
        assert!(supermartingale_sample(&pair, StopIndex::At(5), StopIndex::At(4), 0).is_err());
    }

    #[test]
    fn level_hit_of_constrained_numeraire_matches() {
        // aXhat first reaches exp((1-alpha) l) when Xhat first reaches exp(l).
        let batch = SimBatch::new(MarketModel::dds_preset(), TimeGrid::new(0.001, 8000).unwrap(), 20, 5).unwrap();
        let alpha = DrawdownParam::new(0.5).unwrap();
        for i in 0..20 {
            let path = batch.path(i).unwrap();
            let pair = ConstrainedPair::build(&path, &batch, &ProportionRule::Baseline, alpha).unwrap();
            let tau = pair.level_time(1.0);
            let tau_c = first_hit_level(&pair.constrained_numeraire, (0.5f64).exp(), StopIndex::ZERO);
            match (tau, tau_c) {
                (StopIndex::At(a), StopIndex::At(b)) => assert!(a.abs_diff(b) <= 1, "{a} vs {b}"),
                (a, b) => assert_eq!(a, b),
            }
            if let StopIndex::At(k) = tau {
                let v = pair.numeraire.values()[k];
                assert_relative_eq!(
                    pair.constrained_numeraire.values()[k],
                    v.powf(0.5),
                    max_relative = 1e-14
                );
            }
        }
    }
}

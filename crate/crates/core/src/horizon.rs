//! Drawdown cycles of the numeraire, explicit finite-horizon optimal
//! portfolios, and the long-horizon experiments built on them.
//!
//! Cycle times alternate between hitting the drawdown floor and recovering
//! the previous maximum:
//!
//! ```text
//! T_{1/2} = 0
//! T_n       = first k > T_{n-1/2} with Xhat_k <= alpha * Xhat*_k
//! T_{n+1/2} = first k > T_n       with Xhat_k >= Xhat*_{T_n}
//! ```
//!
//! Every `T_{n-1/2}` is a time of maximum of `Xhat`.

use crate::error::{Error, Result};
use crate::market::{ProportionRule, SimBatch};
use crate::path::{first_hit_level, relative_drawdown_slice, running_max_slice, SampledPath, StopIndex};
use crate::stats::{rank_correlation, MCEstimate};
use crate::transform::{az_forward, az_forward_slice, DrawdownParam};

fn open_alpha(alpha: DrawdownParam) -> Result<f64> {
    let a = alpha.value();
    if a <= 0.0 {
        return Err(Error::invalid("drawdown cycles need alpha in (0, 1)"));
    }
    Ok(a)
}

/// `(T_{n-1/2}, T_n)` for `n = 1, 2, ...` until the first `Never`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleTimes {
    cycles: Vec<(StopIndex, StopIndex)>,
}

impl CycleTimes {
    /// `T_{n-1/2}` (n >= 1).
    pub fn start(&self, n: usize) -> StopIndex {
        assert!(n >= 1, "cycles are numbered from 1");
        self.cycles.get(n - 1).map_or(StopIndex::Never, |c| c.0)
    }

    /// `T_n` (n >= 1).
    pub fn hit(&self, n: usize) -> StopIndex {
        assert!(n >= 1, "cycles are numbered from 1");
        self.cycles.get(n - 1).map_or(StopIndex::Never, |c| c.1)
    }

    /// Number of cycles with finite `T_n`.
    pub fn completed(&self) -> usize {
        self.cycles.iter().filter(|c| c.1.is_finite()).count()
    }

    pub fn as_slice(&self) -> &[(StopIndex, StopIndex)] {
        &self.cycles
    }
}

/// Drawdown cycle times of a numeraire path, in one forward scan.
pub fn cycle_times(xhat: &SampledPath, alpha: DrawdownParam) -> Result<CycleTimes> {
    let a = open_alpha(alpha)?;
    let v = xhat.values();
    let mut cycles = Vec::new();
    let mut m = v[0];
    let mut start = 0usize;
    let mut k = 0usize;
    loop {
        // Drawdown hit after `start`.
        let mut hit = None;
        while k + 1 < v.len() {
            k += 1;
            m = m.max(v[k]);
            if v[k] <= a * m {
                hit = Some(k);
                break;
            }
        }
        let Some(h) = hit else {
            cycles.push((StopIndex::At(start), StopIndex::Never));
            break;
        };
        cycles.push((StopIndex::At(start), StopIndex::At(h)));
        // Recovery of the maximum as of the hit.
        let target = m;
        let mut next = None;
        while k + 1 < v.len() {
            k += 1;
            if v[k] >= target {
                m = m.max(v[k]);
                next = Some(k);
                break;
            }
        }
        match next {
            Some(s) => start = s,
            None => {
                cycles.push((StopIndex::Never, StopIndex::Never));
                break;
            }
        }
    }
    Ok(CycleTimes { cycles })
}

/// The wealth process optimal over `[0, T_n]` among alpha-constrained ones.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteHorizonPath {
    pub path: SampledPath,
    /// `T_n` is finite on the grid. When false the horizon was never reached
    /// and the path is only the part of the construction that is defined.
    pub complete: bool,
}

/// Follows `aXhat` up to `T_{n-1/2}`, then holds the numeraire until `T_n`,
/// where it sits on the drawdown floor and stays constant.
pub fn finite_horizon_numeraire(xhat: &SampledPath, alpha: DrawdownParam, n: usize) -> Result<FiniteHorizonPath> {
    if n < 1 {
        return Err(Error::invalid("cycle number must be at least 1"));
    }
    let constrained = az_forward(xhat, alpha)?;
    if alpha.value() == 0.0 {
        return Ok(FiniteHorizonPath {
            path: constrained,
            complete: false,
        });
    }
    let cycles = cycle_times(xhat, alpha)?;
    Ok(finite_horizon_from_parts(xhat, &constrained, &cycles, alpha.value(), n))
}

fn finite_horizon_from_parts(
    xhat: &SampledPath,
    constrained: &SampledPath,
    cycles: &CycleTimes,
    a: f64,
    n: usize,
) -> FiniteHorizonPath {
    let StopIndex::At(s) = cycles.start(n) else {
        return FiniteHorizonPath {
            path: constrained.clone(),
            complete: false,
        };
    };
    let hit = cycles.hit(n);
    let x = xhat.values();
    let scale = constrained.values()[s] / x[s];
    let mut out = constrained.values()[..=s].to_vec();
    out.reserve(x.len() - s - 1);
    match hit {
        StopIndex::At(h) => {
            out.extend(x[s + 1..h].iter().map(|v| scale * v));
            let top = x[..=h].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let floor = scale * (a * top);
            out.resize(x.len(), floor);
        }
        StopIndex::Never => out.extend(x[s + 1..].iter().map(|v| scale * v)),
    }
    FiniteHorizonPath {
        path: SampledPath::from_parts_unchecked(xhat.grid(), out),
        complete: hit.is_finite(),
    }
}

/// Ratio of the finite-horizon optimum to the constrained numeraire at the
/// end of cycle `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaSample {
    pub path: usize,
    pub n: usize,
    /// `(2-alpha)^(-1) (Xhat*_{T_n} / Xhat_{T_{n-1/2}})^alpha`.
    pub zeta: f64,
    /// The same ratio read off the two wealth paths at `T_n`.
    pub direct: f64,
}

/// Pooled ratios over all paths and cycles `n <= max_n`, ordered by
/// `(path, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaHarvest {
    pub samples: Vec<ZetaSample>,
    /// Paths on which fewer than `max_n` cycles completed.
    pub truncated_paths: usize,
}

impl ZetaHarvest {
    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.zeta).collect()
    }

    /// Ratios grouped by path, each in cycle order.
    pub fn per_path(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        let mut current = None;
        for s in &self.samples {
            if current != Some(s.path) {
                out.push(Vec::new());
                current = Some(s.path);
            }
            out.last_mut().expect("pushed above").push(s.zeta);
        }
        out
    }
}

/// Ratios for the cycles of one numeraire path.
pub fn path_zetas(xhat: &SampledPath, alpha: DrawdownParam, max_n: usize, path: usize) -> Result<Vec<ZetaSample>> {
    let a = open_alpha(alpha)?;
    let x = xhat.values();
    let cycles = cycle_times(xhat, alpha)?;
    let constrained = az_forward_slice(x, a);
    let top = running_max_slice(x);
    let mut out = Vec::new();
    for n in 1..=max_n {
        let (StopIndex::At(s), StopIndex::At(h)) = (cycles.start(n), cycles.hit(n)) else {
            break;
        };
        let zeta = (top[h] / x[s]).powf(a) / (2.0 - a);
        let finite = constrained[s] / x[s] * (a * top[h]);
        out.push(ZetaSample {
            path,
            n,
            zeta,
            direct: finite / constrained[h],
        });
    }
    Ok(out)
}

pub fn zeta_samples(batch: &SimBatch, alpha: DrawdownParam, max_n: usize) -> Result<ZetaHarvest> {
    open_alpha(alpha)?;
    if max_n == 0 {
        return Err(Error::invalid("max_n must be at least 1"));
    }
    let per_path = batch.map_paths(|p| {
        let xhat = p.numeraire(batch.model())?.wealth;
        path_zetas(&xhat, alpha, max_n, p.path_index())
    })?;
    let truncated_paths = per_path.iter().filter(|z| z.len() < max_n).count();
    Ok(ZetaHarvest {
        samples: per_path.into_iter().flatten().collect(),
        truncated_paths,
    })
}

/// CDF of `zeta = (2-alpha)^(-1) (alpha + (1-alpha)/eta)^alpha` with `eta`
/// uniform on (0, 1).
pub fn zeta_analytic_cdf(z: f64, alpha: DrawdownParam) -> Result<f64> {
    let a = open_alpha(alpha)?;
    let lo = 1.0 / (2.0 - a);
    if z.is_nan() {
        return Err(Error::invalid("zeta must not be NaN"));
    }
    if z <= lo {
        return Ok(0.0);
    }
    let denom = ((2.0 - a) * z).powf(1.0 / a) - a;
    Ok(1.0 - ((1.0 - a) / denom).min(1.0))
}

/// CDF of the cycle ratio implied by the scale function of the numeraire:
/// over a drawdown cycle, `P(Xhat*_{T_n} / Xhat_{T_{n-1/2}} > y) =
/// y^(-alpha/(1-alpha))`, so `P(zeta > z) = ((2-alpha) z)^(-1/(1-alpha))`.
///
/// This is the law of `zeta` for the numeraire under the growth time
/// change; it differs from [`zeta_analytic_cdf`].
pub fn zeta_scale_cdf(z: f64, alpha: DrawdownParam) -> Result<f64> {
    let a = open_alpha(alpha)?;
    if z.is_nan() {
        return Err(Error::invalid("zeta must not be NaN"));
    }
    let w = (2.0 - a) * z;
    if w <= 1.0 {
        return Ok(0.0);
    }
    Ok(1.0 - w.powf(-1.0 / (1.0 - a)))
}

/// Growth of a constrained strategy relative to the growth process.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    /// `log(aXhat_T) / G_T`.
    pub numeraire: MCEstimate,
    /// `log(aZ_T) / G_T` for each test strategy `Z`.
    pub panel: Vec<(ProportionRule, MCEstimate)>,
}

impl GrowthReport {
    pub fn max_panel_mean(&self) -> f64 {
        self.panel.iter().map(|p| p.1.mean).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn growth_rate_experiment(
    batch: &SimBatch,
    alpha: DrawdownParam,
    panel: &[ProportionRule],
) -> Result<GrowthReport> {
    let rows = batch.map_paths(|p| {
        let num = p.numeraire(batch.model())?;
        let g = num.growth.last();
        if g <= 0.0 {
            return Err(Error::invalid(format!(
                "growth process is zero at the horizon on path {}",
                p.path_index()
            )));
        }
        let mut row = Vec::with_capacity(panel.len() + 1);
        row.push(az_forward(&num.wealth, alpha)?.last().ln() / g);
        for rule in panel {
            let z = p.wealth(batch.model(), rule)?;
            row.push(az_forward(&z, alpha)?.last().ln() / g);
        }
        Ok(row)
    })?;
    let column = |j: usize| -> Result<MCEstimate> {
        let xs: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        MCEstimate::from_samples(&xs)
    };
    let mut out = Vec::with_capacity(panel.len());
    for (j, rule) in panel.iter().enumerate() {
        out.push((rule.clone(), column(j + 1)?));
    }
    Ok(GrowthReport {
        numeraire: column(0)?,
        panel: out,
    })
}

/// Summary of the relative drawdown of a constrained path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationStats {
    pub min_rel_dd: f64,
    pub max_rel_dd: f64,
    /// Entries into `{rel_dd <= alpha + eps}`.
    pub crossings_below: usize,
    /// Entries into `{rel_dd >= 1 - eps}` after time zero.
    pub crossings_above: usize,
}

pub fn oscillation_stats(path: &SampledPath, alpha: DrawdownParam, eps: f64) -> Result<OscillationStats> {
    if path.values()[0] <= 0.0 {
        return Err(Error::invalid("path must start positive"));
    }
    let rel = relative_drawdown_slice(path.values());
    let (lo, hi) = (alpha.value() + eps, 1.0 - eps);
    let mut stats = OscillationStats {
        min_rel_dd: f64::INFINITY,
        max_rel_dd: f64::NEG_INFINITY,
        crossings_below: 0,
        crossings_above: 0,
    };
    let (mut below, mut above) = (rel[0] <= lo, rel[0] >= hi);
    for &r in &rel {
        stats.min_rel_dd = stats.min_rel_dd.min(r);
        stats.max_rel_dd = stats.max_rel_dd.max(r);
        if r <= lo && !below {
            stats.crossings_below += 1;
        }
        if r >= hi && !above {
            stats.crossings_above += 1;
        }
        below = r <= lo;
        above = r >= hi;
    }
    Ok(stats)
}

/// [`oscillation_stats`] of the constrained numeraire on every path.
pub fn oscillation_experiment(batch: &SimBatch, alpha: DrawdownParam, eps: f64) -> Result<Vec<OscillationStats>> {
    batch.map_paths(|p| {
        let xhat = p.numeraire(batch.model())?.wealth;
        oscillation_stats(&az_forward(&xhat, alpha)?, alpha, eps)
    })
}

/// Does the relative drawdown reach `alpha` before the numeraire reaches
/// `e` times its starting value? `None` when neither happens on the grid.
pub fn race_outcome(xhat: &SampledPath, alpha: DrawdownParam) -> Result<Option<bool>> {
    let a = open_alpha(alpha)?;
    let dd = crate::path::first_drawdown_hit(xhat, a, StopIndex::ZERO)?;
    let up = first_hit_level(xhat, std::f64::consts::E * xhat.values()[0], StopIndex::ZERO);
    Ok(match (dd, up) {
        (StopIndex::Never, StopIndex::Never) => None,
        _ => Some(dd < up),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaceReport {
    /// Frequency of the drawdown winning.
    pub estimate: MCEstimate,
    /// Paths where neither event occurred.
    pub excluded: usize,
}

pub fn drawdown_race(batch: &SimBatch, alpha: DrawdownParam) -> Result<RaceReport> {
    open_alpha(alpha)?;
    let outcomes = batch.map_paths(|p| race_outcome(&p.numeraire(batch.model())?.wealth, alpha))?;
    let wins: Vec<f64> = outcomes.iter().flatten().map(|&w| if w { 1.0 } else { 0.0 }).collect();
    Ok(RaceReport {
        estimate: MCEstimate::from_samples(&wins)?,
        excluded: outcomes.iter().filter(|o| o.is_none()).count(),
    })
}

/// Distance between the finite-horizon optimum for cycle `n` and the
/// constrained numeraire on `[0, tau_l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TurnpikeRow {
    pub n: usize,
    /// Fraction of paths with `T_{n-1/2} <= tau_l`.
    pub p_started: f64,
    /// Fraction of paths with a nonzero sup-deviation.
    pub p_deviating: f64,
    pub mean_sup_dev: f64,
    pub max_sup_dev: f64,
    /// Paths that deviate although `T_{n-1/2} > tau_l`. Zero by construction.
    pub unexplained: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurnpikeReport {
    pub rows: Vec<TurnpikeRow>,
    /// Paths on which `tau_l` was not reached on the grid.
    pub censored: usize,
}

/// Per-path result: `tau` censored flag, and `(started, sup_dev)` for each n.
fn turnpike_path(
    xhat: &SampledPath,
    alpha: DrawdownParam,
    level: f64,
    n_list: &[usize],
) -> Result<(bool, Vec<(bool, f64)>)> {
    let constrained = az_forward(xhat, alpha)?;
    let cycles = cycle_times(xhat, alpha)?;
    let tau = first_hit_level(xhat, level.exp(), StopIndex::ZERO);
    let end = tau.clamp_to(xhat.last_index());
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let start = cycles.start(n);
        let started = start.is_finite() && start <= tau;
        let fh = finite_horizon_from_parts(xhat, &constrained, &cycles, alpha.value(), n);
        let dev = fh.path.values()[..=end]
            .iter()
            .zip(&constrained.values()[..=end])
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
        out.push((started, dev));
    }
    Ok((!tau.is_finite(), out))
}

pub fn turnpike_experiment(
    batch: &SimBatch,
    alpha: DrawdownParam,
    level: f64,
    n_list: &[usize],
) -> Result<TurnpikeReport> {
    open_alpha(alpha)?;
    if n_list.contains(&0) {
        return Err(Error::invalid("cycle numbers start at 1"));
    }
    let per_path = batch.map_paths(|p| turnpike_path(&p.numeraire(batch.model())?.wealth, alpha, level, n_list))?;
    let total = per_path.len() as f64;
    let rows = n_list
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let col: Vec<(bool, f64)> = per_path.iter().map(|r| r.1[j]).collect();
            let devs: Vec<f64> = col.iter().map(|c| c.1).collect();
            TurnpikeRow {
                n,
                p_started: col.iter().filter(|c| c.0).count() as f64 / total,
                p_deviating: col.iter().filter(|c| c.1 > 0.0).count() as f64 / total,
                mean_sup_dev: crate::stats::pairwise_sum(&devs) / total,
                max_sup_dev: devs.iter().copied().fold(0.0, f64::max),
                unexplained: col.iter().filter(|c| !c.0 && c.1 > 0.0).count(),
            }
        })
        .collect();
    Ok(TurnpikeReport {
        rows,
        censored: per_path.iter().filter(|r| r.0).count(),
    })
}

/// Running extremes of the cycle ratios at a checkpoint `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub n: usize,
    /// Paths with at least `n` completed cycles.
    pub paths: usize,
    pub median_running_min: f64,
    pub median_running_max: f64,
    /// Fraction of those paths whose running max exceeds `10 / (2 - alpha)`.
    pub frac_max_above_ten_floors: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioOscillation {
    pub rows: Vec<RatioRow>,
    pub min_zeta: f64,
    /// Spearman correlation of consecutive `(zeta_n, zeta_{n+1})` pairs.
    pub lag1_rank_autocorr: f64,
    pub n_pairs: usize,
}

pub fn horizon_ratio_oscillation(batch: &SimBatch, alpha: DrawdownParam, n_list: &[usize]) -> Result<RatioOscillation> {
    let max_n = n_list.iter().copied().max().unwrap_or(0);
    if max_n == 0 {
        return Err(Error::invalid("n_list must contain a positive cycle number"));
    }
    let a = open_alpha(alpha)?;
    let per_path = batch.map_paths(|p| {
        let xhat = p.numeraire(batch.model())?.wealth;
        Ok(path_zetas(&xhat, alpha, max_n, p.path_index())?
            .into_iter()
            .map(|z| z.zeta)
            .collect::<Vec<f64>>())
    })?;
    ratio_oscillation_from(&per_path, a, n_list)
}

/// [`horizon_ratio_oscillation`] from already harvested ratios, one
/// sequence per path in cycle order.
pub fn ratio_oscillation_from(per_path: &[Vec<f64>], a: f64, n_list: &[usize]) -> Result<RatioOscillation> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::invalid("drawdown cycles need alpha in (0, 1)"));
    }
    let floor = 1.0 / (2.0 - a);
    let rows = n_list
        .iter()
        .map(|&n| {
            let mut mins = Vec::new();
            let mut maxs = Vec::new();
            for z in per_path.iter().filter(|z| z.len() >= n && n > 0) {
                mins.push(z[..n].iter().copied().fold(f64::INFINITY, f64::min));
                maxs.push(z[..n].iter().copied().fold(f64::NEG_INFINITY, f64::max));
            }
            let above = maxs.iter().filter(|&&m| m > 10.0 * floor).count();
            RatioRow {
                n,
                paths: maxs.len(),
                median_running_min: median(&mut mins),
                median_running_max: median(&mut maxs),
                frac_max_above_ten_floors: if maxs.is_empty() {
                    f64::NAN
                } else {
                    above as f64 / maxs.len() as f64
                },
            }
        })
        .collect();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for z in per_path {
        for w in z.windows(2) {
            xs.push(w[0]);
            ys.push(w[1]);
        }
    }
    let lag1 = if xs.len() >= 3 {
        rank_correlation(&xs, &ys)
    } else {
        f64::NAN
    };
    Ok(RatioOscillation {
        rows,
        min_zeta: per_path.iter().flatten().copied().fold(f64::INFINITY, f64::min),
        lag1_rank_autocorr: lag1,
        n_pairs: xs.len(),
    })
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

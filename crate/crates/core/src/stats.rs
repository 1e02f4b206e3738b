//! Monte Carlo estimators and goodness-of-fit statistics.

use crate::error::{Error, Result};
use crate::path::cmp_f64;

/// Sample mean with standard error.
///
/// Non-finite samples are excluded from the mean and counted in `flagged`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    pub se: f64,
    /// Number of finite samples the estimate is based on.
    pub n: usize,
    pub flagged: usize,
}

impl MCEstimate {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let finite: Vec<f64> = samples.iter().copied().filter(|x| x.is_finite()).collect();
        let flagged = samples.len() - finite.len();
        let n = finite.len();
        if n < 2 {
            return Err(Error::invalid(format!(
                "need at least two finite samples, got {n} ({flagged} flagged)"
            )));
        }
        let mean = pairwise_sum(&finite) / n as f64;
        let dev: Vec<f64> = finite.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = pairwise_sum(&dev) / (n - 1) as f64;
        Ok(Self {
            mean,
            se: (var / n as f64).sqrt(),
            n,
            flagged,
        })
    }

    /// Two-sided 95% normal interval.
    pub fn ci95(&self) -> (f64, f64) {
        (self.mean - 1.96 * self.se, self.mean + 1.96 * self.se)
    }

    /// One-sided check `mean <= bound + k * se`.
    pub fn at_most(&self, bound: f64, k: f64) -> bool {
        self.mean <= bound + k * self.se
    }

    /// One-sided check `mean >= bound - k * se`.
    pub fn at_least(&self, bound: f64, k: f64) -> bool {
        self.mean >= bound - k * self.se
    }
}

/// Pairwise (cascade) summation in index order. The result depends only on
/// the slice contents, never on how they were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Result of a one-sample Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

pub const KS_MIN_SAMPLES: usize = 20;

/// One-sample KS test of `samples` against a continuous `cdf`, with the
/// p-value taken from the asymptotic Kolmogorov distribution.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::invalid(format!(
            "KS test needs at least {KS_MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("KS test samples contain NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(cmp_f64);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival(n.sqrt() * d),
        n: sorted.len(),
    })
}

/// `P(K > x)` for the Kolmogorov distribution, series truncated at 100 terms.
pub fn kolmogorov_survival(x: f64) -> f64 {
    // Below 0.2 the survival function is 1 to double precision, while the
    // alternating series needs far more than 100 terms to converge.
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100u32 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Empirical CDF of sorted samples evaluated at `x`.
pub fn ecdf_sorted(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&s| s <= x) as f64 / sorted.len() as f64
}

/// Average ranks (1-based, ties share their mean rank).
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| cmp_f64(&xs[a], &xs[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Pearson correlation of paired samples; `NaN` if either side is constant.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = pairwise_sum(xs) / n;
    let my = pairwise_sum(ys) / n;
    let sxy: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let sxx: Vec<f64> = xs.iter().map(|x| (x - mx) * (x - mx)).collect();
    let syy: Vec<f64> = ys.iter().map(|y| (y - my) * (y - my)).collect();
    pairwise_sum(&sxy) / (pairwise_sum(&sxx) * pairwise_sum(&syy)).sqrt()
}

/// Spearman rank correlation of paired samples.
pub fn rank_correlation(xs: &[f64], ys: &[f64]) -> f64 {
    correlation(&ranks(xs), &ranks(ys))
}

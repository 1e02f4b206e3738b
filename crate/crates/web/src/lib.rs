//! Browser demo. Three operations back the page in `www/`:
//! a single-path explorer, a cycle-ratio histogram, and the fractional
//! Kelly curve. Everything runs on the self-financing DDS market, where the
//! asset is its own growth-optimal portfolio.
//!
//! The plain functions are ordinary Rust and are tested natively; the
//! `js_*` wrappers only convert errors for JavaScript.

use drawdown_kelly::horizon::{zeta_analytic_cdf, zeta_samples, zeta_scale_cdf};
use drawdown_kelly::path::relative_drawdown;
use drawdown_kelly::{az_forward, kelly_fraction, DrawdownParam, MarketModel, Result, SimBatch, TimeGrid};
use wasm_bindgen::prelude::*;

/// Steps shown by the explorer are capped so the page stays responsive.
pub const MAX_STEPS: usize = 200_000;
pub const MAX_ZETA_PATHS: usize = 2_000;

const ZETA_DT: f64 = 1e-3;
const ZETA_HORIZON: f64 = 40.0;
const ZETA_CYCLES: usize = 10;

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct PathView {
    times: Vec<f64>,
    xhat: Vec<f64>,
    constrained: Vec<f64>,
    rel_dd: Vec<f64>,
}

#[wasm_bindgen]
impl PathView {
    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    /// Unconstrained growth-optimal wealth.
    #[wasm_bindgen(getter)]
    pub fn xhat(&self) -> Vec<f64> {
        self.xhat.clone()
    }

    /// Drawdown-constrained wealth.
    #[wasm_bindgen(getter)]
    pub fn constrained(&self) -> Vec<f64> {
        self.constrained.clone()
    }

    /// Constrained wealth over its running maximum.
    #[wasm_bindgen(getter)]
    pub fn rel_dd(&self) -> Vec<f64> {
        self.rel_dd.clone()
    }
}

fn param(alpha: f64) -> Result<DrawdownParam> {
    DrawdownParam::new(alpha)
}

fn steps(n_steps: usize) -> Result<usize> {
    if n_steps == 0 || n_steps > MAX_STEPS {
        return Err(drawdown_kelly::Error::InvalidInput(format!(
            "steps must be in 1..={MAX_STEPS}"
        )));
    }
    Ok(n_steps)
}

pub fn explore_path(alpha: f64, seed: u64, n_steps: usize, dt: f64) -> Result<PathView> {
    let a = param(alpha)?;
    let batch = SimBatch::new(MarketModel::dds_preset(), TimeGrid::new(dt, steps(n_steps)?)?, 1, seed)?;
    let xhat = batch.numeraire_path(0)?.wealth;
    let constrained = az_forward(&xhat, a)?;
    let rel_dd = relative_drawdown(&constrained)?;
    let grid = xhat.grid();
    Ok(PathView {
        times: (0..grid.len()).map(|k| grid.time(k)).collect(),
        xhat: xhat.into_values(),
        constrained: constrained.into_values(),
        rel_dd: rel_dd.into_values(),
    })
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct ZetaView {
    samples: Vec<f64>,
    truncated_paths: usize,
}

#[wasm_bindgen]
impl ZetaView {
    /// Cycle ratios, sorted ascending.
    #[wasm_bindgen(getter)]
    pub fn samples(&self) -> Vec<f64> {
        self.samples.clone()
    }

    /// Paths that ended before completing every requested cycle.
    #[wasm_bindgen(getter)]
    pub fn truncated_paths(&self) -> usize {
        self.truncated_paths
    }
}

/// Harvests up to ten cycle ratios per simulated path.
pub fn zeta_sample(alpha: f64, n_paths: usize, seed: u64) -> Result<ZetaView> {
    let a = param(alpha)?;
    if !(2..=MAX_ZETA_PATHS).contains(&n_paths) {
        return Err(drawdown_kelly::Error::InvalidInput(format!(
            "paths must be in 2..={MAX_ZETA_PATHS}"
        )));
    }
    let batch = SimBatch::new(
        MarketModel::dds_preset(),
        TimeGrid::with_horizon(ZETA_DT, ZETA_HORIZON)?,
        n_paths,
        seed,
    )?;
    let harvest = zeta_samples(&batch, a, ZETA_CYCLES)?;
    let mut samples = harvest.values();
    samples.sort_by(f64::total_cmp);
    Ok(ZetaView {
        samples,
        truncated_paths: harvest.truncated_paths,
    })
}

/// The two candidate distribution functions evaluated on `zs`:
/// first the closed form derived for a fixed floor, then the law implied by
/// the scale function `-1/x` of the numeraire.
pub fn zeta_cdfs(alpha: f64, zs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let a = param(alpha)?;
    let fixed = zs.iter().map(|&z| zeta_analytic_cdf(z, a)).collect::<Result<_>>()?;
    let scale = zs.iter().map(|&z| zeta_scale_cdf(z, a)).collect::<Result<_>>()?;
    Ok((fixed, scale))
}

/// Fraction of wealth in the numeraire portfolio as a function of the
/// relative drawdown, sampled at `n + 1` evenly spaced points of `[0, 1]`.
pub fn kelly_curve(alpha: f64, n: usize) -> Result<Vec<f64>> {
    let a = param(alpha)?;
    let n = n.max(1);
    (0..=n).map(|i| kelly_fraction(i as f64 / n as f64, a)).collect()
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = explorePath)]
pub fn js_explore_path(alpha: f64, seed: u32, n_steps: u32, dt: f64) -> std::result::Result<PathView, JsError> {
    js(explore_path(alpha, seed.into(), n_steps as usize, dt))
}

#[wasm_bindgen(js_name = zetaSample)]
pub fn js_zeta_sample(alpha: f64, n_paths: u32, seed: u32) -> std::result::Result<ZetaView, JsError> {
    js(zeta_sample(alpha, n_paths as usize, seed.into()))
}

/// Flat array: the fixed-floor values followed by the scale-law values.
#[wasm_bindgen(js_name = zetaCdfs)]
pub fn js_zeta_cdfs(alpha: f64, zs: &[f64]) -> std::result::Result<Vec<f64>, JsError> {
    js(zeta_cdfs(alpha, zs)).map(|(mut a, b)| {
        a.extend(b);
        a
    })
}

#[wasm_bindgen(js_name = kellyCurve)]
pub fn js_kelly_curve(alpha: f64, n: u32) -> std::result::Result<Vec<f64>, JsError> {
    js(kelly_curve(alpha, n as usize))
}

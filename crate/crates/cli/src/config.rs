//! TOML experiment configuration. Command-line flags override file values,
//! which override the built-in defaults.

use std::path::{Path, PathBuf};

use drawdown_kelly::{MarketModel, TimeGrid};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// One asset, drift 0.2, volatility 0.2.
    Gbm,
    /// One asset, unit drift and volatility: the asset is its own numeraire.
    Dds,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub preset: Option<Preset>,
    pub d: Option<usize>,
    pub mu: Option<Vec<f64>>,
    /// Volatility matrix, one row per asset.
    pub sigma: Option<Vec<Vec<f64>>>,
    pub s0: Option<Vec<f64>>,
    pub pinv_tol: Option<f64>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub n_paths: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub alpha: Option<f64>,
    pub level: Option<f64>,
    pub max_n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub dump_samples: Option<bool>,
}

pub fn load(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<FileConfig, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub model_desc: String,
    pub model: MarketModel,
    pub grid: TimeGrid,
    pub n_paths: usize,
    pub seed: u64,
    pub alpha: f64,
    pub level: f64,
    pub max_n: usize,
    pub n_list: Vec<usize>,
    pub eps: f64,
    pub out_dir: Option<PathBuf>,
    pub dump_samples: bool,
}

impl Settings {
    /// `key=value` pairs echoed into every report. Thread count is left out
    /// on purpose: it must not change any output.
    pub fn echo(&self) -> Vec<(String, String)> {
        vec![
            ("model".into(), self.model_desc.clone()),
            ("dt".into(), self.grid.dt().to_string()),
            ("n_steps".into(), self.grid.n_steps().to_string()),
            ("n_paths".into(), self.n_paths.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("alpha".into(), self.alpha.to_string()),
            ("level".into(), self.level.to_string()),
        ]
    }
}

/// Values supplied on the command line, all optional.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub n_paths: Option<usize>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub level: Option<f64>,
    pub max_n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub eps: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub dump_samples: bool,
}

/// Per-experiment fallbacks used when neither the file nor the flags say.
#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub preset: Preset,
    pub dt: f64,
    pub t_max: f64,
    pub n_paths: usize,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn build_model(m: &ModelSection, preset: Option<Preset>) -> Result<(MarketModel, String), CliError> {
    let explicit = m.mu.is_some() || m.sigma.is_some() || m.s0.is_some() || m.d.is_some();
    let model = match (preset, explicit) {
        (Some(_), true) => return Err(bad("give either a preset or explicit mu/sigma/s0, not both")),
        (Some(Preset::Gbm), false) => (MarketModel::gbm_preset(), "gbm".to_string()),
        (Some(Preset::Dds), false) => (MarketModel::dds_preset(), "dds".to_string()),
        (None, true) => {
            let mu = m.mu.clone().ok_or_else(|| bad("model.mu is required"))?;
            let sigma = m.sigma.clone().ok_or_else(|| bad("model.sigma is required"))?;
            let d = m.d.unwrap_or(mu.len());
            let s0 = m.s0.clone().unwrap_or_else(|| vec![1.0; d]);
            if mu.len() != d || s0.len() != d || sigma.len() != d {
                return Err(bad(format!(
                    "model.d = {d} but mu has {}, s0 has {} and sigma has {} rows",
                    mu.len(),
                    s0.len(),
                    sigma.len()
                )));
            }
            let k = sigma.first().map_or(0, Vec::len);
            if k == 0 || sigma.iter().any(|r| r.len() != k) {
                return Err(bad("model.sigma rows must be nonempty and of equal length"));
            }
            let vol = DMatrix::from_row_iterator(d, k, sigma.iter().flatten().copied());
            let desc = format!("custom d={d} factors={k}");
            let model = MarketModel::constant(DVector::from_vec(mu), vol, s0).map_err(|e| bad(e.to_string()))?;
            (model, desc)
        }
        (None, false) => unreachable!("caller supplies a default preset"),
    };
    Ok(model)
}

pub fn resolve(file: &FileConfig, cli: &Overrides, defaults: Defaults) -> Result<Settings, CliError> {
    let m = &file.model;
    let explicit = m.mu.is_some() || m.sigma.is_some() || m.s0.is_some() || m.d.is_some();
    let preset = cli
        .preset
        .or(m.preset)
        .or(if explicit { None } else { Some(defaults.preset) });
    let (mut model, model_desc) = build_model(m, preset)?;
    if let Some(tol) = m.pinv_tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(bad("model.pinv_tol must be positive"));
        }
        model = model.with_pinv_tol(tol).map_err(|e| bad(e.to_string()))?;
    }
    let dt = cli.dt.or(m.dt).unwrap_or(defaults.dt);
    let t_max = cli.t_max.or(m.t_max).unwrap_or(defaults.t_max);
    let grid = TimeGrid::with_horizon(dt, t_max).map_err(|e| bad(e.to_string()))?;
    let n_paths = cli.n_paths.or(m.n_paths).unwrap_or(defaults.n_paths);
    if n_paths < 2 {
        return Err(bad("n_paths must be at least 2"));
    }
    let e = &file.experiment;
    let alpha = cli.alpha.or(e.alpha).unwrap_or(0.5);
    if !(0.0..1.0).contains(&alpha) {
        return Err(bad(format!("alpha must be in [0, 1), got {alpha}")));
    }
    let level = cli.level.or(e.level).unwrap_or(1.0);
    if !(level.is_finite() && level > 0.0) {
        return Err(bad("level must be positive"));
    }
    let max_n = cli.max_n.or(e.max_n).unwrap_or(10);
    let n_list = cli
        .n_list
        .clone()
        .or(e.n_list.clone())
        .unwrap_or_else(|| (1..=6).collect());
    if max_n == 0 || n_list.is_empty() || n_list.contains(&0) {
        return Err(bad("cycle numbers start at 1"));
    }
    let eps = cli.eps.or(e.eps).unwrap_or(0.02);
    if !(eps.is_finite() && eps > 0.0 && eps < 1.0) {
        return Err(bad("eps must be in (0, 1)"));
    }
    Ok(Settings {
        model_desc,
        model,
        grid,
        n_paths,
        seed: cli.seed.or(m.seed).unwrap_or(42),
        alpha,
        level,
        max_n,
        n_list,
        eps,
        out_dir: cli.out_dir.clone().or(file.output.dir.clone()),
        dump_samples: cli.dump_samples || file.output.dump_samples.unwrap_or(false),
    })
}

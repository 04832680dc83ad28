//! JSON config file support. Every struct rejects unknown keys so a typo
//! fails loudly with the offending key named in the error message.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use topkrf::{Hyperparams, MaxFeatures};

/// Optional file-level defaults for the experiment commands; explicit
/// command-line flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub manifest: Option<PathBuf>,
    pub k_list: Option<Vec<usize>>,
    pub train_fraction: Option<f64>,
    pub hyperparams: Option<HpConfig>,
    pub analytical: Option<AnalyticalJob>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HpConfig {
    pub n_trees: Option<usize>,
    pub max_features: Option<MaxFeaturesSpec>,
    pub min_samples_leaf: Option<usize>,
    pub min_samples_split: Option<usize>,
    pub max_depth: Option<usize>,
}

/// "sqrt", "all", or a fraction of the feature count in (0, 1].
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MaxFeaturesSpec {
    Named(String),
    Fraction(f64),
}

impl MaxFeaturesSpec {
    pub fn resolve(&self) -> Result<MaxFeatures> {
        match self {
            MaxFeaturesSpec::Named(s) => parse_max_features(s),
            MaxFeaturesSpec::Fraction(f) => Ok(MaxFeatures::Fraction(*f)),
        }
    }
}

pub fn parse_max_features(s: &str) -> Result<MaxFeatures> {
    match s {
        "sqrt" => Ok(MaxFeatures::Sqrt),
        "all" => Ok(MaxFeatures::All),
        other => {
            let f: f64 = other
                .parse()
                .with_context(|| format!("max_features '{other}' is not sqrt, all, or a fraction"))?;
            Ok(MaxFeatures::Fraction(f))
        }
    }
}

/// What the `analytical` subcommand should compute.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub struct AnalyticalJob {
    pub mode: AnalyticalMode,
    pub n: usize,
    pub k: usize,
    pub theta_star: f64,
    /// Used by mc and dump; the sweep varies theta over the grid.
    pub theta: Option<f64>,
    pub d1: f64,
    pub d2: f64,
    /// Sweep grid, default {start: 0, stop: 1, step: 0.01}.
    pub theta_grid: Option<GridRange>,
    /// Monte Carlo draws, default 100000.
    pub draws: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalyticalMode {
    /// Closed-form expected scores over a theta grid.
    Sweep,
    /// Monte Carlo estimates next to the closed forms.
    Mc,
    /// Per-index true weights next to one sampled estimate.
    Dump,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridRange {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || self.stop < self.start {
            bail!("theta_grid requires step > 0 and stop >= start");
        }
        let count = ((self.stop - self.start) / self.step).round() as usize;
        Ok((0..=count)
            .map(|i| (self.start + i as f64 * self.step).min(self.stop))
            .collect())
    }
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("invalid config file {}", path.display()))
}

/// Layer config-file values under command-line flags and fall back to the
/// standard setting (1000 trees, sqrt features, leaf 1, split 5).
pub struct HpFlags {
    pub trees: Option<usize>,
    pub max_features: Option<String>,
    pub min_samples_leaf: Option<usize>,
    pub min_samples_split: Option<usize>,
    pub max_depth: Option<usize>,
}

pub fn resolve_hyperparams(
    flags: &HpFlags,
    file: Option<&HpConfig>,
    seed: u64,
) -> Result<Hyperparams> {
    let mut hp = Hyperparams::standard(seed);
    if let Some(f) = file {
        if let Some(v) = f.n_trees {
            hp.n_trees = v;
        }
        if let Some(mf) = &f.max_features {
            hp.max_features = mf.resolve()?;
        }
        if let Some(v) = f.min_samples_leaf {
            hp.min_samples_leaf = v;
        }
        if let Some(v) = f.min_samples_split {
            hp.min_samples_split = v;
        }
        if f.max_depth.is_some() {
            hp.max_depth = f.max_depth;
        }
    }
    if let Some(v) = flags.trees {
        hp.n_trees = v;
    }
    if let Some(s) = &flags.max_features {
        hp.max_features = parse_max_features(s)?;
    }
    if let Some(v) = flags.min_samples_leaf {
        hp.min_samples_leaf = v;
    }
    if let Some(v) = flags.min_samples_split {
        hp.min_samples_split = v;
    }
    if flags.max_depth.is_some() {
        hp.max_depth = flags.max_depth;
    }
    hp.validate()?;
    Ok(hp)
}

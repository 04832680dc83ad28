//! Experiment orchestration: train/evaluate runs with Top-k sweeps,
//! benchmark comparisons and hyperparameter grid search with
//! cross-validation. The CLI is a thin wrapper around these functions.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{kfold_indices, train_test_split, Dataset, SplitSpec};
use crate::dist::{
    deterministic_median, topk_sparsify, unconditional_dist, weight_sum_profile,
    ForecastDistribution,
};
use crate::error::Error;
use crate::forest::{fit_forest, forest_weights_batch, Forest, Hyperparams, MaxFeatures};
use crate::scoring::{evaluate, relative_score, Rule};
use crate::Result;

/// Full forecast distributions for every row of a test set.
pub fn forecast_test_set(
    forest: &Forest,
    test: &Dataset,
) -> Result<Vec<ForecastDistribution>> {
    let rows: Vec<&[f64]> = (0..test.n).map(|i| test.row(i)).collect();
    let weights = forest_weights_batch(forest, &rows)?;
    let support = Arc::new(forest.training_response.clone());
    Ok(weights
        .into_iter()
        .map(|w| ForecastDistribution::new(Arc::clone(&support), w))
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct KResult {
    pub k: usize,
    pub rel_crps: f64,
    pub rel_se: f64,
    /// Mean over test cases of the sum of the k largest weights before
    /// renormalization.
    pub avg_weight_sum: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalResult {
    pub name: String,
    pub n_train: usize,
    pub n_test: usize,
    pub crps_full: f64,
    pub se_full: f64,
    pub per_k: Vec<KResult>,
    /// Logged, not serialized: result files stay byte-identical across
    /// re-runs while timing goes to stderr / metadata.
    #[serde(skip_serializing)]
    pub wall_secs: f64,
}

/// Train on a shuffle split and evaluate the full forecast distribution
/// against its Top-k sparsifications.
pub fn evaluate_dataset(
    name: &str,
    d: &Dataset,
    hp: &Hyperparams,
    split: &SplitSpec,
    k_list: &[usize],
) -> Result<EvalResult> {
    validate_k_list(k_list)?;
    let start = Instant::now();
    let (train, test) = train_test_split(d, split)?;
    let forest = fit_forest(&train, hp)?;
    let full = forecast_test_set(&forest, &test)?;
    let crps_full = evaluate(&full, &test.response, Rule::Crps)?;
    let se_full = evaluate(&full, &test.response, Rule::Se)?;

    let weight_vectors: Vec<_> = full.iter().map(|d| d.weights().clone()).collect();
    let sums = weight_sum_profile(&weight_vectors, k_list)?;

    let mut per_k = Vec::with_capacity(k_list.len());
    for (&k, &avg_weight_sum) in k_list.iter().zip(&sums) {
        let sparsified: Vec<ForecastDistribution> = full
            .iter()
            .map(|d| topk_sparsify(d, k))
            .collect::<Result<_>>()?;
        let crps_k = evaluate(&sparsified, &test.response, Rule::Crps)?;
        let se_k = evaluate(&sparsified, &test.response, Rule::Se)?;
        per_k.push(KResult {
            k,
            rel_crps: relative_score(&crps_k, &crps_full)?,
            rel_se: relative_score(&se_k, &se_full)?,
            avg_weight_sum,
        });
    }
    Ok(EvalResult {
        name: name.to_string(),
        n_train: train.n,
        n_test: test.n,
        crps_full: crps_full.mean_score,
        se_full: se_full.mean_score,
        per_k,
        wall_secs: start.elapsed().as_secs_f64(),
    })
}

fn validate_k_list(k_list: &[usize]) -> Result<()> {
    if k_list.is_empty() {
        return Err(Error::invalid("k_list", "must be nonempty"));
    }
    if k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "k_list",
            "must be strictly ascending (deduplicated)",
        ));
    }
    if k_list[0] == 0 {
        return Err(Error::invalid("k_list", "k must be >= 1"));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkResult {
    pub name: String,
    pub crps_full: f64,
    /// Deterministic point forecast at the full forest's median.
    pub rel_crps_median_forecast: f64,
    /// Uniform 1/n over training responses, ignoring features.
    pub rel_crps_unconditional: f64,
    pub rel_crps_top3: f64,
    #[serde(skip_serializing)]
    pub wall_secs: f64,
}

/// Compare the full forest against the two feature-poor benchmarks of the
/// bar-chart comparison plus Top3.
pub fn benchmark_dataset(
    name: &str,
    d: &Dataset,
    hp: &Hyperparams,
    split: &SplitSpec,
) -> Result<BenchmarkResult> {
    let start = Instant::now();
    let (train, test) = train_test_split(d, split)?;
    let forest = fit_forest(&train, hp)?;
    let full = forecast_test_set(&forest, &test)?;
    let crps_full = evaluate(&full, &test.response, Rule::Crps)?;

    let medians: Vec<ForecastDistribution> = full.iter().map(deterministic_median).collect();
    let crps_median = evaluate(&medians, &test.response, Rule::Crps)?;

    let uncond = unconditional_dist(&train.response)?;
    let unconds: Vec<ForecastDistribution> = vec![uncond; test.n];
    let crps_uncond = evaluate(&unconds, &test.response, Rule::Crps)?;

    let top3: Vec<ForecastDistribution> = full
        .iter()
        .map(|d| topk_sparsify(d, 3))
        .collect::<Result<_>>()?;
    let crps_top3 = evaluate(&top3, &test.response, Rule::Crps)?;

    Ok(BenchmarkResult {
        name: name.to_string(),
        crps_full: crps_full.mean_score,
        rel_crps_median_forecast: relative_score(&crps_median, &crps_full)?,
        rel_crps_unconditional: relative_score(&crps_uncond, &crps_full)?,
        rel_crps_top3: relative_score(&crps_top3, &crps_full)?,
        wall_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CvSpec {
    KFold(usize),
    Holdout(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TuneTarget {
    Full,
    TopK(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub min_samples_leaf: Vec<usize>,
    pub max_features: Vec<MaxFeatures>,
    pub cv: CvSpec,
    pub tune_target: TuneTarget,
    pub tune_rule: Rule,
}

impl GridSpec {
    /// The 11 x 4 = 44 candidate default grid.
    pub fn default_grid(tune_target: TuneTarget, tune_rule: Rule) -> Self {
        GridSpec {
            min_samples_leaf: vec![1, 2, 4, 6, 8, 10, 15, 20, 30, 40, 50],
            max_features: vec![
                MaxFeatures::Fraction(0.333),
                MaxFeatures::Sqrt,
                MaxFeatures::Fraction(0.5),
                MaxFeatures::Fraction(1.0),
            ],
            cv: CvSpec::KFold(5),
            tune_target,
            tune_rule,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_samples_leaf.is_empty() || self.max_features.is_empty() {
            return Err(Error::invalid("grid", "empty candidate list"));
        }
        match self.cv {
            CvSpec::KFold(k) if k < 2 => Err(Error::invalid("cv", "K must be >= 2")),
            CvSpec::Holdout(f) if !(f > 0.0 && f < 1.0) => {
                Err(Error::invalid("cv", "holdout fraction must lie in (0,1)"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridRow {
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub cv_mean_score: f64,
}

fn cv_score(
    train: &Dataset,
    hp: &Hyperparams,
    grid: &GridSpec,
    seed: u64,
) -> Result<f64> {
    let score_rule = grid.tune_rule;
    let folds: Vec<(Vec<usize>, Vec<usize>)> = match grid.cv {
        CvSpec::KFold(k) => {
            let folds = kfold_indices(train.n, k, seed)?;
            (0..k)
                .map(|f| {
                    let valid = folds[f].clone();
                    let fit: Vec<usize> = folds
                        .iter()
                        .enumerate()
                        .filter(|&(g, _)| g != f)
                        .flat_map(|(_, idx)| idx.iter().copied())
                        .collect();
                    (fit, valid)
                })
                .collect()
        }
        CvSpec::Holdout(frac) => {
            let mut idx: Vec<usize> = (0..train.n).collect();
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            idx.shuffle(&mut rng);
            let n_fit = ((1.0 - frac) * train.n as f64).floor() as usize;
            if n_fit == 0 || n_fit == train.n {
                return Err(Error::EmptyPartition);
            }
            vec![(idx[..n_fit].to_vec(), idx[n_fit..].to_vec())]
        }
    };

    let mut total = 0.0;
    for (fit_idx, valid_idx) in &folds {
        if fit_idx.is_empty() || valid_idx.is_empty() {
            return Err(Error::EmptyPartition);
        }
        let fit_set = train.select_rows(fit_idx)?;
        let valid_set = train.select_rows(valid_idx)?;
        let forest = fit_forest(&fit_set, hp)?;
        let mut forecasts = forecast_test_set(&forest, &valid_set)?;
        if let TuneTarget::TopK(k) = grid.tune_target {
            forecasts = forecasts
                .iter()
                .map(|d| topk_sparsify(d, k))
                .collect::<Result<_>>()?;
        }
        let report = evaluate(&forecasts, &valid_set.response, score_rule)?;
        total += report.mean_score;
    }
    Ok(total / folds.len() as f64)
}

/// Grid search over (min_samples_leaf, max_features) candidates.
///
/// Candidates are enumerated leaf-size ascending, then feature candidates
/// in list order; ties keep the first candidate seen.
pub fn grid_search(
    train: &Dataset,
    base: &Hyperparams,
    grid: &GridSpec,
    seed: u64,
) -> Result<(Hyperparams, Vec<GridRow>)> {
    grid.validate()?;
    let mut rows = Vec::with_capacity(grid.min_samples_leaf.len() * grid.max_features.len());
    let mut best: Option<(f64, Hyperparams)> = None;
    for &leaf in &grid.min_samples_leaf {
        for &mf in &grid.max_features {
            let hp = Hyperparams {
                min_samples_leaf: leaf,
                max_features: mf,
                ..base.clone()
            };
            hp.validate()?;
            let score = cv_score(train, &hp, grid, seed)?;
            rows.push(GridRow {
                min_samples_leaf: leaf,
                max_features: mf,
                cv_mean_score: score,
            });
            if best.as_ref().map_or(true, |(s, _)| score < *s) {
                best = Some((score, hp));
            }
        }
    }
    let (_, best_hp) = best.expect("nonempty grid");
    Ok((best_hp, rows))
}

/// Lower median: for even counts the smaller of the two central values.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(sorted[(sorted.len() - 1) / 2])
}

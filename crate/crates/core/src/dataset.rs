//! Tabular dataset loading, encoding and splitting.
//!
//! Every downstream module works on a [`Dataset`]: a dense n×p matrix of
//! finite 64-bit reals plus a length-n response vector. CSV loading drops
//! rows with missing cells (reporting the count) and one-hot encodes
//! categorical columns when requested.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Dense numeric feature matrix plus response vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Row-major n×p feature matrix.
    pub features: Vec<f64>,
    pub response: Vec<f64>,
    pub feature_names: Vec<String>,
    pub n: usize,
    pub p: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, response: Vec<f64>, feature_names: Vec<String>) -> Result<Self> {
        let n = response.len();
        let p = feature_names.len();
        if n == 0 || p == 0 {
            return Err(Error::EmptyDataset);
        }
        if features.len() != n * p {
            return Err(Error::LengthMismatch(format!(
                "feature matrix has {} entries, expected {}x{}",
                features.len(),
                n,
                p
            )));
        }
        if features.iter().chain(response.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Other("non-finite entry in dataset".into()));
        }
        let mut sorted = feature_names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != feature_names.len() {
            return Err(Error::Other("duplicate feature names".into()));
        }
        Ok(Dataset {
            features,
            response,
            feature_names,
            n,
            p,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.p..(i + 1) * self.p]
    }

    /// New dataset containing the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Dataset> {
        if idx.is_empty() {
            return Err(Error::EmptyPartition);
        }
        let mut features = Vec::with_capacity(idx.len() * self.p);
        let mut response = Vec::with_capacity(idx.len());
        for &i in idx {
            features.extend_from_slice(self.row(i));
            response.push(self.response[i]);
        }
        Dataset::new(features, response, self.feature_names.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CategoricalPolicy {
    OneHot,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    RandomShuffle,
    KFold(usize),
    HoldoutValidation(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub mode: SplitMode,
}

impl SplitSpec {
    pub fn random_shuffle(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::invalid(
                "train_fraction",
                format!("{train_fraction} not in (0,1)"),
            ));
        }
        Ok(SplitSpec {
            train_fraction,
            seed,
            mode: SplitMode::RandomShuffle,
        })
    }
}

/// Result of [`load_csv`]: the dataset plus how many rows were dropped
/// because of missing cells.
#[derive(Debug, Clone)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    pub dropped_rows: usize,
}

fn parse_cell(cell: &str) -> Option<f64> {
    let t = cell.trim();
    if t.is_empty() {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Load an RFC-4180-style CSV with a mandatory header row.
///
/// The target column is removed from the features. Columns where any cell
/// fails numeric parsing are treated as categorical; under the one-hot
/// policy each distinct level becomes a dummy column. Rows with missing
/// (empty) cells are dropped and counted.
pub fn load_csv(
    path: impl AsRef<Path>,
    target: &str,
    categorical_policy: CategoricalPolicy,
) -> Result<LoadedCsv> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path.as_ref())?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
    let target_idx = headers
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| Error::MissingTarget(target.to_string()))?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(record.iter().map(|c| c.to_string()).collect());
    }

    // Drop rows with any missing (empty) cell.
    let total = rows.len();
    rows.retain(|r| r.iter().all(|c| !c.trim().is_empty()));
    let dropped_rows = total - rows.len();
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }

    // Classify columns: a column is categorical iff any cell fails numeric
    // parsing.
    let ncols = headers.len();
    let mut categorical = vec![false; ncols];
    for row in &rows {
        for (j, cell) in row.iter().enumerate() {
            if parse_cell(cell).is_none() {
                categorical[j] = true;
            }
        }
    }
    if categorical[target_idx] {
        return Err(Error::NonNumericTarget {
            column: target.to_string(),
            row: rows
                .iter()
                .position(|r| parse_cell(&r[target_idx]).is_none())
                .unwrap_or(0),
        });
    }

    let mut feature_names = Vec::new();
    // Per output column: (source column, Some(level) for dummies).
    let mut columns: Vec<(usize, Option<String>)> = Vec::new();
    for j in 0..ncols {
        if j == target_idx {
            continue;
        }
        if categorical[j] {
            match categorical_policy {
                CategoricalPolicy::Reject => {
                    return Err(Error::CategoricalRejected(headers[j].clone()))
                }
                CategoricalPolicy::OneHot => {
                    let mut levels: Vec<String> =
                        rows.iter().map(|r| r[j].trim().to_string()).collect();
                    levels.sort();
                    levels.dedup();
                    for level in levels {
                        feature_names.push(format!("{}={}", headers[j], level));
                        columns.push((j, Some(level)));
                    }
                }
            }
        } else {
            feature_names.push(headers[j].clone());
            columns.push((j, None));
        }
    }

    let n = rows.len();
    let p = columns.len();
    let mut features = Vec::with_capacity(n * p);
    let mut response = Vec::with_capacity(n);
    for row in &rows {
        for (src, level) in &columns {
            let v = match level {
                Some(level) => {
                    if row[*src].trim() == level.as_str() {
                        1.0
                    } else {
                        0.0
                    }
                }
                None => parse_cell(&row[*src]).expect("numeric column"),
            };
            features.push(v);
        }
        response.push(parse_cell(&row[target_idx]).expect("numeric target"));
    }

    Ok(LoadedCsv {
        dataset: Dataset::new(features, response, feature_names)?,
        dropped_rows,
    })
}

/// Shuffle-split into disjoint train/test with |train| = floor(fraction*n).
pub fn train_test_split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    match spec.mode {
        SplitMode::RandomShuffle => {}
        _ => {
            return Err(Error::invalid(
                "mode",
                "train_test_split requires random-shuffle mode",
            ))
        }
    }
    let mut idx: Vec<usize> = (0..d.n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    idx.shuffle(&mut rng);
    let n_train = (spec.train_fraction * d.n as f64).floor() as usize;
    if n_train == 0 || n_train == d.n {
        return Err(Error::EmptyPartition);
    }
    let (train_idx, test_idx) = idx.split_at(n_train);
    Ok((d.select_rows(train_idx)?, d.select_rows(test_idx)?))
}

/// K disjoint folds partitioning {0..n-1}; fold sizes differ by at most 1.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::invalid("K", format!("{k} < 2")));
    }
    if n < k {
        return Err(Error::invalid("n", format!("{n} < K={k}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let base = n / k;
    let rem = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < rem);
        folds.push(idx[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

/// Draw floor(fraction*n) rows without replacement, deterministic per seed.
pub fn subsample(d: &Dataset, fraction: f64, seed: u64) -> Result<Dataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid("fraction", format!("{fraction} not in (0,1]")));
    }
    let m = (fraction * d.n as f64).floor() as usize;
    if m == 0 {
        return Err(Error::EmptyPartition);
    }
    let mut idx: Vec<usize> = (0..d.n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    idx.truncate(m);
    d.select_rows(&idx)
}

/// One entry of the dataset manifest consumed by the experiment runner.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub name: String,
    pub path: String,
    pub target: String,
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let text = std::fs::read_to_string(path)?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text)
        .map_err(|e| Error::Other(format!("invalid manifest: {e}")))?;
    Ok(entries)
}

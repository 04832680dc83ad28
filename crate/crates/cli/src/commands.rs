//! Implementations of the CLI subcommands. Result files are deterministic
//! for a given config and seed; the timestamp lives in metadata.json only.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use topkrf::analytical::{
    expected_crps_closed, expected_se_closed, mc_expected_scores, sample_estimated_weights,
    theta_sweep, true_weights, AnalyticalConfig,
};
use topkrf::dataset::{load_csv, load_manifest, CategoricalPolicy, SplitSpec};
use topkrf::dist::{dist_mean, dist_quantile, scenarios, topk_sparsify, Provenance};
use topkrf::experiment::{
    benchmark_dataset, evaluate_dataset, forecast_test_set, grid_search, lower_median, GridSpec,
};
use topkrf::forest::{fit_forest, persist};
use topkrf::scoring::evaluate;
use topkrf::{Dataset, Forest, Hyperparams, Rule};

use crate::config::AnalyticalJob;

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)
        .with_context(|| format!("cannot write {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// Timestamp and invocation echo, kept out of the result files so those
/// stay byte-identical across re-runs.
pub fn write_metadata(out: &Path, command: &str, seed: u64, threads: &str) -> Result<()> {
    let unix_secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = json!({
        "command": command,
        "seed": seed,
        "threads": threads,
        "unix_timestamp": unix_secs,
        "argv": std::env::args().collect::<Vec<_>>(),
    });
    write_text(&out.join("metadata.json"), &pretty(&meta))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn load_dataset(path: &Path, target: &str) -> Result<Dataset> {
    let loaded = load_csv(path, target, CategoricalPolicy::OneHot)
        .with_context(|| format!("cannot load {}", path.display()))?;
    if loaded.dropped_rows > 0 {
        eprintln!(
            "{}: dropped {} rows with missing cells",
            path.display(),
            loaded.dropped_rows
        );
    }
    Ok(loaded.dataset)
}

pub fn cmd_run(
    out: &Path,
    seed: u64,
    manifest: &Path,
    k_list: &[usize],
    train_fraction: f64,
    hp: &Hyperparams,
) -> Result<()> {
    let entries = load_manifest(manifest)?;
    if entries.is_empty() {
        bail!("manifest {} lists no datasets", manifest.display());
    }
    let split = SplitSpec::random_shuffle(train_fraction, seed)?;

    let mut results = Vec::new();
    let mut errors: Vec<(String, String)> = Vec::new();
    for entry in &entries {
        let r = load_dataset(Path::new(&entry.path), &entry.target)
            .map_err(anyhow::Error::from)
            .and_then(|ds| {
                evaluate_dataset(&entry.name, &ds, hp, &split, k_list).map_err(Into::into)
            });
        match r {
            Ok(r) => {
                eprintln!("{}: {:.1}s", r.name, r.wall_secs);
                results.push(r);
            }
            Err(e) => {
                eprintln!("{}: skipped ({e:#})", entry.name);
                errors.push((entry.name.clone(), format!("{e:#}")));
            }
        }
    }
    if results.is_empty() {
        bail!("every dataset failed to load or evaluate");
    }

    let mut csv = String::from(
        "dataset,n_train,n_test,crps_full,se_full,k,rel_crps,rel_se,avg_weight_sum\n",
    );
    for r in &results {
        for kr in &r.per_k {
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{}",
                csv_field(&r.name),
                r.n_train,
                r.n_test,
                r.crps_full,
                r.se_full,
                kr.k,
                kr.rel_crps,
                kr.rel_se,
                kr.avg_weight_sum
            )?;
        }
    }
    // median across datasets, lower median for even counts
    let med = |f: &dyn Fn(&topkrf::experiment::EvalResult) -> f64| {
        lower_median(&results.iter().map(f).collect::<Vec<_>>()).expect("nonempty results")
    };
    let mut median_rows = Vec::new();
    for (j, &k) in k_list.iter().enumerate() {
        let row = json!({
            "k": k,
            "rel_crps": med(&|r| r.per_k[j].rel_crps),
            "rel_se": med(&|r| r.per_k[j].rel_se),
            "avg_weight_sum": med(&|r| r.per_k[j].avg_weight_sum),
        });
        writeln!(
            csv,
            "median,,,{},{},{},{},{},{}",
            med(&|r| r.crps_full),
            med(&|r| r.se_full),
            k,
            row["rel_crps"],
            row["rel_se"],
            row["avg_weight_sum"]
        )?;
        median_rows.push(row);
    }
    write_text(&out.join("run_results.csv"), &csv)?;

    let report = json!({
        "k_list": k_list,
        "train_fraction": train_fraction,
        "hyperparams": hp,
        "results": results,
        "median": median_rows,
        "errors": errors
            .iter()
            .map(|(name, e)| json!({"dataset": name, "error": e}))
            .collect::<Vec<_>>(),
    });
    write_text(&out.join("run_results.json"), &pretty(&report))
}

pub fn cmd_benchmarks(
    out: &Path,
    seed: u64,
    manifest: &Path,
    train_fraction: f64,
    hp: &Hyperparams,
) -> Result<()> {
    let entries = load_manifest(manifest)?;
    let split = SplitSpec::random_shuffle(train_fraction, seed)?;

    let mut results = Vec::new();
    let mut errors: Vec<(String, String)> = Vec::new();
    for entry in &entries {
        let r = load_dataset(Path::new(&entry.path), &entry.target)
            .map_err(anyhow::Error::from)
            .and_then(|ds| benchmark_dataset(&entry.name, &ds, hp, &split).map_err(Into::into));
        match r {
            Ok(r) => {
                eprintln!("{}: {:.1}s", r.name, r.wall_secs);
                results.push(r);
            }
            Err(e) => {
                eprintln!("{}: skipped ({e:#})", entry.name);
                errors.push((entry.name.clone(), format!("{e:#}")));
            }
        }
    }
    if results.is_empty() {
        bail!("every dataset failed to load or evaluate");
    }

    let mut csv = String::from(
        "dataset,crps_full,rel_crps_median_forecast,rel_crps_unconditional,rel_crps_top3\n",
    );
    for r in &results {
        writeln!(
            csv,
            "{},{},{},{},{}",
            csv_field(&r.name),
            r.crps_full,
            r.rel_crps_median_forecast,
            r.rel_crps_unconditional,
            r.rel_crps_top3
        )?;
    }
    write_text(&out.join("benchmarks.csv"), &csv)?;

    let report = json!({
        "train_fraction": train_fraction,
        "hyperparams": hp,
        "results": results,
        "errors": errors
            .iter()
            .map(|(name, e)| json!({"dataset": name, "error": e}))
            .collect::<Vec<_>>(),
    });
    write_text(&out.join("benchmarks.json"), &pretty(&report))
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_grid_search(
    out: &Path,
    seed: u64,
    data: &Path,
    target: &str,
    hp: &Hyperparams,
    grid: &GridSpec,
) -> Result<()> {
    let ds = load_dataset(data, target)?;
    let (best, rows) = grid_search(&ds, hp, grid, seed)?;

    let mut csv = String::from("min_samples_leaf,max_features,cv_mean_score\n");
    for row in &rows {
        writeln!(
            csv,
            "{},{},{}",
            row.min_samples_leaf,
            serde_json::to_string(&row.max_features)?.replace('"', ""),
            row.cv_mean_score
        )?;
    }
    write_text(&out.join("grid_table.csv"), &csv)?;

    let report = json!({
        "grid": grid,
        "best_hyperparams": best,
        "candidates": rows.len(),
    });
    write_text(&out.join("best_hyperparams.json"), &pretty(&report))
}

pub fn cmd_analytical(out: &Path, seed: u64, job: &AnalyticalJob) -> Result<()> {
    use crate::config::AnalyticalMode;
    let theta = job.theta.unwrap_or(job.theta_star);
    let cfg = AnalyticalConfig {
        n: job.n,
        k: job.k,
        theta_star: job.theta_star,
        theta,
        d1: job.d1,
        d2: job.d2,
    };
    cfg.validate()?;

    match job.mode {
        AnalyticalMode::Sweep => {
            let grid = match &job.theta_grid {
                Some(g) => g.values()?,
                None => (0..=100).map(|i| i as f64 / 100.0).collect(),
            };
            let sweep = theta_sweep(&cfg, &grid)?;
            let mut csv = String::from("theta,expected_crps,expected_se\n");
            for row in &sweep.rows {
                writeln!(csv, "{},{},{}", row.theta, row.expected_crps, row.expected_se)?;
            }
            write_text(&out.join("theta_sweep.csv"), &csv)?;
            let summary = json!({
                "config": cfg,
                "argmin_theta": sweep.argmin_theta,
                "worse_than_one_boundary": sweep.worse_than_one_boundary,
            });
            write_text(&out.join("theta_sweep_summary.json"), &pretty(&summary))
        }
        AnalyticalMode::Mc => {
            let draws = job.draws.unwrap_or(100_000);
            let mc = mc_expected_scores(&cfg, draws, seed)?;
            let report = json!({
                "config": cfg,
                "monte_carlo": mc,
                "closed_form": {
                    "expected_se": expected_se_closed(&cfg)?,
                    "expected_crps": expected_crps_closed(&cfg)?,
                },
            });
            write_text(&out.join("expected_scores.json"), &pretty(&report))
        }
        AnalyticalMode::Dump => {
            let truth = true_weights(&cfg)?;
            let estimate = sample_estimated_weights(&cfg, seed)?;
            let mut csv = String::from("index,true_weight,estimated_weight\n");
            for (i, (t, e)) in truth.iter().zip(&estimate).enumerate() {
                writeln!(csv, "{i},{t},{e}")?;
            }
            write_text(&out.join("weight_draw.csv"), &csv)
        }
    }
}

pub fn cmd_train(
    out: &Path,
    data: &Path,
    target: &str,
    hp: &Hyperparams,
    model_out: Option<&Path>,
) -> Result<()> {
    let ds = load_dataset(data, target)?;
    let forest = fit_forest(&ds, hp)?;
    let model_path = model_out
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| out.join("model.bin"));
    persist::save(&forest, &model_path)?;
    eprintln!("wrote {}", model_path.display());
    let summary = json!({
        "model": model_path,
        "n_train": forest.n_train(),
        "n_features": forest.n_features(),
        "feature_names": forest.feature_names,
        "hyperparams": forest.hyperparams,
    });
    write_text(&out.join("train_summary.json"), &pretty(&summary))
}

/// Feature-only CSV for prediction: the header must list exactly the
/// feature columns the model was trained on, in order.
fn load_feature_rows(path: &Path, forest: &Forest) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
    if headers != forest.feature_names {
        bail!(
            "feature schema mismatch: model expects [{}], file has [{}]",
            forest.feature_names.join(", "),
            headers.join(", ")
        );
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row: Vec<f64> = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.trim().parse::<f64>().map_err(|_| {
                    anyhow!("row {i}, column '{}': '{cell}' is not numeric", headers[j])
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{} has no data rows", path.display());
    }
    Ok(rows)
}

pub fn cmd_predict(
    out: &Path,
    model: &Path,
    data: &Path,
    k: Option<usize>,
) -> Result<()> {
    let forest = persist::load(model)?;
    let rows = load_feature_rows(data, &forest)?;
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let support = std::sync::Arc::new(forest.training_response.clone());
    let weights = topkrf::forest::forest_weights_batch(&forest, &refs)?;

    let mut records = Vec::with_capacity(rows.len());
    for (i, w) in weights.into_iter().enumerate() {
        let full = topkrf::ForecastDistribution::new(std::sync::Arc::clone(&support), w);
        let mut record = json!({
            "test_index": i,
            "mean": dist_mean(&full),
            "median": dist_quantile(&full, 0.5),
        });
        if let Some(k) = k {
            let sparse = topk_sparsify(&full, k)?;
            let pre_sum = match sparse.provenance() {
                Provenance::TopK {
                    pre_normalization_sum,
                    ..
                } => *pre_normalization_sum,
                _ => unreachable!("topk_sparsify tags its output"),
            };
            record["k"] = json!(k);
            record["pre_normalization_sum"] = json!(pre_sum);
            record["scenarios"] = json!(scenarios(&sparse));
        }
        records.push(record);
    }
    write_text(&out.join("predictions.json"), &pretty(&json!(records)))
}

pub fn cmd_score(
    out: &Path,
    model: &Path,
    data: &Path,
    target: &str,
    rule: Rule,
    k: Option<usize>,
) -> Result<()> {
    let forest = persist::load(model)?;
    let ds = load_dataset(data, target)?;
    if ds.feature_names != forest.feature_names {
        bail!(
            "feature schema mismatch: model expects [{}], data has [{}]",
            forest.feature_names.join(", "),
            ds.feature_names.join(", ")
        );
    }
    let mut forecasts = forecast_test_set(&forest, &ds)?;
    if let Some(k) = k {
        forecasts = forecasts
            .iter()
            .map(|d| topk_sparsify(d, k))
            .collect::<topkrf::Result<_>>()?;
    }
    let report = evaluate(&forecasts, &ds.response, rule)?;
    write_text(&out.join("score_summary.json"), &(report.summary_json() + "\n"))?;
    write_text(&out.join("score_per_case.csv"), &report.per_case_csv())
}

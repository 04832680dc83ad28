//! `topkrf` — train regression forests whose forecasts are weighted
//! distributions over training responses, sparsify them to their Top-k
//! weights, score them properly, and explore the stylized Dirichlet model
//! of sparsification. See docs/output_schemas.md for result file formats.

mod commands;
mod config;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use topkrf::experiment::{CvSpec, GridSpec, TuneTarget};
use topkrf::Rule;

#[derive(Parser)]
#[command(name = "topkrf", version, about)]
struct Cli {
    /// Base RNG seed; every split, forest, and sampler derives from it
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Worker threads: a count, or "auto" for one per core
    #[arg(long, global = true, default_value = "auto")]
    threads: String,

    /// Output directory (created if missing)
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// JSON config file; explicit flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct HpArgs {
    /// Number of trees (default 1000)
    #[arg(long)]
    trees: Option<usize>,

    /// Features searched per split: sqrt, all, or a fraction (default sqrt)
    #[arg(long)]
    max_features: Option<String>,

    /// Minimum samples per leaf (default 1)
    #[arg(long)]
    min_samples_leaf: Option<usize>,

    /// Minimum samples to attempt a split (default 5)
    #[arg(long)]
    min_samples_split: Option<usize>,

    /// Depth cap (default unrestricted)
    #[arg(long)]
    max_depth: Option<usize>,
}

impl HpArgs {
    fn flags(&self) -> config::HpFlags {
        config::HpFlags {
            trees: self.trees,
            max_features: self.max_features.clone(),
            min_samples_leaf: self.min_samples_leaf,
            min_samples_split: self.min_samples_split,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate full vs Top-k forecasts over a dataset manifest
    Run {
        /// JSON manifest: [{"name": ..., "path": ..., "target": ...}, ...]
        #[arg(long)]
        manifest: Option<PathBuf>,

        /// Comma-separated Top-k counts, ascending (default 3,5,10,20,50)
        #[arg(long)]
        k_list: Option<String>,

        /// Train fraction of the shuffle split (default 0.7)
        #[arg(long)]
        train_fraction: Option<f64>,

        #[command(flatten)]
        hp: HpArgs,
    },
    /// Compare the full forecast against median-point and unconditional
    /// benchmarks plus Top-3
    Benchmarks {
        #[arg(long)]
        manifest: Option<PathBuf>,

        #[arg(long)]
        train_fraction: Option<f64>,

        #[command(flatten)]
        hp: HpArgs,
    },
    /// Cross-validated search over leaf-size / feature-count candidates
    GridSearch {
        /// Training CSV with a header row
        #[arg(long)]
        data: PathBuf,

        /// Response column name
        #[arg(long)]
        target: String,

        /// Leaf-size candidates (default 1,2,4,6,8,10,15,20,30,40,50)
        #[arg(long)]
        leaves: Option<String>,

        /// Feature candidates, e.g. "0.333,sqrt,0.5,1.0" (default)
        #[arg(long)]
        features: Option<String>,

        /// "kfold:5" or "holdout:0.25" (default kfold:5)
        #[arg(long, default_value = "kfold:5")]
        cv: String,

        /// Tune "full" or "top:K" forecasts (default full)
        #[arg(long, default_value = "full")]
        tune_target: String,

        /// Scoring rule to tune on: crps or se (default crps)
        #[arg(long, default_value = "crps")]
        tune_rule: String,

        #[command(flatten)]
        hp: HpArgs,
    },
    /// Closed-form and Monte Carlo expected scores of the stylized
    /// Dirichlet weight model (driven by the "analytical" config entry)
    Analytical,
    /// Fit a forest on a CSV and save the model
    Train {
        #[arg(long)]
        data: PathBuf,

        #[arg(long)]
        target: String,

        /// Model file (default <out>/model.bin)
        #[arg(long)]
        model_out: Option<PathBuf>,

        #[command(flatten)]
        hp: HpArgs,
    },
    /// Forecast a feature-only CSV with a saved model
    Predict {
        #[arg(long)]
        model: PathBuf,

        #[arg(long)]
        data: PathBuf,

        /// Also emit the Top-k scenario list per row
        #[arg(long)]
        k: Option<usize>,
    },
    /// Score a saved model against a labeled CSV
    Score {
        #[arg(long)]
        model: PathBuf,

        #[arg(long)]
        data: PathBuf,

        #[arg(long)]
        target: String,

        /// crps, se, or ae (default crps)
        #[arg(long, default_value = "crps")]
        rule: String,

        /// Score the Top-k sparsified forecasts instead of the full ones
        #[arg(long)]
        k: Option<usize>,
    },
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|_| anyhow::anyhow!("invalid {what} entry '{v}'"))
        })
        .collect()
}

fn parse_rule(s: &str) -> Result<Rule> {
    match s {
        "crps" => Ok(Rule::Crps),
        "se" => Ok(Rule::Se),
        "ae" => Ok(Rule::Ae),
        other => bail!("unknown rule '{other}' (expected crps, se, or ae)"),
    }
}

fn parse_cv(s: &str) -> Result<CvSpec> {
    if let Some(k) = s.strip_prefix("kfold:") {
        return Ok(CvSpec::KFold(k.parse().context("kfold count")?));
    }
    if let Some(f) = s.strip_prefix("holdout:") {
        return Ok(CvSpec::Holdout(f.parse().context("holdout fraction")?));
    }
    bail!("cv must be 'kfold:K' or 'holdout:FRACTION', got '{s}'")
}

fn parse_tune_target(s: &str) -> Result<TuneTarget> {
    if s == "full" {
        return Ok(TuneTarget::Full);
    }
    if let Some(k) = s.strip_prefix("top:") {
        return Ok(TuneTarget::TopK(k.parse().context("top:K count")?));
    }
    bail!("tune-target must be 'full' or 'top:K', got '{s}'")
}

fn main() -> Result<()> {
    let cli = Cli::parse();

    if cli.threads != "auto" {
        let n: usize = cli
            .threads
            .parse()
            .with_context(|| format!("--threads '{}' is not a count or 'auto'", cli.threads))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("thread pool setup")?;
    }
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("cannot create output dir {}", cli.out.display()))?;

    let file = config::load_file_config(cli.config.as_deref())?;
    let seed = cli.seed;
    let out = &cli.out;

    match &cli.command {
        Command::Run {
            manifest,
            k_list,
            train_fraction,
            hp,
        } => {
            let manifest = manifest
                .clone()
                .or_else(|| file.manifest.clone())
                .context("no --manifest flag or config manifest entry")?;
            let k_list = match k_list {
                Some(s) => parse_list(s, "k-list")?,
                None => file.k_list.clone().unwrap_or_else(|| vec![3, 5, 10, 20, 50]),
            };
            let frac = train_fraction.or(file.train_fraction).unwrap_or(0.7);
            let hp = config::resolve_hyperparams(&hp.flags(), file.hyperparams.as_ref(), seed)?;
            commands::cmd_run(out, seed, &manifest, &k_list, frac, &hp)?;
            commands::write_metadata(out, "run", seed, &cli.threads)
        }
        Command::Benchmarks {
            manifest,
            train_fraction,
            hp,
        } => {
            let manifest = manifest
                .clone()
                .or_else(|| file.manifest.clone())
                .context("no --manifest flag or config manifest entry")?;
            let frac = train_fraction.or(file.train_fraction).unwrap_or(0.7);
            let hp = config::resolve_hyperparams(&hp.flags(), file.hyperparams.as_ref(), seed)?;
            commands::cmd_benchmarks(out, seed, &manifest, frac, &hp)?;
            commands::write_metadata(out, "benchmarks", seed, &cli.threads)
        }
        Command::GridSearch {
            data,
            target,
            leaves,
            features,
            cv,
            tune_target,
            tune_rule,
            hp,
        } => {
            let mut grid =
                GridSpec::default_grid(parse_tune_target(tune_target)?, parse_rule(tune_rule)?);
            grid.cv = parse_cv(cv)?;
            if let Some(s) = leaves {
                grid.min_samples_leaf = parse_list(s, "leaves")?;
            }
            if let Some(s) = features {
                grid.max_features = s
                    .split(',')
                    .map(|f| config::parse_max_features(f.trim()))
                    .collect::<Result<_>>()?;
            }
            let hp = config::resolve_hyperparams(&hp.flags(), file.hyperparams.as_ref(), seed)?;
            commands::cmd_grid_search(out, seed, data, target, &hp, &grid)?;
            commands::write_metadata(out, "grid-search", seed, &cli.threads)
        }
        Command::Analytical => {
            let job = file
                .analytical
                .context("analytical requires --config with an \"analytical\" entry")?;
            commands::cmd_analytical(out, seed, &job)?;
            commands::write_metadata(out, "analytical", seed, &cli.threads)
        }
        Command::Train {
            data,
            target,
            model_out,
            hp,
        } => {
            let hp = config::resolve_hyperparams(&hp.flags(), file.hyperparams.as_ref(), seed)?;
            commands::cmd_train(out, data, target, &hp, model_out.as_deref())?;
            commands::write_metadata(out, "train", seed, &cli.threads)
        }
        Command::Predict { model, data, k } => {
            commands::cmd_predict(out, model, data, *k)?;
            commands::write_metadata(out, "predict", seed, &cli.threads)
        }
        Command::Score {
            model,
            data,
            target,
            rule,
            k,
        } => {
            commands::cmd_score(out, model, data, target, parse_rule(rule)?, *k)?;
            commands::write_metadata(out, "score", seed, &cli.threads)
        }
    }
}

//! Regression forests that expose per-prediction training-sample weight
//! vectors, Top-k sparsified forecast distributions, proper scoring rules
//! (CRPS / SE), and a stylized Dirichlet model with closed-form expected
//! scores.
//!
//! The crate is organized around a small set of value types:
//!
//! * [`Dataset`] — dense numeric feature matrix plus response vector,
//! * [`Forest`] — a trained ensemble whose predictions are weighted sums
//!   over training responses,
//! * [`WeightVector`] — sparse, nonnegative, sum-to-one weights over
//!   training indices,
//! * [`ForecastDistribution`] — a weighted empirical CDF over training
//!   responses, optionally sparsified to its k largest weights.

pub mod analytical;
pub mod dataset;
pub mod dist;
pub mod error;
pub mod experiment;
pub mod forest;
pub mod scoring;
pub mod synthetic;

pub use dataset::{Dataset, SplitSpec};
pub use dist::{ForecastDistribution, Provenance};
pub use error::Error;
pub use forest::{Forest, Hyperparams, MaxFeatures, WeightVector};
pub use scoring::{Rule, ScoreReport};

pub type Result<T> = std::result::Result<T, Error>;

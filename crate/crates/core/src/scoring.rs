//! Proper scoring rules for weighted empirical forecast distributions.
//!
//! `crps_wecdf` is the production path: the sorted-weight form of the CRPS
//! for a weighted ECDF, evaluated over positive-weight entries only. Two
//! independent routes are kept alongside for cross-checking: exact
//! piecewise integration of the squared CDF difference, and the pairwise
//! expectation form E|X - y| - E|X - X'|/2.

use serde::{Deserialize, Serialize};

use crate::dist::{dist_mean, dist_quantile, ForecastDistribution};
use crate::error::Error;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Crps,
    Se,
    Ae,
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rule::Crps => write!(f, "crps"),
            Rule::Se => write!(f, "se"),
            Rule::Ae => write!(f, "ae"),
        }
    }
}

/// CRPS of a weighted ECDF via the sorted-weight form.
///
/// Support values are sorted ascending (stable in original index order
/// for equal values) over positive-weight entries only.
pub fn crps_wecdf(d: &ForecastDistribution, y: f64) -> f64 {
    let mut atoms: Vec<(f64, f64)> = d.atoms().collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cum = 0.0;
    let mut total = 0.0;
    for &(yi, wi) in &atoms {
        cum += wi;
        let indicator = if y < yi { 1.0 } else { 0.0 };
        total += 2.0 * wi * (yi - y) * (indicator - cum + wi / 2.0);
    }
    total
}

/// CRPS by exact piecewise integration of (F(z) - 1{z >= y})^2.
///
/// The integrand is piecewise constant between the sorted breakpoints
/// {support values} + {y} and zero outside their hull, so the integral is
/// a finite sum of height x width terms. The grid parameters only bound
/// the outer truncation, which is already exact; they are retained for
/// interface compatibility.
pub fn crps_numeric_oracle(
    d: &ForecastDistribution,
    y: f64,
    _grid_pad: f64,
    _grid_points: usize,
) -> f64 {
    let mut breaks: Vec<f64> = d.atoms().map(|(yi, _)| yi).collect();
    breaks.push(y);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let atoms: Vec<(f64, f64)> = d.atoms().collect();
    let mut total = 0.0;
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        // on the open interval (a, b): F(z) = weight of support <= a
        let f: f64 = atoms.iter().filter(|&&(yi, _)| yi <= a).map(|&(_, w)| w).sum();
        let step = if y <= a { 1.0 } else { 0.0 };
        total += (f - step).powi(2) * (b - a);
    }
    total
}

/// CRPS via the pairwise form E|X - y| - E|X - X'|/2; O(m^2) over
/// positive weights, used for cross-checking only.
pub fn crps_pairwise_oracle(d: &ForecastDistribution, y: f64) -> f64 {
    let atoms: Vec<(f64, f64)> = d.atoms().collect();
    let first: f64 = atoms.iter().map(|&(yi, wi)| wi * (yi - y).abs()).sum();
    let second: f64 = atoms
        .iter()
        .flat_map(|&(yi, wi)| atoms.iter().map(move |&(yj, wj)| wi * wj * (yi - yj).abs()))
        .sum();
    first - 0.5 * second
}

/// Squared error of the distribution mean.
pub fn se_score(d: &ForecastDistribution, y: f64) -> f64 {
    (y - dist_mean(d)).powi(2)
}

/// Absolute error of the distribution median.
pub fn ae_score(d: &ForecastDistribution, y: f64) -> f64 {
    (dist_quantile(d, 0.5) - y).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub rule: Rule,
    pub scores: Vec<f64>,
    pub mean_score: f64,
    pub count: usize,
}

impl ScoreReport {
    pub fn from_scores(rule: Rule, scores: Vec<f64>) -> Self {
        let count = scores.len();
        let mean_score = scores.iter().sum::<f64>() / count as f64;
        ScoreReport {
            rule,
            scores,
            mean_score,
            count,
        }
    }

    /// JSON summary {rule, mean, count}.
    pub fn summary_json(&self) -> String {
        serde_json::json!({
            "rule": self.rule.to_string(),
            "mean": self.mean_score,
            "count": self.count,
        })
        .to_string()
    }

    /// Per-case CSV (test_index, score).
    pub fn per_case_csv(&self) -> String {
        let mut out = String::from("test_index,score\n");
        for (i, s) in self.scores.iter().enumerate() {
            out.push_str(&format!("{i},{s}\n"));
        }
        out
    }
}

/// Score each forecast against its outcome under the given rule.
pub fn evaluate(
    forecasts: &[ForecastDistribution],
    outcomes: &[f64],
    rule: Rule,
) -> Result<ScoreReport> {
    if forecasts.len() != outcomes.len() {
        return Err(Error::LengthMismatch(format!(
            "{} forecasts vs {} outcomes",
            forecasts.len(),
            outcomes.len()
        )));
    }
    if forecasts.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let score = match rule {
        Rule::Crps => crps_wecdf,
        Rule::Se => se_score,
        Rule::Ae => ae_score,
    };
    let scores = forecasts
        .iter()
        .zip(outcomes.iter())
        .map(|(d, &y)| score(d, y))
        .collect();
    Ok(ScoreReport::from_scores(rule, scores))
}

/// Ratio of mean scores a/b.
pub fn relative_score(a: &ScoreReport, b: &ScoreReport) -> Result<f64> {
    if b.mean_score == 0.0 {
        return Err(Error::ZeroMeanScore);
    }
    Ok(a.mean_score / b.mean_score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::WeightVector;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn dist(support: Vec<f64>, weights: Vec<f64>) -> ForecastDistribution {
        let pairs = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| (i as u32, w))
            .collect();
        ForecastDistribution::new(Arc::new(support), WeightVector::from_pairs(pairs))
    }

    #[test]
    fn deterministic_reduces_to_absolute_error() {
        let d = dist(vec![3.0], vec![1.0]);
        assert_eq!(crps_wecdf(&d, 5.0), 2.0);
        assert_eq!(crps_pairwise_oracle(&d, 5.0), 2.0);
        assert_eq!(crps_numeric_oracle(&d, 5.0, 1.0, 10_000), 2.0);
        assert_eq!(crps_numeric_oracle(&d, 3.0, 1.0, 10_000), 0.0);
    }

    #[test]
    fn two_point_hand_value() {
        // E|X - 0| = 0.5, E|X - X'|/2 = 0.25
        let d = dist(vec![0.0, 1.0], vec![0.5, 0.5]);
        assert!((crps_wecdf(&d, 0.0) - 0.25).abs() < 1e-14);
        assert!((crps_pairwise_oracle(&d, 0.0) - 0.25).abs() < 1e-14);
        assert!((crps_numeric_oracle(&d, 0.0, 1.0, 10_000) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn three_point_hand_value() {
        // E|X - 2| = 0.5*1 + 0.25*0 + 0.25*2 = 1.0
        // E|X - X'| = 2*(0.5*0.25*1 + 0.5*0.25*3 + 0.25*0.25*2) = 1.25
        let d = dist(vec![1.0, 2.0, 4.0], vec![0.5, 0.25, 0.25]);
        assert!((crps_wecdf(&d, 2.0) - 0.375).abs() < 1e-14);
        assert!((crps_pairwise_oracle(&d, 2.0) - 0.375).abs() < 1e-14);
    }

    #[test]
    fn se_examples() {
        let d = dist(vec![1.0], vec![1.0]);
        assert_eq!(se_score(&d, 1.0), 0.0);
        let d = dist(vec![0.0, 2.0, 4.0], vec![0.25, 0.5, 0.25]);
        assert_eq!(se_score(&d, 0.0), 4.0);
    }

    #[test]
    fn evaluate_and_relative() {
        let forecasts = vec![dist(vec![1.0], vec![1.0]), dist(vec![2.0], vec![1.0])];
        let outcomes = vec![2.0, 2.0];
        let a = evaluate(&forecasts, &outcomes, Rule::Crps).unwrap();
        assert_eq!(a.mean_score, 0.5);
        assert_eq!(a.count, 2);
        let b = evaluate(&forecasts, &outcomes, Rule::Crps).unwrap();
        assert_eq!(relative_score(&a, &b).unwrap(), 1.0);
        let r_ab = relative_score(&a, &b).unwrap();
        let r_ba = relative_score(&b, &a).unwrap();
        assert!((r_ab * r_ba - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evaluate_length_mismatch() {
        let forecasts = vec![dist(vec![1.0], vec![1.0])];
        assert!(evaluate(&forecasts, &[1.0, 2.0], Rule::Crps).is_err());
    }

    #[test]
    fn ties_in_support_agree_with_oracles() {
        let d = dist(vec![1.0, 1.0, 2.0, 2.0], vec![0.1, 0.4, 0.2, 0.3]);
        for y in [-1.0, 1.0, 1.5, 2.0, 5.0] {
            let a = crps_wecdf(&d, y);
            let b = crps_pairwise_oracle(&d, y);
            let c = crps_numeric_oracle(&d, y, 1.0, 10_000);
            assert!((a - b).abs() < 1e-12, "y={y}: {a} vs {b}");
            assert!((a - c).abs() < 1e-12, "y={y}: {a} vs {c}");
        }
    }

    proptest! {
        #[test]
        fn triple_agreement_and_nonnegativity(
            raw in proptest::collection::vec((0.01f64..1.0, -5.0f64..5.0), 1..30),
            y in -6.0f64..6.0,
        ) {
            let total: f64 = raw.iter().map(|(w, _)| w).sum();
            let weights: Vec<f64> = raw.iter().map(|(w, _)| w / total).collect();
            let support: Vec<f64> = raw.iter().map(|&(_, v)| v).collect();
            let d = dist(support, weights);
            let a = crps_wecdf(&d, y);
            let b = crps_pairwise_oracle(&d, y);
            let c = crps_numeric_oracle(&d, y, 1.0, 10_000);
            prop_assert!(a >= -1e-12);
            prop_assert!((a - b).abs() < 1e-10);
            prop_assert!((a - c).abs() < 1e-10);
        }

        #[test]
        fn order_invariance(
            raw in proptest::collection::vec((0.01f64..1.0, -5.0f64..5.0), 2..20),
            y in -6.0f64..6.0,
        ) {
            let total: f64 = raw.iter().map(|(w, _)| w).sum();
            let weights: Vec<f64> = raw.iter().map(|(w, _)| w / total).collect();
            let support: Vec<f64> = raw.iter().map(|&(_, v)| v).collect();
            let d = dist(support.clone(), weights.clone());
            let mut rev_w = weights; rev_w.reverse();
            let mut rev_s = support; rev_s.reverse();
            let d_rev = dist(rev_s, rev_w);
            prop_assert!((crps_wecdf(&d, y) - crps_wecdf(&d_rev, y)).abs() < 1e-12);
            prop_assert!((se_score(&d, y) - se_score(&d_rev, y)).abs() < 1e-12);
        }
    }
}

//! Weighted empirical forecast distributions and Top-k sparsification.
//!
//! A [`ForecastDistribution`] pairs the training responses (support
//! points) with a sparse [`WeightVector`]. Top-k sparsification keeps the
//! k largest weights, renormalizes them to sum to one and records the
//! pre-normalization weight sum.

use std::sync::Arc;

use serde::Serialize;

use crate::error::Error;
use crate::forest::WeightVector;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Full,
    TopK {
        k: usize,
        pre_normalization_sum: f64,
    },
    Unconditional,
    Deterministic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastDistribution {
    /// Training responses addressed by weight index; shared across the
    /// many distributions produced for one test set.
    support: Arc<Vec<f64>>,
    weights: WeightVector,
    provenance: Provenance,
}

impl ForecastDistribution {
    pub fn new(support: Arc<Vec<f64>>, weights: WeightVector) -> Self {
        debug_assert!(weights
            .indices()
            .iter()
            .all(|&i| (i as usize) < support.len()));
        ForecastDistribution {
            support,
            weights,
            provenance: Provenance::Full,
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn support_arc(&self) -> Arc<Vec<f64>> {
        Arc::clone(&self.support)
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Positive-weight (support value, weight) pairs in index order.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights
            .iter()
            .map(|(i, w)| (self.support[i as usize], w))
    }
}

/// Keep the min(k, m) largest weights (ties broken by lower training
/// index), renormalized to sum one. If k covers all m positive weights
/// the input distribution is returned unchanged, so k = n recovers the
/// full forecast exactly.
pub fn topk_sparsify(d: &ForecastDistribution, k: usize) -> Result<ForecastDistribution> {
    if k == 0 {
        return Err(Error::invalid("k", "must be >= 1"));
    }
    let m = d.weights.nnz();
    if k >= m {
        return Ok(ForecastDistribution {
            support: Arc::clone(&d.support),
            weights: d.weights.clone(),
            provenance: Provenance::TopK {
                k,
                pre_normalization_sum: d.weights.sum(),
            },
        });
    }
    let mut entries: Vec<(u32, f64)> = d.weights.iter().collect();
    // largest weight first; equal weights keep ascending index order
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    entries.truncate(k);
    let pre_sum: f64 = entries.iter().map(|&(_, w)| w).sum();
    let kept: Vec<(u32, f64)> = entries.into_iter().map(|(i, w)| (i, w / pre_sum)).collect();
    Ok(ForecastDistribution {
        support: Arc::clone(&d.support),
        weights: WeightVector::from_pairs(kept),
        provenance: Provenance::TopK {
            k,
            pre_normalization_sum: pre_sum,
        },
    })
}

/// Weighted mean of the distribution.
pub fn dist_mean(d: &ForecastDistribution) -> f64 {
    d.atoms().map(|(y, w)| w * y).sum()
}

/// Sorted positive-weight atoms with duplicate support values merged.
fn merged_sorted_atoms(d: &ForecastDistribution) -> Vec<(f64, f64)> {
    let mut atoms: Vec<(f64, f64)> = d.atoms().collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (y, w) in atoms {
        match merged.last_mut() {
            Some(last) if last.0 == y => last.1 += w,
            _ => merged.push((y, w)),
        }
    }
    merged
}

/// Left-continuous generalized inverse: the smallest support value whose
/// cumulative weight reaches tau.
pub fn dist_quantile(d: &ForecastDistribution, tau: f64) -> f64 {
    assert!(tau > 0.0 && tau < 1.0, "tau must lie in (0,1)");
    let merged = merged_sorted_atoms(d);
    let mut cum = 0.0;
    for &(y, w) in &merged {
        cum += w;
        if cum >= tau {
            return y;
        }
    }
    merged.last().expect("nonempty distribution").0
}

/// Point mass at the distribution's median. If the median value occurs at
/// several training indices the lowest index carries the mass.
pub fn deterministic_median(d: &ForecastDistribution) -> ForecastDistribution {
    let median = dist_quantile(d, 0.5);
    let idx = d
        .weights
        .indices()
        .iter()
        .copied()
        .find(|&i| d.support[i as usize] == median)
        .expect("median value exists among positive-weight support points");
    ForecastDistribution {
        support: Arc::clone(&d.support),
        weights: WeightVector::from_pairs(vec![(idx, 1.0)]),
        provenance: Provenance::Deterministic,
    }
}

/// The feature-free benchmark: uniform weight 1/n on every training
/// response.
pub fn unconditional_dist(train_response: &[f64]) -> Result<ForecastDistribution> {
    let n = train_response.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let w = 1.0 / n as f64;
    let pairs: Vec<(u32, f64)> = (0..n as u32).map(|i| (i, w)).collect();
    Ok(ForecastDistribution {
        support: Arc::new(train_response.to_vec()),
        weights: WeightVector::from_pairs(pairs),
        provenance: Provenance::Unconditional,
    })
}

/// Entry j: mean over test cases of the sum of the ks[j] largest weights,
/// before renormalization.
pub fn weight_sum_profile(ws: &[WeightVector], ks: &[usize]) -> Result<Vec<f64>> {
    if ws.is_empty() {
        return Err(Error::invalid("ws", "empty weight list"));
    }
    if ks.iter().any(|&k| k == 0) {
        return Err(Error::invalid("ks", "all k must be >= 1"));
    }
    let mut totals = vec![0.0; ks.len()];
    for w in ws {
        let mut sorted: Vec<f64> = w.weights().to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut prefix = Vec::with_capacity(sorted.len() + 1);
        prefix.push(0.0);
        for v in &sorted {
            prefix.push(prefix.last().unwrap() + v);
        }
        for (j, &k) in ks.iter().enumerate() {
            totals[j] += prefix[k.min(sorted.len())];
        }
    }
    Ok(totals.iter().map(|t| t / ws.len() as f64).collect())
}

/// One scenario of the machine-readable Top-k record.
#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub train_index: u32,
    pub weight: f64,
    pub y: f64,
}

/// Scenarios of a distribution ordered by descending weight (ties by
/// ascending training index).
pub fn scenarios(d: &ForecastDistribution) -> Vec<Scenario> {
    let mut list: Vec<Scenario> = d
        .weights
        .iter()
        .map(|(i, w)| Scenario {
            train_index: i,
            weight: w,
            y: d.support[i as usize],
        })
        .collect();
    list.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then(a.train_index.cmp(&b.train_index))
    });
    list
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(support: Vec<f64>, weights: Vec<f64>) -> ForecastDistribution {
        let pairs = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| (i as u32, w))
            .collect();
        ForecastDistribution::new(Arc::new(support), WeightVector::from_pairs(pairs))
    }

    #[test]
    fn topk_hand_example() {
        let d = dist(vec![1.0, 2.0, 3.0], vec![0.5, 0.3, 0.2]);
        let t = topk_sparsify(&d, 2).unwrap();
        let dense = t.weights().to_dense(3);
        assert!((dense[0] - 0.625).abs() < 1e-12);
        assert!((dense[1] - 0.375).abs() < 1e-12);
        assert_eq!(dense[2], 0.0);
        match t.provenance() {
            Provenance::TopK {
                k,
                pre_normalization_sum,
            } => {
                assert_eq!(*k, 2);
                assert!((pre_normalization_sum - 0.8).abs() < 1e-12);
            }
            _ => panic!("expected topk provenance"),
        }
    }

    #[test]
    fn topk_full_recovery_is_exact() {
        let d = dist(vec![1.0, 2.0, 3.0], vec![0.5, 0.3, 0.2]);
        let t = topk_sparsify(&d, 3).unwrap();
        assert_eq!(t.weights(), d.weights());
        let t = topk_sparsify(&d, 10).unwrap();
        assert_eq!(t.weights(), d.weights());
    }

    #[test]
    fn topk_tie_break_by_index() {
        let d = dist(vec![1.0, 2.0, 3.0], vec![0.4, 0.3, 0.3]);
        let t = topk_sparsify(&d, 2).unwrap();
        let dense = t.weights().to_dense(3);
        assert!((dense[0] - 4.0 / 7.0).abs() < 1e-12);
        assert!((dense[1] - 3.0 / 7.0).abs() < 1e-12);
        assert_eq!(dense[2], 0.0);
    }

    #[test]
    fn topk_rejects_zero() {
        let d = dist(vec![1.0], vec![1.0]);
        assert!(topk_sparsify(&d, 0).is_err());
    }

    #[test]
    fn mean_examples() {
        assert_eq!(dist_mean(&dist(vec![3.0], vec![1.0])), 3.0);
        assert_eq!(dist_mean(&dist(vec![0.0, 2.0], vec![0.5, 0.5])), 1.0);
    }

    #[test]
    fn quantile_examples() {
        let d = dist(vec![5.0], vec![1.0]);
        assert_eq!(dist_quantile(&d, 0.1), 5.0);
        assert_eq!(dist_quantile(&d, 0.9), 5.0);
        // cumulative weight at 0 is 0.5 >= 0.5
        let d = dist(vec![0.0, 1.0], vec![0.5, 0.5]);
        assert_eq!(dist_quantile(&d, 0.5), 0.0);
        let d = dist(vec![1.0, 2.0, 4.0], vec![0.25, 0.25, 0.5]);
        assert_eq!(dist_quantile(&d, 0.6), 4.0);
    }

    #[test]
    fn quantile_merges_duplicates() {
        let d = dist(vec![1.0, 1.0, 2.0], vec![0.3, 0.3, 0.4]);
        assert_eq!(dist_quantile(&d, 0.5), 1.0);
    }

    #[test]
    fn deterministic_median_examples() {
        let d = dist(vec![0.0, 1.0], vec![0.5, 0.5]);
        let m = deterministic_median(&d);
        assert_eq!(m.weights().to_dense(2), vec![1.0, 0.0]);
        // idempotent on deterministic input
        let m2 = deterministic_median(&m);
        assert_eq!(m.weights(), m2.weights());
    }

    #[test]
    fn unconditional_examples() {
        let d = unconditional_dist(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(d.weights().to_dense(4), vec![0.25; 4]);
        assert_eq!(dist_mean(&d), 2.5);
    }

    #[test]
    fn weight_sum_profile_examples() {
        // uniform weights: profile is exactly k/n
        let uniform = unconditional_dist(&vec![0.0; 10]).unwrap();
        let profile = weight_sum_profile(
            std::slice::from_ref(uniform.weights()),
            &[1, 3, 5],
        )
        .unwrap();
        assert!((profile[0] - 0.1).abs() < 1e-12);
        assert!((profile[1] - 0.3).abs() < 1e-12);
        assert!((profile[2] - 0.5).abs() < 1e-12);

        let w = WeightVector::from_pairs(vec![(0, 0.5), (1, 0.3), (2, 0.2)]);
        let profile = weight_sum_profile(&[w], &[1, 2]).unwrap();
        assert!((profile[0] - 0.5).abs() < 1e-12);
        assert!((profile[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn scenario_ordering() {
        let d = dist(vec![1.0, 2.0, 3.0], vec![0.2, 0.5, 0.3]);
        let s = scenarios(&d);
        assert_eq!(
            s.iter().map(|x| x.train_index).collect::<Vec<_>>(),
            vec![1, 2, 0]
        );
    }

    proptest! {
        #[test]
        fn topk_invariants(
            raw in proptest::collection::vec(0.01f64..1.0, 3..40),
            k in 1usize..50,
        ) {
            let total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let support: Vec<f64> = (0..weights.len()).map(|i| i as f64).collect();
            let m = weights.len();
            let d = dist(support, weights);
            let t = topk_sparsify(&d, k).unwrap();
            prop_assert_eq!(t.weights().nnz(), k.min(m));
            prop_assert!((t.weights().sum() - 1.0).abs() < 1e-12);
            // support of result is a subset of the input's positive indices
            for i in t.weights().indices() {
                prop_assert!(d.weights().indices().contains(i));
            }
            // idempotence for fixed k
            let tt = topk_sparsify(&t, k).unwrap();
            prop_assert_eq!(tt.weights(), t.weights());
        }

        #[test]
        fn pre_normalization_sum_monotone_in_k(
            raw in proptest::collection::vec(0.01f64..1.0, 4..30),
        ) {
            let total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let support: Vec<f64> = (0..weights.len()).map(|i| i as f64).collect();
            let d = dist(support, weights);
            let mut last = 0.0;
            for k in 1..=d.weights().nnz() {
                let t = topk_sparsify(&d, k).unwrap();
                let sum = match t.provenance() {
                    Provenance::TopK { pre_normalization_sum, .. } => *pre_normalization_sum,
                    _ => unreachable!(),
                };
                prop_assert!(sum >= last - 1e-12);
                last = sum;
            }
        }

        #[test]
        fn quantile_nondecreasing_in_tau(
            raw in proptest::collection::vec((0.01f64..1.0, -10.0f64..10.0), 2..30),
        ) {
            let total: f64 = raw.iter().map(|(w, _)| w).sum();
            let weights: Vec<f64> = raw.iter().map(|(w, _)| w / total).collect();
            let support: Vec<f64> = raw.iter().map(|&(_, y)| y).collect();
            let d = dist(support, weights);
            let taus = [0.05, 0.2, 0.4, 0.5, 0.6, 0.8, 0.95];
            let qs: Vec<f64> = taus.iter().map(|&t| dist_quantile(&d, t)).collect();
            for pair in qs.windows(2) {
                prop_assert!(pair[0] <= pair[1]);
            }
        }
    }
}

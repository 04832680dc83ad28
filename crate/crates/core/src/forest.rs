//! CART-style regression forest with per-prediction weight vectors.
//!
//! Each tree is fit on a with-replacement bootstrap sample of size n with a
//! fresh random feature subset searched at every node for the
//! variance-reducing best split. Leaf membership for weight evaluation is
//! computed by dropping ALL original training rows down the fitted tree, so
//! every training index can receive weight and forest weights are
//! nonnegative and sum to one.
//!
//! Determinism contract: tree b draws from a ChaCha stream derived from
//! (seed, b), so parallel and sequential training produce identical
//! forests regardless of thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::Error;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxFeatures {
    Sqrt,
    Fraction(f64),
    All,
}

impl MaxFeatures {
    /// Number of features searched per node: max(1, floor(.)).
    pub fn resolve(&self, p: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((p as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::Fraction(f) => ((f * p as f64).floor() as usize).max(1).min(p),
            MaxFeatures::All => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Hyperparams {
    /// The standard setting: sqrt features, unrestricted depth,
    /// min split size 5, 1000 trees.
    pub fn standard(seed: u64) -> Self {
        Hyperparams {
            n_trees: 1000,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 1,
            min_samples_split: 5,
            max_depth: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::invalid("n_trees", "must be >= 1"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::invalid("min_samples_leaf", "must be >= 1"));
        }
        if self.min_samples_split < 2 {
            return Err(Error::invalid("min_samples_split", "must be >= 2"));
        }
        if let Some(d) = self.max_depth {
            if d == 0 {
                return Err(Error::invalid("max_depth", "must be >= 1 when present"));
            }
        }
        if let MaxFeatures::Fraction(f) = self.max_features {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::invalid("max_features", format!("{f} not in (0,1]")));
            }
        }
        Ok(())
    }
}

/// Sparse nonnegative weights over training indices summing to one.
/// Stored as parallel (indices, weights) arrays sorted by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    indices: Vec<u32>,
    weights: Vec<f64>,
}

impl WeightVector {
    /// Build from a dense buffer, keeping strictly positive entries.
    pub fn from_dense(dense: &[f64]) -> Self {
        let mut indices = Vec::new();
        let mut weights = Vec::new();
        for (i, &w) in dense.iter().enumerate() {
            if w > 0.0 {
                indices.push(i as u32);
                weights.push(w);
            }
        }
        WeightVector { indices, weights }
    }

    /// Build from (index, weight) pairs; entries must have unique indices.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.retain(|&(_, w)| w > 0.0);
        pairs.sort_by_key(|&(i, _)| i);
        debug_assert!(pairs.windows(2).all(|p| p[0].0 < p[1].0));
        let indices = pairs.iter().map(|&(i, _)| i).collect();
        let weights = pairs.iter().map(|&(_, w)| w).collect();
        WeightVector { indices, weights }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.weights.iter().copied())
    }

    /// Number of strictly positive weights.
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut dense = vec![0.0; n];
        for (i, w) in self.iter() {
            dense[i as usize] = w;
        }
        dense
    }

    pub fn dot(&self, values: &[f64]) -> f64 {
        self.iter().map(|(i, w)| w * values[i as usize]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Internal {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        /// Original-training-set indices falling into this leaf, sorted.
        members: Vec<u32>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Index of the leaf node x0 falls into.
    pub fn leaf_of(&self, x0: &[f64]) -> usize {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                Node::Leaf { .. } => return node,
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x0[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn leaf_members(&self, leaf: usize) -> &[u32] {
        match &self.nodes[leaf] {
            Node::Leaf { members } => members,
            Node::Internal { .. } => panic!("leaf_members on internal node"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub training_response: Vec<f64>,
    pub feature_names: Vec<String>,
    pub hyperparams: Hyperparams,
}

impl Forest {
    pub fn n_train(&self) -> usize {
        self.training_response.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }
}

/// ChaCha stream for tree b, derived from (seed, b).
fn tree_rng(seed: u64, b: u64) -> ChaCha8Rng {
    let mut s = [0u8; 32];
    s[..8].copy_from_slice(&seed.to_le_bytes());
    s[8..16].copy_from_slice(&b.to_le_bytes());
    s[16..24].copy_from_slice(b"tkrftree");
    ChaCha8Rng::from_seed(s)
}

struct TreeFitter<'a> {
    data: &'a Dataset,
    p_try: usize,
    min_samples_leaf: usize,
    min_samples_split: usize,
    max_depth: Option<usize>,
    nodes: Vec<Node>,
}

impl<'a> TreeFitter<'a> {
    /// Best split over a random feature subset, or None if no split
    /// strictly reduces the summed squared error. Ties between candidates
    /// go to (lowest feature index, lowest threshold); features are
    /// scanned ascending and thresholds ascending, so the first strictly
    /// better candidate wins.
    fn best_split(&self, rows: &[u32], rng: &mut ChaCha8Rng) -> Option<(u32, f64)> {
        let p = self.data.p;
        // Partial Fisher-Yates draw of p_try distinct features.
        let mut pool: Vec<u32> = (0..p as u32).collect();
        for i in 0..self.p_try {
            let j = rng.gen_range(i..p);
            pool.swap(i, j);
        }
        let mut candidates = pool[..self.p_try].to_vec();
        candidates.sort_unstable();

        let m = rows.len();
        let total_sum: f64 = rows.iter().map(|&r| self.data.response[r as usize]).sum();
        let total_sq: f64 = rows
            .iter()
            .map(|&r| self.data.response[r as usize].powi(2))
            .sum();
        let parent_sse = total_sq - total_sum * total_sum / m as f64;

        let mut best: Option<(f64, u32, f64)> = None;
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(m);
        for &feat in &candidates {
            pairs.clear();
            pairs.extend(rows.iter().map(|&r| {
                let row = self.data.row(r as usize);
                (row[feat as usize], self.data.response[r as usize])
            }));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_sum = 0.0;
            let mut left_sq = 0.0;
            for i in 1..m {
                let (x_prev, y_prev) = pairs[i - 1];
                left_sum += y_prev;
                left_sq += y_prev * y_prev;
                let x_next = pairs[i].0;
                if x_prev >= x_next {
                    continue;
                }
                if i < self.min_samples_leaf || m - i < self.min_samples_leaf {
                    continue;
                }
                let right_sum = total_sum - left_sum;
                let right_sq = total_sq - left_sq;
                let sse = (left_sq - left_sum * left_sum / i as f64)
                    + (right_sq - right_sum * right_sum / (m - i) as f64);
                let gain = parent_sse - sse;
                if gain <= 0.0 {
                    continue;
                }
                let mut thr = 0.5 * (x_prev + x_next);
                if !(thr > x_prev && thr < x_next) {
                    // midpoint rounded onto an endpoint; fall back to the
                    // left value so both children stay nonempty
                    thr = x_prev;
                }
                if best.map_or(true, |(g, _, _)| gain > g) {
                    best = Some((gain, feat, thr));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn build(&mut self, rows: Vec<u32>, depth: usize, rng: &mut ChaCha8Rng) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf { members: Vec::new() });

        let stop = rows.len() < self.min_samples_split
            || self.max_depth.map_or(false, |d| depth >= d)
            || constant_response(self.data, &rows);
        if !stop {
            if let Some((feature, threshold)) = self.best_split(&rows, rng) {
                let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = rows
                    .iter()
                    .partition(|&&r| self.data.row(r as usize)[feature as usize] <= threshold);
                debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
                let left = self.build(left_rows, depth + 1, rng);
                let right = self.build(right_rows, depth + 1, rng);
                self.nodes[id as usize] = Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                };
            }
        }
        id
    }
}

fn constant_response(data: &Dataset, rows: &[u32]) -> bool {
    let first = data.response[rows[0] as usize];
    rows.iter().all(|&r| data.response[r as usize] == first)
}

fn fit_tree(train: &Dataset, hp: &Hyperparams, b: u64) -> Tree {
    let mut rng = tree_rng(hp.seed, b);
    let n = train.n;
    let bootstrap: Vec<u32> = (0..n).map(|_| rng.gen_range(0..n) as u32).collect();

    let mut fitter = TreeFitter {
        data: train,
        p_try: hp.max_features.resolve(train.p),
        min_samples_leaf: hp.min_samples_leaf,
        min_samples_split: hp.min_samples_split,
        max_depth: hp.max_depth,
        nodes: Vec::new(),
    };
    fitter.build(bootstrap, 0, &mut rng);
    let mut tree = Tree { nodes: fitter.nodes };

    // Leaf membership is computed on the ORIGINAL training rows, not the
    // bootstrap sample, so that every index i = 1..n can receive weight.
    for i in 0..n {
        let leaf = tree.leaf_of(train.row(i));
        match &mut tree.nodes[leaf] {
            Node::Leaf { members } => members.push(i as u32),
            Node::Internal { .. } => unreachable!(),
        }
    }
    for node in &tree.nodes {
        if let Node::Leaf { members } = node {
            assert!(!members.is_empty(), "leaf without original-sample members");
        }
    }
    tree
}

/// Train B trees on bootstrap samples. Parallel over trees; identical to
/// sequential execution for a fixed seed.
pub fn fit_forest(train: &Dataset, hp: &Hyperparams) -> Result<Forest> {
    hp.validate()?;
    if train.n < 2 {
        return Err(Error::invalid("train.n", "need at least 2 training rows"));
    }
    let trees: Vec<Tree> = (0..hp.n_trees as u64)
        .into_par_iter()
        .map(|b| fit_tree(train, hp, b))
        .collect();
    Ok(Forest {
        trees,
        training_response: train.response.clone(),
        feature_names: train.feature_names.clone(),
        hyperparams: hp.clone(),
    })
}

/// Per-tree weights: 1/|leaf| for members of the leaf x0 falls into.
pub fn tree_weights(t: &Tree, x0: &[f64]) -> WeightVector {
    let leaf = t.leaf_of(x0);
    let members = t.leaf_members(leaf);
    let w = 1.0 / members.len() as f64;
    WeightVector {
        indices: members.to_vec(),
        weights: vec![w; members.len()],
    }
}

/// Forest weights: elementwise average of the B tree weight vectors.
pub fn forest_weights(f: &Forest, x0: &[f64]) -> WeightVector {
    assert_eq!(x0.len(), f.n_features(), "feature count mismatch");
    let n = f.n_train();
    let b = f.trees.len() as f64;
    let mut dense = vec![0.0; n];
    for tree in &f.trees {
        let leaf = tree.leaf_of(x0);
        let members = tree.leaf_members(leaf);
        let w = 1.0 / (b * members.len() as f64);
        for &i in members {
            dense[i as usize] += w;
        }
    }
    WeightVector::from_dense(&dense)
}

/// Mean prediction: the weight-vector dot product with training responses.
pub fn predict_mean(f: &Forest, x0: &[f64]) -> f64 {
    forest_weights(f, x0).dot(&f.training_response)
}

/// Row-wise forest weights, parallel over rows; output order matches
/// input order.
pub fn forest_weights_batch(f: &Forest, rows: &[&[f64]]) -> Result<Vec<WeightVector>> {
    for r in rows {
        if r.len() != f.n_features() {
            return Err(Error::LengthMismatch(format!(
                "row has {} columns, forest expects {}",
                r.len(),
                f.n_features()
            )));
        }
    }
    Ok(rows.par_iter().map(|r| forest_weights(f, r)).collect())
}

pub mod persist;


impl Hyperparams {
    /// Small-forest variant of [`Hyperparams::standard`] for tests and
    /// quick experiments.
    pub fn standard_small(n_trees: usize, seed: u64) -> Self {
        Hyperparams {
            n_trees,
            ..Hyperparams::standard(seed)
        }
    }
}

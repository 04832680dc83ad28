//! Synthetic regression datasets for hermetic experiments and tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::error::Error;
use crate::Result;

fn feature_names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("x{j}")).collect()
}

/// Friedman #1 benchmark: y = 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2
/// + 10 x4 + 5 x5 + noise, with x ~ U(0,1)^p and p >= 5. Features beyond
/// the first five are pure noise.
pub fn friedman1(n: usize, p: usize, noise_sd: f64, seed: u64) -> Result<Dataset> {
    if p < 5 {
        return Err(Error::invalid("p", "friedman1 needs at least 5 features"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n * p);
    let mut response = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..p).map(|_| rng.gen::<f64>()).collect();
        let eps: f64 = rng.sample(StandardNormal);
        let y = 10.0 * (std::f64::consts::PI * row[0] * row[1]).sin()
            + 20.0 * (row[2] - 0.5).powi(2)
            + 10.0 * row[3]
            + 5.0 * row[4]
            + noise_sd * eps;
        features.extend_from_slice(&row);
        response.push(y);
    }
    Dataset::new(features, response, feature_names(p))
}

/// Response independent of all features: y ~ N(0,1).
pub fn pure_noise(n: usize, p: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n * p);
    let mut response = Vec::with_capacity(n);
    for _ in 0..n {
        for _ in 0..p {
            features.push(rng.gen::<f64>());
        }
        response.push(rng.sample(StandardNormal));
    }
    Dataset::new(features, response, feature_names(p))
}

/// Linear model y = sum_j (j+1) x_j + noise, x ~ U(0,1)^p.
pub fn linear(n: usize, p: usize, noise_sd: f64, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n * p);
    let mut response = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..p).map(|_| rng.gen::<f64>()).collect();
        let eps: f64 = rng.sample(StandardNormal);
        let y: f64 = row
            .iter()
            .enumerate()
            .map(|(j, x)| (j + 1) as f64 * x)
            .sum::<f64>()
            + noise_sd * eps;
        features.extend_from_slice(&row);
        response.push(y);
    }
    Dataset::new(features, response, feature_names(p))
}

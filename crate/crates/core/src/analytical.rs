//! Stylized analytical model of sparsified forecast weights.
//!
//! True weights put probability theta*/k on a fixed block of k "important"
//! indices and (1-theta*)/(n-k) elsewhere. Estimated weights scale two
//! independent symmetric Dirichlet draws by theta and 1-theta. Support
//! points are standard normal. The module provides the conditional
//! expected SE and CRPS, both closed forms for the unconditional expected
//! scores, a Monte Carlo verifier, and a theta sweep.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticalConfig {
    pub n: usize,
    pub k: usize,
    pub theta_star: f64,
    pub theta: f64,
    pub d1: f64,
    pub d2: f64,
}

impl AnalyticalConfig {
    /// The important block is fixed to the first k indices; the expected
    /// scores depend on it only through block membership.
    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::invalid("n", "must be >= 4"));
        }
        if !(2 <= self.k && self.k <= self.n - 2) {
            return Err(Error::invalid(
                "k",
                format!("must satisfy 2 <= k <= n-2, got k={} n={}", self.k, self.n),
            ));
        }
        for (name, v) in [("theta_star", self.theta_star), ("theta", self.theta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(name, format!("{v} not in [0,1]")));
            }
        }
        for (name, v) in [("d1", self.d1), ("d2", self.d2)] {
            if !(v > 0.0) {
                return Err(Error::invalid(name, format!("{v} must be > 0")));
            }
        }
        Ok(())
    }
}

/// True weights: theta*/k on the important block, (1-theta*)/(n-k)
/// elsewhere.
pub fn true_weights(c: &AnalyticalConfig) -> Result<Vec<f64>> {
    c.validate()?;
    let hi = c.theta_star / c.k as f64;
    let lo = (1.0 - c.theta_star) / (c.n - c.k) as f64;
    Ok((0..c.n).map(|i| if i < c.k { hi } else { lo }).collect())
}

/// One draw from Gamma(shape, 1) via Marsaglia-Tsang, shape >= 1.
fn gamma_at_least_one(shape: f64, rng: &mut ChaCha8Rng) -> f64 {
    debug_assert!(shape >= 1.0);
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = (1.0 + c * x).powi(3);
        if v <= 0.0 {
            continue;
        }
        let u: f64 = rng.gen();
        if u.ln() < 0.5 * x * x + d - d * v + d * v.ln() {
            return d * v;
        }
    }
}

/// log of a Gamma(shape, 1) draw, valid for any shape > 0.
///
/// For shape < 1 the usual boost G(a) = G(a+1) * U^(1/a) is applied in log
/// space, which stays accurate for very small shapes (d = 0.01 and below)
/// where the direct product underflows.
fn log_gamma_draw(shape: f64, rng: &mut ChaCha8Rng) -> f64 {
    if shape >= 1.0 {
        gamma_at_least_one(shape, rng).ln()
    } else {
        let g = gamma_at_least_one(shape + 1.0, rng);
        let u: f64 = rng.gen();
        g.ln() + u.ln() / shape
    }
}

/// Symmetric Dirichlet(d, ..., d) of the given dimension via normalized
/// Gamma draws; log-sum-exp normalization keeps tiny concentrations
/// stable.
pub fn symmetric_dirichlet(dim: usize, d: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let logs: Vec<f64> = (0..dim).map(|_| log_gamma_draw(d, rng)).collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| e / total).collect()
}

/// Estimated weights: theta * Dirichlet(d1) on the important block,
/// (1 - theta) * Dirichlet(d2) on the rest. Deterministic per seed.
pub fn sample_estimated_weights(c: &AnalyticalConfig, seed: u64) -> Result<Vec<f64>> {
    c.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_estimated_weights_with(c, &mut rng))
}

fn sample_estimated_weights_with(c: &AnalyticalConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let z1 = symmetric_dirichlet(c.k, c.d1, rng);
    let z2 = symmetric_dirichlet(c.n - c.k, c.d2, rng);
    let mut omega = Vec::with_capacity(c.n);
    omega.extend(z1.iter().map(|z| c.theta * z));
    omega.extend(z2.iter().map(|z| (1.0 - c.theta) * z));
    omega
}

/// Conditional expected squared error given estimated weights, true
/// weights and support points: sum_i w*_i (u_i - sum_j w_j u_j)^2.
pub fn expected_se_given(omega: &[f64], omega_star: &[f64], u: &[f64]) -> Result<f64> {
    check_lengths(omega, omega_star, u)?;
    let mean: f64 = omega.iter().zip(u).map(|(w, ui)| w * ui).sum();
    Ok(omega_star
        .iter()
        .zip(u)
        .map(|(ws, ui)| ws * (ui - mean).powi(2))
        .sum())
}

/// Conditional expected CRPS given estimated weights, true weights and
/// support points: sum_i sum_j w_i (w*_j - w_j/2) |u_i - u_j|.
pub fn expected_crps_given(omega: &[f64], omega_star: &[f64], u: &[f64]) -> Result<f64> {
    check_lengths(omega, omega_star, u)?;
    let n = u.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut inner = 0.0;
        for j in 0..n {
            inner += (omega_star[j] - omega[j] / 2.0) * (u[i] - u[j]).abs();
        }
        total += omega[i] * inner;
    }
    Ok(total)
}

fn check_lengths(omega: &[f64], omega_star: &[f64], u: &[f64]) -> Result<()> {
    if omega.len() != omega_star.len() || omega.len() != u.len() {
        return Err(Error::LengthMismatch(format!(
            "omega={} omega_star={} u={}",
            omega.len(),
            omega_star.len(),
            u.len()
        )));
    }
    Ok(())
}

/// Closed-form unconditional expected squared error.
pub fn expected_se_closed(c: &AnalyticalConfig) -> Result<f64> {
    c.validate()?;
    let (n, k) = (c.n as f64, c.k as f64);
    let (ts, t) = (c.theta_star, c.theta);
    Ok(1.0 - 2.0 * (ts * t / k + (1.0 - ts) * (1.0 - t) / (n - k))
        + t * t / k
        + (1.0 - t).powi(2) / (n - k)
        + t * t * (k - 1.0) / (k * (k * c.d1 + 1.0))
        + (1.0 - t).powi(2) * (n - k - 1.0) / ((n - k) * ((n - k) * c.d2 + 1.0)))
}

/// Three-term closed form for the unconditional expected CRPS, derived
/// from the four block-membership cases of the weight covariances.
fn expected_crps_three_term(c: &AnalyticalConfig) -> f64 {
    let (n, k) = (c.n as f64, c.k as f64);
    let (ts, t) = (c.theta_star, c.theta);
    let scale = 2.0 / std::f64::consts::PI.sqrt();
    scale
        * (t * (k - 1.0) * (ts / k - c.d1 * t / (2.0 * (k * c.d1 + 1.0)))
            + (1.0 - t)
                * (n - k - 1.0)
                * ((1.0 - ts) / (n - k) - (1.0 - t) * c.d2 / (2.0 * ((n - k) * c.d2 + 1.0)))
            + (ts + t * t - 2.0 * ts * t))
}

/// Closed-form unconditional expected CRPS.
///
/// Computed two algebraically independent ways -- E[SE]/sqrt(pi) and the
/// three-term sum -- and asserted equal to 1e-12; a mismatch signals an
/// implementation bug.
pub fn expected_crps_closed(c: &AnalyticalConfig) -> Result<f64> {
    let via_se = expected_se_closed(c)? / std::f64::consts::PI.sqrt();
    let three_term = expected_crps_three_term(c);
    assert!(
        (via_se - three_term).abs() <= 1e-12,
        "closed-form CRPS routes disagree: {via_se} vs {three_term}"
    );
    Ok(via_se)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McScores {
    pub se_mean: f64,
    pub crps_mean: f64,
    pub se_stderr: f64,
    pub crps_stderr: f64,
    pub draws: usize,
}

/// Monte Carlo estimate of the unconditional expected scores: average the
/// conditional expectations over independent (omega, u) draws.
/// Deterministic per seed.
pub fn mc_expected_scores(c: &AnalyticalConfig, draws: usize, seed: u64) -> Result<McScores> {
    c.validate()?;
    if draws < 1000 {
        return Err(Error::invalid("draws", "must be >= 1000"));
    }
    let omega_star = true_weights(c)?;

    use rayon::prelude::*;
    const CHUNK: usize = 1024;
    let n_chunks = draws.div_ceil(CHUNK);
    // Per-chunk seed streams keep results identical across thread counts.
    let partials: Vec<(f64, f64, f64, f64)> = (0..n_chunks as u64)
        .into_par_iter()
        .map(|chunk| {
            let mut s = [0u8; 32];
            s[..8].copy_from_slice(&seed.to_le_bytes());
            s[8..16].copy_from_slice(&chunk.to_le_bytes());
            s[16..24].copy_from_slice(b"tkrfanmc");
            let mut rng = ChaCha8Rng::from_seed(s);
            let lo = chunk as usize * CHUNK;
            let hi = ((chunk as usize + 1) * CHUNK).min(draws);
            let mut se_sum = 0.0;
            let mut se_sq = 0.0;
            let mut crps_sum = 0.0;
            let mut crps_sq = 0.0;
            for _ in lo..hi {
                let u: Vec<f64> = (0..c.n).map(|_| rng.sample(StandardNormal)).collect();
                let omega = sample_estimated_weights_with(c, &mut rng);
                let se = expected_se_given(&omega, &omega_star, &u).expect("lengths match");
                let crps = expected_crps_given(&omega, &omega_star, &u).expect("lengths match");
                se_sum += se;
                se_sq += se * se;
                crps_sum += crps;
                crps_sq += crps * crps;
            }
            (se_sum, se_sq, crps_sum, crps_sq)
        })
        .collect();

    let (se_sum, se_sq, crps_sum, crps_sq) = partials
        .iter()
        .fold((0.0, 0.0, 0.0, 0.0), |acc, p| {
            (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2, acc.3 + p.3)
        });
    let m = draws as f64;
    let se_mean = se_sum / m;
    let crps_mean = crps_sum / m;
    let se_var = (se_sq / m - se_mean * se_mean).max(0.0);
    let crps_var = (crps_sq / m - crps_mean * crps_mean).max(0.0);
    Ok(McScores {
        se_mean,
        crps_mean,
        se_stderr: (se_var / m).sqrt(),
        crps_stderr: (crps_var / m).sqrt(),
        draws,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaSweepRow {
    pub theta: f64,
    pub expected_crps: f64,
    pub expected_se: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaSweep {
    pub rows: Vec<ThetaSweepRow>,
    /// Grid point minimizing the expected CRPS.
    pub argmin_theta: f64,
    /// Largest grid theta whose expected CRPS exceeds the theta = 1 value,
    /// i.e. the upper boundary of the region where Top-k dominates.
    pub worse_than_one_boundary: Option<f64>,
}

/// Closed-form expected CRPS over a theta grid, plus the argmin and the
/// boundary of the region dominated by theta = 1.
pub fn theta_sweep(base: &AnalyticalConfig, theta_grid: &[f64]) -> Result<ThetaSweep> {
    if theta_grid.is_empty() {
        return Err(Error::invalid("theta_grid", "empty grid"));
    }
    if theta_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::invalid("theta_grid", "values must lie in [0,1]"));
    }
    let at = |theta: f64| -> Result<(f64, f64)> {
        let c = AnalyticalConfig { theta, ..*base };
        Ok((expected_crps_closed(&c)?, expected_se_closed(&c)?))
    };
    let (crps_at_one, _) = at(1.0)?;
    let mut rows = Vec::with_capacity(theta_grid.len());
    for &theta in theta_grid {
        let (expected_crps, expected_se) = at(theta)?;
        rows.push(ThetaSweepRow {
            theta,
            expected_crps,
            expected_se,
        });
    }
    let argmin_theta = rows
        .iter()
        .min_by(|a, b| a.expected_crps.total_cmp(&b.expected_crps))
        .expect("nonempty grid")
        .theta;
    let worse_than_one_boundary = rows
        .iter()
        .filter(|r| r.expected_crps > crps_at_one)
        .map(|r| r.theta)
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.max(t))));
    Ok(ThetaSweep {
        rows,
        argmin_theta,
        worse_than_one_boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, k: usize, ts: f64, t: f64, d1: f64, d2: f64) -> AnalyticalConfig {
        AnalyticalConfig {
            n,
            k,
            theta_star: ts,
            theta: t,
            d1,
            d2,
        }
    }

    #[test]
    fn validation_bounds() {
        assert!(cfg(10, 2, 0.8, 0.8, 1.0, 1.0).validate().is_ok());
        assert!(cfg(10, 1, 0.8, 0.8, 1.0, 1.0).validate().is_err());
        assert!(cfg(10, 9, 0.8, 0.8, 1.0, 1.0).validate().is_err());
        assert!(cfg(10, 2, 1.2, 0.8, 1.0, 1.0).validate().is_err());
        assert!(cfg(10, 2, 0.8, 0.8, 0.0, 1.0).validate().is_err());
    }

    #[test]
    fn true_weights_formula() {
        let w = true_weights(&cfg(10, 2, 0.8, 0.8, 1.0, 1.0)).unwrap();
        assert_eq!(&w[..2], &[0.4, 0.4]);
        for v in &w[2..] {
            assert!((v - 0.025).abs() < 1e-15);
        }
        // theta* = k/n gives the uniform distribution
        let w = true_weights(&cfg(10, 2, 0.2, 0.8, 1.0, 1.0)).unwrap();
        for v in &w {
            assert!((v - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn true_weights_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let n = rng.gen_range(5..200);
            let k = rng.gen_range(2..=n - 2);
            let c = cfg(n, k, rng.gen(), rng.gen(), 1.0, 1.0);
            let w = true_weights(&c).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn estimated_weights_sum_and_determinism() {
        let c = cfg(30, 5, 0.8, 0.7, 2.0, 0.5);
        let a = sample_estimated_weights(&c, 9).unwrap();
        let b = sample_estimated_weights(&c, 9).unwrap();
        assert_eq!(a, b);
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(a.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn tiny_concentration_stays_normalized() {
        let c = cfg(100, 5, 0.8, 0.8, 0.01, 0.00001);
        for seed in 0..50 {
            let w = sample_estimated_weights(&c, seed).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9, "seed {seed}");
            assert!(w.iter().all(|v| v.is_finite() && *v >= 0.0));
        }
    }

    #[test]
    fn conditional_se_hand_value() {
        // all mass believed on u=2, truth on u=0: (0-2)^2 = 4
        let v = expected_se_given(&[0.0, 1.0], &[1.0, 0.0], &[0.0, 2.0]).unwrap();
        assert_eq!(v, 4.0);
        // equal support values make the expected SE zero
        let v = expected_se_given(&[0.5, 0.5], &[0.5, 0.5], &[1.0, 1.0]).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn conditional_crps_hand_value() {
        let v = expected_crps_given(&[0.5, 0.5], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((v - 0.25).abs() < 1e-14);
        let v = expected_crps_given(&[0.3, 0.7], &[0.4, 0.6], &[2.0, 2.0]).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn closed_se_limit_example() {
        let c = cfg(100, 5, 0.8, 0.8, 1e12, 1e12);
        let v = expected_se_closed(&c).unwrap();
        let limit = 1.0 - 0.8f64.powi(2) / 5.0 - 0.2f64.powi(2) / 95.0;
        assert!((v - limit).abs() < 1e-6, "{v} vs {limit}");
        assert!((v - 0.8715789).abs() < 1e-6);
    }

    #[test]
    fn closed_se_example_theta_one() {
        let c = cfg(100, 5, 0.8, 1.0, 1000.0, 1000.0);
        let v = expected_se_closed(&c).unwrap();
        assert!((v - 0.8801600).abs() < 1e-6, "{v}");
    }

    #[test]
    fn closed_se_block_relabel_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let n = rng.gen_range(6..100);
            let k = rng.gen_range(2..=n - 2);
            let c = cfg(n, k, rng.gen(), rng.gen(), rng.gen::<f64>() * 10.0 + 0.01, rng.gen::<f64>() * 10.0 + 0.01);
            let swapped = cfg(
                n,
                n - k,
                1.0 - c.theta_star,
                1.0 - c.theta,
                c.d2,
                c.d1,
            );
            let a = expected_se_closed(&c).unwrap();
            let b = expected_se_closed(&swapped).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sqrt_pi_identity_over_random_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let n = rng.gen_range(6..200);
            let k = rng.gen_range(2..=n - 2);
            let c = cfg(
                n,
                k,
                rng.gen(),
                rng.gen(),
                10f64.powf(rng.gen_range(-2.0..3.0)),
                10f64.powf(rng.gen_range(-2.0..3.0)),
            );
            let crps = expected_crps_closed(&c).unwrap();
            let se = expected_se_closed(&c).unwrap();
            assert!((crps * std::f64::consts::PI.sqrt() - se).abs() <= 1e-12);
        }
    }

    #[test]
    fn expected_se_decreasing_in_precision() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.gen_range(6..100);
            let k = rng.gen_range(2..=n - 2);
            // strictness fails only in the degenerate theta endpoints
            let c = cfg(
                n,
                k,
                rng.gen(),
                0.05 + 0.9 * rng.gen::<f64>(),
                10f64.powf(rng.gen_range(-2.0..2.0)),
                10f64.powf(rng.gen_range(-2.0..2.0)),
            );
            let base = expected_se_closed(&c).unwrap();
            let up1 = expected_se_closed(&cfg(n, k, c.theta_star, c.theta, c.d1 * 2.0, c.d2)).unwrap();
            let up2 = expected_se_closed(&cfg(n, k, c.theta_star, c.theta, c.d1, c.d2 * 2.0)).unwrap();
            assert!(up1 < base);
            assert!(up2 < base);
        }
    }

    #[test]
    fn theta_sweep_fig5_shapes() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        // precise unimportant estimates: theta = theta* beats theta = 1,
        // and theta = 1 dominates only up to ~0.6
        let left = cfg(100, 5, 0.8, 0.8, 1000.0, 1000.0);
        let sweep = theta_sweep(&left, &grid).unwrap();
        let at = |t: f64| {
            sweep
                .rows
                .iter()
                .find(|r| (r.theta - t).abs() < 1e-9)
                .unwrap()
                .expected_crps
        };
        assert!(at(0.8) < at(1.0));
        let boundary = sweep.worse_than_one_boundary.unwrap();
        assert!((boundary - 0.6).abs() <= 0.02, "boundary {boundary}");

        // noisy unimportant estimates: theta = 1 beats the true theta*
        let right = cfg(100, 5, 0.8, 0.8, 1000.0, 0.01);
        let sweep = theta_sweep(&right, &grid).unwrap();
        let at = |t: f64| {
            sweep
                .rows
                .iter()
                .find(|r| (r.theta - t).abs() < 1e-9)
                .unwrap()
                .expected_crps
        };
        assert!(at(1.0) < at(0.8));
    }

    #[test]
    fn theta_sweep_argmin_converges_to_theta_star() {
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        let c = cfg(100, 5, 0.8, 0.8, 1e8, 1e8);
        let sweep = theta_sweep(&c, &grid).unwrap();
        assert!((sweep.argmin_theta - 0.8).abs() <= 0.001 + 1e-12);
    }

    #[test]
    fn mc_matches_closed_form_quick() {
        let c = cfg(20, 5, 0.8, 0.8, 1.0, 1.0);
        let mc = mc_expected_scores(&c, 20_000, 5).unwrap();
        let se = expected_se_closed(&c).unwrap();
        let crps = expected_crps_closed(&c).unwrap();
        assert!((mc.se_mean - se).abs() < 3.0 * mc.se_stderr, "{mc:?} vs {se}");
        assert!(
            (mc.crps_mean - crps).abs() < 3.0 * mc.crps_stderr,
            "{mc:?} vs {crps}"
        );
    }

    #[test]
    fn mc_deterministic_per_seed() {
        let c = cfg(12, 3, 0.7, 0.5, 2.0, 0.5);
        let a = mc_expected_scores(&c, 2000, 77).unwrap();
        let b = mc_expected_scores(&c, 2000, 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mc_stderr_scales_with_draws() {
        let c = cfg(20, 5, 0.8, 0.6, 1.0, 1.0);
        let big = mc_expected_scores(&c, 40_000, 5).unwrap();
        let small = mc_expected_scores(&c, 20_000, 6).unwrap();
        let ratio = small.se_stderr / big.se_stderr;
        assert!((1.2..=1.7).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn dirichlet_moments_quick() {
        // mean 1/k and variance (k-1)/(k^2 (k d + 1)) for k=5, d=1
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (k, d) = (5usize, 1.0);
        let draws = 200_000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..draws {
            let z = symmetric_dirichlet(k, d, &mut rng);
            sum += z[0];
            sq += z[0] * z[0];
        }
        let m = draws as f64;
        let mean = sum / m;
        let var = sq / m - mean * mean;
        let expect_var = (k as f64 - 1.0) / ((k as f64).powi(2) * (k as f64 * d + 1.0));
        assert!((mean - 0.2).abs() < 0.005, "mean {mean}");
        assert!((var / expect_var - 1.0).abs() < 0.05, "var {var} vs {expect_var}");
    }

    #[test]
    fn folded_normal_constant() {
        // E|U - U'| = 2/sqrt(pi) for independent standard normals
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let draws = 400_000;
        let mut sum = 0.0;
        for _ in 0..draws {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            sum += (a - b).abs();
        }
        let mean = sum / draws as f64;
        let expect = 2.0 / std::f64::consts::PI.sqrt();
        assert!((mean / expect - 1.0).abs() < 0.005, "{mean} vs {expect}");
    }
}

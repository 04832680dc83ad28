use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use topkrf::analytical::symmetric_dirichlet;
use topkrf::dist::topk_sparsify;
use topkrf::forest::{fit_forest, forest_weights};
use topkrf::scoring::crps_wecdf;
use topkrf::{ForecastDistribution, Hyperparams, WeightVector};
use topkrf::synthetic::friedman1;

fn bench_forest(c: &mut Criterion) {
    let data = friedman1(1000, 10, 1.0, 1).unwrap();
    let hp = Hyperparams::standard_small(50, 2);
    c.bench_function("fit_forest/50-trees-1000-rows", |b| {
        b.iter(|| fit_forest(&data, &hp).unwrap())
    });

    let forest = fit_forest(&data, &hp).unwrap();
    let probe = data.row(0).to_vec();
    c.bench_function("forest_weights/single-row", |b| {
        b.iter(|| forest_weights(&forest, &probe))
    });
}

fn random_dist(n: usize) -> ForecastDistribution {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let support: Vec<f64> = (0..n).map(|_| rand::Rng::gen::<f64>(&mut rng) * 10.0).collect();
    let raw: Vec<f64> = (0..n).map(|_| rand::Rng::gen::<f64>(&mut rng) + 0.01).collect();
    let total: f64 = raw.iter().sum();
    let pairs = raw
        .iter()
        .enumerate()
        .map(|(i, w)| (i as u32, w / total))
        .collect();
    ForecastDistribution::new(Arc::new(support), WeightVector::from_pairs(pairs))
}

fn bench_scoring(c: &mut Criterion) {
    let mut group = c.benchmark_group("crps_wecdf");
    for n in [50usize, 500, 5000] {
        let d = random_dist(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &d, |b, d| {
            b.iter(|| crps_wecdf(d, 5.0))
        });
    }
    group.finish();

    let d = random_dist(5000);
    c.bench_function("topk_sparsify/k10-of-5000", |b| {
        b.iter(|| topk_sparsify(&d, 10).unwrap())
    });
}

fn bench_dirichlet(c: &mut Criterion) {
    let mut group = c.benchmark_group("symmetric_dirichlet");
    for d in [0.01f64, 1.0, 1000.0] {
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            b.iter(|| symmetric_dirichlet(100, d, &mut rng))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_forest, bench_scoring, bench_dirichlet);
criterion_main!(benches);

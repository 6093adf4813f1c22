use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;
use stability_lab::exec::{map_indexed_parallel, map_indexed_sequential};
use stability_lab::transform::{fit_shards, release};
use stability_lab::{
    disagreement_estimate, private_histogram, seeds, ContentDomain, Dataset, DiscreteDistribution, EmpiricalLearner,
    TransformConfig,
};

fn histogram_runs(c: &mut Criterion) {
    let domain = ContentDomain::with_size(10).unwrap();
    let data = DiscreteDistribution::from_unnormalized(domain, (1..=10).map(f64::from).collect()).unwrap();
    let sample = Dataset::draw(&data, 1474, &mut seeds::rng(1));
    let run = |r: usize| {
        private_histogram(&sample, 1.0, 1e-6, r as u64)
            .unwrap()
            .linf_error(&sample)
    };

    let mut group = c.benchmark_group("histogram_runs");
    for n in [100, 1000] {
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| map_indexed_sequential(n, run))
        });
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
            b.iter(|| map_indexed_parallel(n, run))
        });
    }
    group.finish();
}

fn transform_releases(c: &mut Criterion) {
    let domain = ContentDomain::with_size(8).unwrap();
    let data = DiscreteDistribution::from_unnormalized(domain, (1..=8).rev().map(f64::from).collect()).unwrap();
    let config = TransformConfig::new(1.0, 1e-6, 0.1, 20).unwrap();
    let sample = Dataset::draw(&data, config.m_priv, &mut seeds::rng(2));
    let models = fit_shards(&EmpiricalLearner::new(1.0).unwrap(), &sample, &config).unwrap();
    let run = |r: usize| release(&models, &config, r as u64, seeds::derive(2, "noise", r as u64)).unwrap();

    let mut group = c.benchmark_group("transform_releases");
    group.sample_size(20);
    group.bench_function("sequential", |b| b.iter(|| map_indexed_sequential(200, run)));
    group.bench_function("parallel", |b| b.iter(|| map_indexed_parallel(200, run)));
    group.finish();
}

fn coupling_pairs(c: &mut Criterion) {
    let mut rng = seeds::rng(3);
    let domain = ContentDomain::with_size(8).unwrap();
    let pairs: Vec<_> = (0..32)
        .map(|_| {
            let mut draw = || {
                let w = (0..domain.len()).map(|_| rng.random::<f64>() + 1e-3).collect();
                DiscreteDistribution::from_unnormalized(domain.clone(), w).unwrap()
            };
            (draw(), draw())
        })
        .collect();
    let run = |i: usize| disagreement_estimate(&pairs[i].0, &pairs[i].1, 10_000, i as u64).unwrap();

    let mut group = c.benchmark_group("coupling_pairs");
    group.bench_function("sequential", |b| b.iter(|| map_indexed_sequential(pairs.len(), run)));
    group.bench_function("parallel", |b| b.iter(|| map_indexed_parallel(pairs.len(), run)));
    group.finish();
}

criterion_group!(benches, histogram_runs, transform_releases, coupling_pairs);
criterion_main!(benches);

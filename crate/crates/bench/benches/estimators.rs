use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fofreg_core::simulation::{generate_dataset, replication_errors, rng_for};
use fofreg_core::{
    cv_single, eigendecompose, empirical_covariance, fit_double, fit_single, DgpConfig, Estimator,
};
use std::hint::black_box;

fn dataset(n: usize) -> fofreg_core::simulation::SimDataset {
    let cfg = DgpConfig {
        n,
        ..DgpConfig::new(1.2, 3.0, 3.0)
    };
    generate_dataset(&cfg, &mut rng_for(1, 0)).unwrap()
}

fn bench_fpca(c: &mut Criterion) {
    let mut group = c.benchmark_group("fpca");
    for n in [400, 3200] {
        let ds = dataset(n);
        group.bench_with_input(BenchmarkId::new("covariance+eigen", n), &ds, |b, ds| {
            b.iter(|| {
                let k = empirical_covariance(black_box(&ds.xs)).unwrap();
                eigendecompose(&k, 20).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_fit(c: &mut Criterion) {
    let ds = dataset(1000);
    c.bench_function("fit_single/m=8", |b| {
        b.iter(|| fit_single(black_box(&ds.xs), black_box(&ds.ys), 8).unwrap())
    });
    c.bench_function("fit_double/m=8,8", |b| {
        b.iter(|| fit_double(black_box(&ds.xs), black_box(&ds.ys), 8, 8).unwrap())
    });
    c.bench_function("replication_errors/20", |b| {
        b.iter(|| {
            replication_errors(black_box(&ds), 20, &[Estimator::Single, Estimator::Double]).unwrap()
        })
    });
}

fn bench_cv(c: &mut Criterion) {
    let ds = dataset(100);
    let cands: Vec<usize> = (1..=10).collect();
    let mut group = c.benchmark_group("cv");
    group.sample_size(10);
    group.bench_function("cv_single/n=100", |b| {
        b.iter(|| cv_single(black_box(&ds.xs), black_box(&ds.ys), &cands).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_fpca, bench_fit, bench_cv);
criterion_main!(benches);

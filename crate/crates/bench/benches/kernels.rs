use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kmfix_core::bounds::{rho_typical, sigma_typical};
use kmfix_core::gmm::sample_model;
use kmfix_core::lloyd::{init_random_partition, is_fixed_point, run_lloyd};
use kmfix_core::reduce::pca_fit;
use kmfix_core::rng::{derive_stream, instance_stream};
use kmfix_core::{Dataset, Init, LabelMode, ModelParams};

fn dataset(d: usize, n: usize) -> Dataset {
    let params = ModelParams::two_clusters(d, n, 25.0).unwrap();
    sample_model(&mut derive_stream(1, 0), &params, LabelMode::Balanced).unwrap()
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_model");
    for d in [64, 1024, 4096] {
        let params = ModelParams::two_clusters(d, 40, 25.0).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(d), &params, |b, p| {
            let mut rep = 0;
            b.iter(|| {
                rep += 1;
                let mut s = instance_stream(7, "bench", 0, rep);
                black_box(sample_model(&mut s, p, LabelMode::Balanced).unwrap())
            })
        });
    }
    g.finish();
}

fn lloyd(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_lloyd");
    for d in [64, 1024] {
        let ds = dataset(d, 40);
        g.bench_with_input(BenchmarkId::from_parameter(d), &ds, |b, ds| {
            b.iter(|| {
                let mut s = derive_stream(3, 0);
                let init = Init::Partition(init_random_partition(&mut s, ds.n(), 2).unwrap());
                black_box(run_lloyd(ds, init, 500).unwrap())
            })
        });
    }
    g.finish();
}

fn fixed_point(c: &mut Criterion) {
    let ds = dataset(4096, 40);
    let truth = ds.true_assignment().clone();
    c.bench_function("is_fixed_point/4096", |b| b.iter(|| black_box(is_fixed_point(&ds, &truth).unwrap())));
}

fn pca(c: &mut Criterion) {
    let mut g = c.benchmark_group("pca_fit");
    for d in [16, 1024] {
        let ds = dataset(d, 40);
        g.bench_with_input(BenchmarkId::from_parameter(d), &ds, |b, ds| b.iter(|| black_box(pca_fit(ds, 4).unwrap())));
    }
    g.finish();
}

fn bounds(c: &mut Criterion) {
    c.bench_function("rho_typical", |b| {
        b.iter(|| {
            let sigma = sigma_typical(black_box(1.25), 40, 2.0).unwrap();
            black_box(rho_typical(sigma, 40, 2.0))
        })
    });
}

criterion_group!(benches, sampling, lloyd, fixed_point, pca, bounds);
criterion_main!(benches);

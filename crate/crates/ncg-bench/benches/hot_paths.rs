use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use ncg_bench::{model, random_dataset, random_queries};
use ncg_core::regions::{build_subvoronoi, build_uniform_ball};
use ncg_core::stats::{chi2_uniform, welch_t_one_sided};
use ncg_core::theoremsim::{trial, TheoremWorld};
use ncg_core::trainer::trades_loss;
use ncg_core::{rng, NNIndex};

fn bench_nearest_batch(c: &mut Criterion) {
    let ds = random_dataset(500, 16, 4, 1);
    let index = NNIndex::new(&ds);
    let queries = random_queries(100, 16, 2);
    c.bench_function("nearest_batch 500x16 100q", |b| {
        b.iter(|| index.nearest_batch(black_box(&queries)).unwrap())
    });
}

fn bench_build_subvoronoi(c: &mut Criterion) {
    let ds = random_dataset(600, 2, 3, 3);
    c.bench_function("build_subvoronoi n=600 m=50", |b| {
        b.iter(|| build_subvoronoi(black_box(&ds), 17, 50, 1.0, 7).unwrap())
    });
}

fn bench_region_project(c: &mut Criterion) {
    let ds = random_dataset(600, 2, 3, 3);
    let region = build_subvoronoi(&ds, 17, 50, 1.0, 7).unwrap();
    let queries = random_queries(1, 2, 4);
    c.bench_function("subvoronoi project", |b| {
        b.iter(|| region.project(black_box(&queries[0])).unwrap())
    });
}

fn bench_trades_loss(c: &mut Criterion) {
    let ds = random_dataset(64, 2, 2, 5);
    let net = model(2, 2, 6);
    let regions: Vec<_> = (0..ds.n())
        .map(|i| build_uniform_ball(&ds, i, 0.5).unwrap())
        .collect();
    c.bench_function("trades_loss batch=64 T=10", |b| {
        b.iter(|| {
            trades_loss(
                black_box(&net),
                &ds.points,
                &ds.labels,
                &regions,
                6.0,
                10,
                11,
            )
            .unwrap()
        })
    });
}

fn bench_theorem_trial(c: &mut Criterion) {
    let world = TheoremWorld::new(10, 5, 0.05).unwrap();
    c.bench_function("theorem trial C=10 d=5", |b| {
        b.iter(|| {
            let mut r = rng::substream(black_box(9), rng::STREAM_GEN);
            trial(&world, &mut r, 100).unwrap()
        })
    });
}

fn bench_stats(c: &mut Criterion) {
    let counts = [103u64, 97, 95, 108, 97];
    let a: Vec<f64> = (0..200).map(|i| (i as f64 * 0.7).sin()).collect();
    let b: Vec<f64> = (0..180).map(|i| (i as f64 * 0.3).cos() * 0.9).collect();
    c.bench_function("chi2_uniform k=5", |bch| {
        bch.iter(|| chi2_uniform(black_box(&counts), 0.05).unwrap())
    });
    c.bench_function("welch_t 200v180", |bch| {
        bch.iter(|| welch_t_one_sided(black_box(&a), black_box(&b), 0.05).unwrap())
    });
}

criterion_group!(
    benches,
    bench_nearest_batch,
    bench_build_subvoronoi,
    bench_region_project,
    bench_trades_loss,
    bench_theorem_trial,
    bench_stats
);
criterion_main!(benches);

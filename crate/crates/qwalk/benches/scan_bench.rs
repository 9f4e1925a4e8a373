//! Benchmarks for the three scan-shaped hot paths: dense fidelity grids,
//! corpus sweeps, and edge-subset searches. With the `parallel` feature the
//! same binary times the rayon path against a one-thread pool, so the
//! sequential fallback's cost is visible without a separate build; without
//! the feature only the sequential numbers exist.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use qwalk::closed_forms::perturbation_search;
use qwalk::corpus::run_default_corpus;
use qwalk::families;
use qwalk::spectral::eigendecompose_default;
use qwalk::transfer::fidelity_curve;
use qwalk::{PureState, QParameter};

fn curve_workload() -> impl Fn() -> usize {
    let fi = families::cycle_with_tail(8, 1).unwrap();
    let q = QParameter::new(0.5).unwrap();
    let d = eigendecompose_default(&fi.graph.q_laplacian(q)).unwrap();
    let n = fi.graph.n();
    let x = PureState::vertex(n, 0).unwrap();
    let y = PureState::vertex(n, 4).unwrap();
    move || fidelity_curve(&d, &x, &y, 50.0, 20_000).unwrap().len()
}

fn corpus_workload() -> impl Fn() -> usize {
    || run_default_corpus().unwrap().len()
}

fn search_workload() -> impl Fn() -> usize {
    let base = families::cycle(8).unwrap().graph;
    let q = QParameter::new(1.0).unwrap();
    move || perturbation_search(&base, 2, &[], q, 10.0).unwrap().len()
}

#[cfg(feature = "parallel")]
fn bench_scans(c: &mut Criterion) {
    let cores = std::thread::available_parallelism().map_or(4, |n| n.get());
    let full = rayon::ThreadPoolBuilder::new().num_threads(cores).build().unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();

    let curve = curve_workload();
    let mut g = c.benchmark_group("fidelity_curve_20k");
    g.bench_function("rayon_full", |b| b.iter(|| full.install(|| black_box(curve()))));
    g.bench_function("one_thread", |b| b.iter(|| single.install(|| black_box(curve()))));
    g.finish();

    let corpus = corpus_workload();
    let mut g = c.benchmark_group("default_corpus");
    g.sample_size(20);
    g.bench_function("rayon_full", |b| b.iter(|| full.install(|| black_box(corpus()))));
    g.bench_function("one_thread", |b| b.iter(|| single.install(|| black_box(corpus()))));
    g.finish();

    let search = search_workload();
    let mut g = c.benchmark_group("two_edge_search_c8");
    g.sample_size(10);
    g.bench_function("rayon_full", |b| b.iter(|| full.install(|| black_box(search()))));
    g.bench_function("one_thread", |b| b.iter(|| single.install(|| black_box(search()))));
    g.finish();
}

#[cfg(not(feature = "parallel"))]
fn bench_scans(c: &mut Criterion) {
    let curve = curve_workload();
    c.benchmark_group("fidelity_curve_20k")
        .bench_function("sequential", |b| b.iter(|| black_box(curve())));

    let corpus = corpus_workload();
    let mut g = c.benchmark_group("default_corpus");
    g.sample_size(20);
    g.bench_function("sequential", |b| b.iter(|| black_box(corpus())));
    g.finish();

    let search = search_workload();
    let mut g = c.benchmark_group("two_edge_search_c8");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| black_box(search())));
    g.finish();
}

criterion_group!(scans, bench_scans);
criterion_main!(scans);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use dscom_bench::fixture;
use dscom_core::baselines::{celf_greedy, rl_ris_select};
use dscom_core::community::{
    normalized_laplacian, spectral_cluster, spectral_embedding, symmetrized_similarity,
};
use dscom_core::seeds::{community_select, pagerank, Measure, DAMPING, PAGERANK_TOLERANCE};
use dscom_core::{estimate_influence, NodeSet};

fn simulation(c: &mut Criterion) {
    let f = fixture(1000);
    let seeds = NodeSet::new(0..10);
    c.bench_function("estimate_influence n=1000 R=1000", |b| {
        b.iter(|| estimate_influence(&f.graph, &f.model, black_box(&seeds), 1000, 1, 3).unwrap())
    });
}

fn centrality(c: &mut Criterion) {
    let mut group = c.benchmark_group("pagerank");
    for n in [300, 1000, 3000] {
        let f = fixture(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &f.graph, |b, g| {
            b.iter(|| pagerank(g, DAMPING, PAGERANK_TOLERANCE).unwrap())
        });
    }
    group.finish();
}

fn clustering(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral");
    group.sample_size(10);
    for n in [300, 1000] {
        let f = fixture(n);
        let l = normalized_laplacian(&symmetrized_similarity(&f.weights));
        group.bench_with_input(BenchmarkId::new("eigen", n), &l, |b, l| {
            b.iter(|| spectral_embedding(l, 10).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("cluster k=10", n), &f.weights, |b, w| {
            b.iter(|| spectral_cluster(w, 10, 5).unwrap())
        });
    }
    group.finish();
}

fn selection(c: &mut Criterion) {
    let mut group = c.benchmark_group("select k=10 n=1000");
    group.sample_size(10);
    let f = fixture(1000);
    group.bench_function("D-PR", |b| {
        b.iter(|| community_select(&f.graph, &f.weights, 10, Measure::Pagerank, 5).unwrap())
    });
    group.bench_function("celf R=1000", |b| {
        b.iter(|| celf_greedy(&f.graph, &f.model, 10, 1000, 5).unwrap())
    });
    group.bench_function("rl-ris theta=1e5", |b| {
        b.iter(|| rl_ris_select(&f.graph, &f.weights, 10, 100_000, 5).unwrap())
    });
    group.finish();
}

criterion_group!(benches, simulation, centrality, clustering, selection);
criterion_main!(benches);

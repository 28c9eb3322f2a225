//! Customization with the task tree on several threads against the sequential
//! bottom-up pass. Build with `--no-default-features` to time the sequential
//! fallback for every thread count.

use std::time::Duration;

use catchup::contraction::contract;
use catchup::customization::{customize, Params};
use catchup::hierarchy::{build_elimination_tree, compute_order};
use catchup::oracle::{generate, GeneratorParams, Topology};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn thread_counts() -> Vec<usize> {
    let max = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut out = vec![1, 2, 4, max];
    out.sort_unstable();
    out.dedup();
    out
}

fn bench_customization(c: &mut Criterion) {
    let gp = GeneratorParams { topology: Topology::Planar, n: 2000, td_fraction: 0.3, seed: 1, ..Default::default() };
    let g = generate(&gp);
    let order = compute_order(&g, gp.seed);
    let aug = contract(&g, &order);
    let etree = build_elimination_tree(&aug);
    let mut group = c.benchmark_group("customization");
    group.sample_size(10).measurement_time(Duration::from_secs(10));
    for threads in thread_counts() {
        let params = Params { beta: 1000, epsilon: 1.0, threads };
        group.bench_with_input(BenchmarkId::new("threads", threads), &params, |b, params| b.iter(|| customize(&aug, &etree, &g, params)));
    }
    group.finish();
}

criterion_group!(benches, bench_customization);
criterion_main!(benches);

//! Query batches on one thread against several, and the four query modes
//! against each other on one thread.

use std::time::Duration;

use catchup::customization::Params;
use catchup::hierarchy::compute_order;
use catchup::index::CatchupIndex;
use catchup::oracle::{generate, uniform_queries, GeneratorParams, TdDijkstra, Topology};
use catchup::query::{batch, Mode, Server};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn setup() -> CatchupIndex {
    let gp = GeneratorParams { topology: Topology::Planar, n: 3000, td_fraction: 0.3, seed: 2, ..Default::default() };
    let g = generate(&gp);
    let order = compute_order(&g, gp.seed);
    CatchupIndex::build(g, &order, &Params { beta: 1000, epsilon: 1.0, threads: 1 }).0
}

fn bench_queries(c: &mut Criterion) {
    let index = setup();
    let queries = uniform_queries(index.graph(), 3, 400);

    let mut group = c.benchmark_group("query_batch");
    group.throughput(Throughput::Elements(queries.len() as u64)).measurement_time(Duration::from_secs(5));
    let max = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut counts = vec![1, 2, 4, max];
    counts.sort_unstable();
    counts.dedup();
    for threads in counts {
        group.bench_with_input(BenchmarkId::new("threads", threads), &threads, |b, &threads| {
            b.iter(|| {
                batch(&index, &queries, threads, |server, q| {
                    server.set_verify_termination(false);
                    server.ea_query(q.source, q.target, q.departure).map(|r| r.earliest_arrival)
                })
            })
        });
    }
    group.finish();

    let mut group = c.benchmark_group("query_mode");
    group.throughput(Throughput::Elements(queries.len() as u64)).measurement_time(Duration::from_secs(5));
    for mode in [Mode::Corridor, Mode::Lazy, Mode::LazyAstar] {
        let mut server = Server::new(&index);
        server.set_verify_termination(false);
        group.bench_function(format!("{mode:?}"), |b| b.iter(|| queries.iter().map(|q| server.query(q.source, q.target, q.departure, mode).unwrap().earliest_arrival).sum::<f64>()));
    }
    let mut dijkstra = TdDijkstra::new(index.graph());
    group.bench_function("td_dijkstra", |b| b.iter(|| queries.iter().map(|q| dijkstra.query(q.source, q.target, q.departure)).filter(|x| x.is_finite()).sum::<f64>()));
    group.finish();
}

criterion_group!(benches, bench_queries);
criterion_main!(benches);

//! Acceptance checks, one line per criterion. Runs without the test harness so
//! that the summary is always printed; exits non-zero if any criterion fails.

mod common;

use std::collections::BinaryHeap;
use std::cmp::Reverse;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use catchup::graph::{NodeId, TdGraph};
use catchup::index::CatchupIndex;
use catchup::oracle::{td_profile_dijkstra, uniform_queries, GeneratorParams, TdDijkstra, Topology, PROFILE_BUDGET};
use catchup::query::{Mode, ProfileWant, Server};
use catchup::ttf::{bound_pair, Point, Profile, Ttf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{build, same, PERIOD};

type Outcome = Result<String, String>;

const SETTINGS: [(usize, f64); 3] = [(8, 0.1), (1000, 1.0), (usize::MAX, 1.0)];

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Instances of the exactness suite: every size and time-dependent fraction,
/// grids and paths only where customization stays cheap.
fn suite_instances() -> Vec<GeneratorParams> {
    let mut out = Vec::new();
    let mut seed = 100;
    let mut add = |topology, n, td_fraction| {
        seed += 1;
        out.push(GeneratorParams { topology, n, td_fraction, seed, ..Default::default() });
    };
    for td in [0.0, 0.3, 0.75] {
        for topology in [Topology::Grid, Topology::Planar, Topology::Path] {
            add(topology, 100, td);
        }
        for topology in [Topology::Grid, Topology::Planar] {
            add(topology, 1000, td);
        }
        add(Topology::Planar, 10_000, td);
    }
    add(Topology::Path, 1000, 0.75);
    add(Topology::Planar, 10_000, 0.3);
    out
}

#[derive(Default)]
struct SuiteResult {
    instances: usize,
    queries: usize,
    ea_mismatches: Vec<String>,
    finite: usize,
    path_mismatches: Vec<String>,
    arcs_compared: usize,
    invariance_mismatches: Vec<String>,
    time: Duration,
}

fn compare_customizations(a: &CatchupIndex, b: &CatchupIndex, what: &str, out: &mut Vec<String>) {
    let (ca, cb) = (a.customized(), b.customized());
    for arc in 0..ca.lower.len() as u32 {
        let mut bad = ca.removed[arc as usize] != cb.removed[arc as usize] || !same(a.lower(arc), b.lower(arc)) || !same(a.upper(arc), b.upper(arc));
        let (xa, xb) = (a.expansions(arc), b.expansions(arc));
        bad |= xa.len() != xb.len() || xa.iter().zip(xb).any(|(x, y)| (x.first, x.second) != (y.first, y.second) || (x.start - y.start).abs() > 1e-6);
        if bad {
            out.push(format!("{what} arc {arc}"));
        }
    }
}

/// Criteria 1, 3 and 4 share one pass over the exactness suite.
fn suite() -> &'static SuiteResult {
    static SUITE: OnceLock<SuiteResult> = OnceLock::new();
    SUITE.get_or_init(|| {
        let start = Instant::now();
        let mut r = SuiteResult::default();
        for gp in suite_instances() {
            r.instances += 1;
            let indexes: Vec<CatchupIndex> = SETTINGS.iter().map(|&(beta, eps)| build(&gp, beta, eps, 1)).collect();
            for i in 1..indexes.len() {
                compare_customizations(&indexes[0], &indexes[i], &format!("{gp:?} {:?}", SETTINGS[i]), &mut r.invariance_mismatches);
            }
            r.arcs_compared += indexes[0].customized().lower.len() * (indexes.len() - 1);
            let g = indexes[0].graph();
            let queries = uniform_queries(g, gp.seed, 100);
            let mut dijkstra = TdDijkstra::new(g);
            let expected: Vec<f64> = queries.iter().map(|q| dijkstra.query(q.source, q.target, q.departure)).collect();
            for (index, setting) in indexes.iter().zip(SETTINGS) {
                let mut server = Server::new(index);
                for (q, &exp) in queries.iter().zip(&expected) {
                    r.queries += 1;
                    let got = server.ea_query(q.source, q.target, q.departure).unwrap().earliest_arrival;
                    if !same(got, exp) || server.late_improvement() {
                        r.ea_mismatches.push(format!("n={} td={} {setting:?} {q:?}: {got} vs {exp}", gp.n, gp.td_fraction));
                        continue;
                    }
                    if got.is_finite() {
                        r.finite += 1;
                        let path = server.retrieve_path().unwrap();
                        let tt = g.path_travel_time(&path, q.departure);
                        if !same(q.departure + tt, exp) {
                            r.path_mismatches.push(format!("n={} {setting:?} {q:?}: path {tt} vs {}", gp.n, exp - q.departure));
                        }
                    }
                }
            }
        }
        r.time = start.elapsed();
        r
    })
}

fn first(v: &[String]) -> String {
    v.first().map_or(String::new(), |s| format!(", first: {s}"))
}

fn criterion_1() -> Outcome {
    let r = suite();
    check(
        r.instances >= 20 && r.ea_mismatches.is_empty(),
        format!("{} instances, {} queries over 3 settings, {} mismatches in {:.1}s{}", r.instances, r.queries, r.ea_mismatches.len(), r.time.as_secs_f64(), first(&r.ea_mismatches)),
    )
}

fn criterion_2() -> Outcome {
    let mut sampled_bad = Vec::new();
    let mut sampled = 0;
    for (topology, td, seed) in [(Topology::Planar, 0.3, 21), (Topology::Grid, 0.75, 22)] {
        let index = build(&GeneratorParams { topology, n: 1000, td_fraction: td, seed, ..Default::default() }, 1000, 1.0, 1);
        let g = index.graph();
        let mut server = Server::new(&index);
        let mut dijkstra = TdDijkstra::new(g);
        for q in uniform_queries(g, seed, 50) {
            let out = server.profile_query(q.source, q.target, ProfileWant::ExactTtf).unwrap();
            let profile = out.profile.unwrap();
            sampled += 1;
            for i in 0..256 {
                let dep = i as f64 * PERIOD / 256.0;
                let exp = dijkstra.query(q.source, q.target, dep) - dep;
                let got = profile.eval(dep);
                if !(got == exp || (got - exp).abs() <= 1e-9 * exp.max(1.0)) {
                    sampled_bad.push(format!("{q:?} at {dep}: {got} vs {exp}"));
                    break;
                }
            }
        }
    }
    let mut full_bad = Vec::new();
    let mut full = 0;
    for seed in 0..3 {
        let gp = GeneratorParams { n: 60, td_fraction: 0.75, seed: 30 + seed, topology: if seed == 1 { Topology::Grid } else { Topology::Planar }, ..Default::default() };
        let index = build(&gp, 8, 0.1, 1);
        let mut server = Server::new(&index);
        for q in uniform_queries(index.graph(), seed, 20) {
            full += 1;
            let expected = td_profile_dijkstra(index.graph(), q.source, q.target, PROFILE_BUDGET).unwrap();
            let got = server.profile_query(q.source, q.target, ProfileWant::ExactTtf).unwrap().profile.unwrap();
            match (&got, &expected) {
                (Profile::Ttf(a), Profile::Ttf(e)) => {
                    if let Some(t) = a.points().iter().chain(e.points()).map(|p| p.at).find(|&t| (a.eval(t) - e.eval(t)).abs() > 1e-6) {
                        full_bad.push(format!("{q:?} at {t}: {} vs {}", a.eval(t), e.eval(t)));
                    }
                }
                (a, e) if std::mem::discriminant(a) == std::mem::discriminant(e) => {}
                _ => full_bad.push(format!("{q:?}: {got:?} vs {expected:?}")),
            }
        }
    }
    check(
        sampled_bad.is_empty() && full_bad.is_empty(),
        format!(
            "{sampled} profiles x 256 departures: {} off; {full} full profiles: {} off{}{}",
            sampled_bad.len(),
            full_bad.len(),
            first(&sampled_bad),
            first(&full_bad)
        ),
    )
}

fn criterion_3() -> Outcome {
    let r = suite();
    check(
        r.invariance_mismatches.is_empty(),
        format!("{} arc comparisons of (beta 8, eps 0.1) and (beta 1000, eps 1) against exact: {} differ{}", r.arcs_compared, r.invariance_mismatches.len(), first(&r.invariance_mismatches)),
    )
}

fn criterion_4() -> Outcome {
    let r = suite();
    check(r.path_mismatches.is_empty(), format!("{} finite queries: {} paths off{}", r.finite, r.path_mismatches.len(), first(&r.path_mismatches)))
}

/// Distances from `s` that only pass through nodes ranked below `limit`,
/// forward or on the reversed graph.
fn restricted_dijkstra(g: &TdGraph, rev: &[Vec<(NodeId, u32)>], s: NodeId, limit: Option<u32>, rank: &[u32], backward: bool) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.num_nodes()];
    let mut heap = BinaryHeap::new();
    dist[s as usize] = 0.0;
    heap.push((Reverse(0u64), s));
    while let Some((Reverse(d), u)) = heap.pop() {
        let d = f64::from_bits(d);
        if d > dist[u as usize] {
            continue;
        }
        if u != s && limit.is_some_and(|l| rank[u as usize] >= l) {
            continue;
        }
        let arcs: Vec<(NodeId, u32)> = if backward { rev[u as usize].clone() } else { g.out_arcs(u).collect::<Vec<_>>().into_iter().map(|(a, v)| (v, a)).collect() };
        for (v, a) in arcs {
            let nd = d + g.ttf(a).min();
            if nd < dist[v as usize] {
                dist[v as usize] = nd;
                heap.push((Reverse(nd.to_bits()), v));
            }
        }
    }
    dist
}

fn criterion_5() -> Outcome {
    let mut bad = Vec::new();
    let mut arcs = 0;
    for (topology, seed) in [(Topology::Grid, 51), (Topology::Planar, 52), (Topology::Path, 53)] {
        let index = build(&GeneratorParams { topology, n: 1000, td_fraction: 0.0, seed, ..Default::default() }, 1000, 1.0, 1);
        let g = index.graph();
        let aug = index.aug();
        let order = index.order();
        let rank: Vec<u32> = (0..g.num_nodes() as NodeId).map(|v| order.rank(v)).collect();
        let mut rev = vec![Vec::new(); g.num_nodes()];
        for u in 0..g.num_nodes() as NodeId {
            for (a, v) in g.out_arcs(u) {
                rev[v as usize].push((u, a));
            }
        }
        for r in 0..aug.num_nodes() as u32 {
            let u = order.node(r);
            // through lower ranked nodes only, and unrestricted
            let lower_fw = restricted_dijkstra(g, &rev, u, Some(r), &rank, false);
            let lower_bw = restricted_dijkstra(g, &rev, u, Some(r), &rank, true);
            let full_fw = restricted_dijkstra(g, &rev, u, None, &rank, false);
            let full_bw = restricted_dijkstra(g, &rev, u, None, &rank, true);
            for s in aug.upward_slots(r) {
                let v = order.node(aug.slot_head(s as u32)) as usize;
                for (arc, basic, perfect) in [(2 * s as u32, lower_fw[v], full_fw[v]), (2 * s as u32 + 1, lower_bw[v], full_bw[v])] {
                    arcs += 1;
                    if index.expansions(arc).len() != 1 {
                        bad.push(format!("arc {arc}: {} expansions", index.expansions(arc).len()));
                    }
                    if index.lower(arc) != index.upper(arc) {
                        bad.push(format!("arc {arc}: bounds {} {}", index.lower(arc), index.upper(arc)));
                    }
                    let removable = perfect.is_infinite() || perfect < basic - 1e-9 * basic.max(1.0);
                    let kept = perfect.is_finite() && same(perfect, basic);
                    if removable && !index.removed(arc) || kept && index.removed(arc) {
                        bad.push(format!("arc {arc}: removed {} with distances {perfect} {basic}", index.removed(arc)));
                    } else if !index.removed(arc) && !same(index.lower(arc), perfect) {
                        bad.push(format!("arc {arc}: bound {} vs distance {perfect}", index.lower(arc)));
                    }
                }
            }
        }
    }
    check(bad.is_empty(), format!("{arcs} arcs against scalar distances: {} off{}", bad.len(), first(&bad)))
}

fn large_suite_params() -> GeneratorParams {
    GeneratorParams { topology: Topology::Planar, n: 10_000, td_fraction: 0.3, seed: 61, ..Default::default() }
}

fn large_index() -> &'static CatchupIndex {
    static INDEX: OnceLock<CatchupIndex> = OnceLock::new();
    INDEX.get_or_init(|| build(&large_suite_params(), 1000, 1.0, 1))
}

fn criterion_6() -> Outcome {
    let x = large_index().expansion_stats();
    check(x.mean <= 2.0 && x.single_pct >= 90.0, format!("mean {:.3} expansions per arc (max {}), {:.2}% single", x.mean, x.max, x.single_pct))
}

fn criterion_7() -> Outcome {
    let index = large_index();
    let g = index.graph();
    let queries = uniform_queries(g, 71, 1000);
    let mut server = Server::new(index);
    server.set_verify_termination(false);
    let mut evals = [0u64; 4];
    let mut pops = [0u64; 4];
    let mut times = [Duration::ZERO; 4];
    for (i, mode) in [Mode::Basic, Mode::Corridor, Mode::Lazy, Mode::LazyAstar].into_iter().enumerate() {
        let start = Instant::now();
        for q in &queries {
            let r = server.query(q.source, q.target, q.departure, mode).unwrap();
            evals[i] += r.stats.ttf_evals;
            pops[i] += r.stats.queue_pops;
        }
        times[i] = start.elapsed();
    }
    let mut dijkstra = TdDijkstra::new(g);
    let start = Instant::now();
    for q in &queries {
        dijkstra.query(q.source, q.target, q.departure);
    }
    let dijkstra_time = start.elapsed();
    let speedup = dijkstra_time.as_secs_f64() / times[3].as_secs_f64();
    check(
        evals[0] > evals[1] && evals[1] > evals[2] && pops[2] > pops[3] && speedup >= 5.0,
        format!(
            "evals basic {} > corridor {} > lazy {}; pops lazy {} > A* {}; A* {:.3}s vs Dijkstra {:.3}s ({speedup:.1}x)",
            evals[0],
            evals[1],
            evals[2],
            pops[2],
            pops[3],
            times[3].as_secs_f64(),
            dijkstra_time.as_secs_f64()
        ),
    )
}

fn criterion_8() -> Outcome {
    let f = common::resettle_instance();
    let mut server = Server::new(&f.index);
    server.set_verify_termination(true);
    let r = server.ea_query(f.s, f.t, 0.0).unwrap();
    let path = server.retrieve_node_path().unwrap();
    let pops = server.pop_count(f.w1);
    check(
        r.earliest_arrival == 22.0 && path == f.path && pops >= 2 && !server.late_improvement(),
        format!("distance {}, path {path:?}, w1 popped {pops} times, late improvement {}", r.earliest_arrival, server.late_improvement()),
    )
}

fn criterion_9() -> Outcome {
    let mut differ = Vec::new();
    let mut bytes = 0;
    for (topology, seed) in [(Topology::Planar, 91), (Topology::Grid, 92), (Topology::Planar, 93)] {
        let gp = GeneratorParams { topology, n: 3000, td_fraction: 0.3, seed, ..Default::default() };
        let (mut one, mut eight) = (Vec::new(), Vec::new());
        build(&gp, 1000, 1.0, 1).write_to(&mut one).unwrap();
        build(&gp, 1000, 1.0, 8).write_to(&mut eight).unwrap();
        bytes += one.len();
        if one != eight {
            differ.push(format!("seed {seed}"));
        }
    }
    check(differ.is_empty(), format!("3 seeds, {bytes} bytes, {} differ{}", differ.len(), first(&differ)))
}

fn random_fifo(rng: &mut ChaCha8Rng) -> Ttf {
    let k = rng.gen_range(1..60);
    let base = rng.gen_range(1.0..500.0);
    let spread = rng.gen_range(0.0..2000.0);
    let mut ats: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..PERIOD)).collect();
    ats.push(0.0);
    ats.sort_by(f64::total_cmp);
    ats.dedup_by(|a, b| *a - *b < 1.0);
    let mut vals: Vec<f64> = ats.iter().map(|_| base + rng.gen_range(0.0..=spread)).collect();
    // raise values until every segment including the wrap has slope above -1
    for _ in 0..4 {
        for i in 1..vals.len() {
            vals[i] = vals[i].max(vals[i - 1] - 0.999 * (ats[i] - ats[i - 1]));
        }
        let last = vals.len() - 1;
        vals[0] = vals[0].max(vals[last] - 0.999 * (PERIOD - ats[last]));
    }
    let points: Vec<Point> = ats.iter().zip(&vals).map(|(&at, &val)| Point { at, val }).collect();
    Ttf::new(points, PERIOD).unwrap_or_else(|_| Ttf::constant(base, PERIOD).unwrap())
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut bound_bad = Vec::new();
    for case in 0..100_000 {
        let f = random_fifo(&mut rng);
        let eps = 10f64.powf(rng.gen_range(-3.0..1.5));
        let b = bound_pair(&f, eps);
        if !b.lower.is_fifo() || !b.upper.is_fifo() {
            bound_bad.push(format!("case {case}: bounds not FIFO"));
        }
        for _ in 0..100 {
            let t = rng.gen_range(0.0..PERIOD);
            let (lo, v, hi) = (b.lower.eval(t), f.eval(t), b.upper.eval(t));
            if lo > v + 1e-9 || v > hi + 1e-9 {
                bound_bad.push(format!("case {case} eps {eps} at {t}: {lo} {v} {hi}"));
                break;
            }
        }
    }
    let mut fifo_bad = Vec::new();
    let mut pool: Vec<Ttf> = (0..16).map(|_| random_fifo(&mut rng)).collect();
    for step in 0..10_000 {
        let (i, j) = (rng.gen_range(0..pool.len()), rng.gen_range(0..pool.len()));
        let h = if rng.gen_bool(0.5) { pool[i].link(&pool[j]).unwrap() } else { pool[i].merge(&pool[j]).unwrap().0 };
        if !h.is_fifo() {
            fifo_bad.push(format!("step {step}: min slope {}", h.min_slope()));
        }
        let k = rng.gen_range(0..pool.len());
        pool[k] = if h.len() > 400 || h.max() > 50_000.0 { random_fifo(&mut rng) } else { h };
    }
    check(
        bound_bad.is_empty() && fifo_bad.is_empty(),
        format!("100000 bound pairs: {} off; 10000 compositions: {} not FIFO{}{}", bound_bad.len(), fifo_bad.len(), first(&bound_bad), first(&fifo_bad)),
    )
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 exactness", criterion_1),
        ("2 profile exactness", criterion_2),
        ("3 approximation invariance", criterion_3),
        ("4 path consistency", criterion_4),
        ("5 constant metric", criterion_5),
        ("6 expansion statistics", criterion_6),
        ("7 optimization trends", criterion_7),
        ("8 non-label-setting A*", criterion_8),
        ("9 parallel determinism", criterion_9),
        ("10 bound pair fuzz", criterion_10),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

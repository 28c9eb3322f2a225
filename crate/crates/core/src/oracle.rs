//! Ground truth: plain time-dependent Dijkstra, profile Dijkstra, and the
//! generators for test instances and query sets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{ArcId, NodeId, TdGraph};
use crate::heap::IndexedHeap;
use crate::ttf::{Point, Profile, Ttf, Winner, DEFAULT_PERIOD};

const NO_ARC: u32 = u32::MAX;

/// Earliest arrival search on the input graph with reusable buffers.
#[derive(Debug, Clone)]
pub struct TdDijkstra<'a> {
    g: &'a TdGraph,
    ea: Vec<f64>,
    parent: Vec<ArcId>,
    settled: Vec<bool>,
    touched: Vec<NodeId>,
    heap: IndexedHeap,
    pub pops: u64,
}

impl<'a> TdDijkstra<'a> {
    pub fn new(g: &'a TdGraph) -> Self {
        let n = g.num_nodes();
        TdDijkstra {
            g,
            ea: vec![f64::INFINITY; n],
            parent: vec![NO_ARC; n],
            settled: vec![false; n],
            touched: Vec::new(),
            heap: IndexedHeap::new(n),
            pops: 0,
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.ea[v as usize] = f64::INFINITY;
            self.parent[v as usize] = NO_ARC;
            self.settled[v as usize] = false;
        }
        self.touched.clear();
        self.heap.clear();
        self.pops = 0;
    }

    /// Earliest arrival at `t` when leaving `s` at `departure`; infinite if unreachable.
    pub fn query(&mut self, s: NodeId, t: NodeId, departure: f64) -> f64 {
        self.run(s, Some(t), departure, |_| {});
        self.ea[t as usize]
    }

    /// Search from `s`, stopping once `target` is settled; `on_settle` sees nodes in settle order.
    pub fn run(&mut self, s: NodeId, target: Option<NodeId>, departure: f64, mut on_settle: impl FnMut(NodeId)) {
        self.reset();
        self.ea[s as usize] = departure;
        self.touched.push(s);
        self.heap.push_or_update(s, departure);
        while let Some((ea, v)) = self.heap.pop() {
            self.pops += 1;
            self.settled[v as usize] = true;
            on_settle(v);
            if Some(v) == target {
                return;
            }
            for (arc, w) in self.g.out_arcs(v) {
                let arrival = ea + self.g.ttf(arc).eval(ea);
                if self.settled[w as usize] {
                    debug_assert!(arrival >= self.ea[w as usize] - 1e-9, "settled node {w} improved");
                    continue;
                }
                if arrival < self.ea[w as usize] {
                    if self.ea[w as usize].is_infinite() {
                        self.touched.push(w);
                    }
                    self.ea[w as usize] = arrival;
                    self.parent[w as usize] = arc;
                    self.heap.push_or_update(w, arrival);
                }
            }
        }
    }

    pub fn earliest_arrival(&self, v: NodeId) -> f64 {
        self.ea[v as usize]
    }

    /// Input arcs of the path found to `t` by the last search.
    pub fn path(&self, t: NodeId) -> Option<Vec<ArcId>> {
        if self.ea[t as usize].is_infinite() {
            return None;
        }
        let tails = |arc: ArcId| self.g.first_out().partition_point(|&f| f <= arc) as NodeId - 1;
        let mut arcs = Vec::new();
        let mut v = t;
        while self.parent[v as usize] != NO_ARC {
            let arc = self.parent[v as usize];
            arcs.push(arc);
            v = tails(arc);
        }
        arcs.reverse();
        Some(arcs)
    }
}

/// Earliest arrival and path, as a one-off search.
pub fn td_dijkstra(g: &TdGraph, s: NodeId, t: NodeId, departure: f64) -> (f64, Option<Vec<ArcId>>) {
    let mut d = TdDijkstra::new(g);
    let ea = d.query(s, t, departure);
    (ea, d.path(t))
}

/// Scalar Dijkstra distances from `s` with a fixed weight per arc.
pub fn scalar_distances(g: &TdGraph, s: NodeId, weight: impl Fn(ArcId) -> f64) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.num_nodes()];
    let mut heap = IndexedHeap::new(g.num_nodes());
    dist[s as usize] = 0.0;
    heap.push_or_update(s, 0.0);
    while let Some((d, v)) = heap.pop() {
        for (arc, w) in g.out_arcs(v) {
            let nd = d + weight(arc);
            if nd < dist[w as usize] {
                dist[w as usize] = nd;
                heap.push_or_update(w, nd);
            }
        }
    }
    dist
}

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("profile search exceeded its budget of {budget} stored breakpoints")]
    BudgetExceeded { budget: usize },
}

/// Default cap on the number of breakpoints stored by [`td_profile_dijkstra`].
pub const PROFILE_BUDGET: usize = 10_000_000;

/// Travel time profile from `s` to `t` by a label correcting search over functions.
pub fn td_profile_dijkstra(g: &TdGraph, s: NodeId, t: NodeId, budget: usize) -> Result<Profile, ProfileError> {
    if s == t {
        return Ok(Profile::Zero);
    }
    let n = g.num_nodes();
    let mut fns: Vec<Option<Ttf>> = vec![None; n];
    let mut heap = IndexedHeap::new(n);
    let mut stored = 0usize;
    for (arc, w) in g.out_arcs(s) {
        improve(&mut fns, &mut heap, &mut stored, s, w, g.ttf(arc).clone());
    }
    while let Some((key, v)) = heap.pop() {
        if let Some(ft) = &fns[t as usize] {
            if key > ft.max() {
                break;
            }
        }
        if v == t {
            continue;
        }
        let fv = fns[v as usize].clone().expect("queued nodes have functions");
        for (arc, w) in g.out_arcs(v) {
            let cand = fv.link_unchecked(g.ttf(arc));
            improve(&mut fns, &mut heap, &mut stored, s, w, cand);
        }
        if stored > budget {
            return Err(ProfileError::BudgetExceeded { budget });
        }
    }
    Ok(fns[t as usize].take().map_or(Profile::Unreachable, Profile::Ttf))
}

fn improve(fns: &mut [Option<Ttf>], heap: &mut IndexedHeap, stored: &mut usize, s: NodeId, w: NodeId, cand: Ttf) {
    if w == s {
        return;
    }
    let slot = &mut fns[w as usize];
    let updated = match slot {
        None => cand,
        Some(cur) => {
            let (merged, segments) = cur.merge_unchecked(&cand);
            if segments.iter().all(|s| s.winner == Winner::First) {
                return;
            }
            *stored -= cur.len();
            merged
        }
    };
    *stored += updated.len();
    heap.push_or_update(w, updated.min());
    *slot = Some(updated);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Grid,
    Path,
    /// Random points joined to their nearest neighbors.
    Planar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    pub topology: Topology,
    pub n: usize,
    /// Fraction of arcs with a non-constant travel time.
    pub td_fraction: f64,
    /// Inclusive range of breakpoints per time-dependent arc.
    pub breakpoints: (usize, usize),
    /// Peak delay relative to the free flow travel time.
    pub amplitude: f64,
    pub seed: u64,
    pub period: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams { topology: Topology::Grid, n: 1000, td_fraction: 0.3, breakpoints: (10, 40), amplitude: 0.4, seed: 0, period: DEFAULT_PERIOD }
    }
}

/// Free flow travel times are drawn from this range, in seconds.
const BASE_WEIGHT: std::ops::Range<f64> = 10.0..60.0;
const MIN_SLOPE: f64 = -1.0 + 1e-6;

/// Strongly connected instance with bidirectional roads; deterministic per seed.
pub fn generate(params: &GeneratorParams) -> TdGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n.max(1);
    let edges = match params.topology {
        Topology::Grid => grid_edges(n),
        Topology::Path => (1..n as u32).map(|v| (v - 1, v)).collect(),
        Topology::Planar => planar_edges(n, &mut rng),
    };
    let mut arcs = Vec::with_capacity(2 * edges.len());
    for &(a, b) in &edges {
        for (tail, head) in [(a, b), (b, a)] {
            let base = rng.gen_range(BASE_WEIGHT);
            let f = if rng.gen_bool(params.td_fraction.clamp(0.0, 1.0)) {
                rush_hour_ttf(&mut rng, base, params)
            } else {
                Ttf::constant(base, params.period).unwrap()
            };
            arcs.push((tail, head, f));
        }
    }
    TdGraph::from_arcs(n, arcs, params.period).expect("generated arcs are valid")
}

fn grid_edges(n: usize) -> Vec<(u32, u32)> {
    let w = (n as f64).sqrt().ceil() as usize;
    let mut edges = Vec::new();
    for v in 0..n {
        if v % w + 1 < w && v + 1 < n {
            edges.push((v as u32, v as u32 + 1));
        }
        if v + w < n {
            edges.push((v as u32, (v + w) as u32));
        }
    }
    edges
}

/// Each point is joined to its three nearest neighbors; remaining components
/// are joined by their closest pair of points.
fn planar_edges(n: usize, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    const K: usize = 3;
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    let cells = ((n as f64 / 2.0).sqrt().ceil() as usize).max(1);
    let cell_of = |p: (f64, f64)| (((p.0 * cells as f64) as usize).min(cells - 1), ((p.1 * cells as f64) as usize).min(cells - 1));
    let mut buckets = vec![Vec::new(); cells * cells];
    for (i, &p) in pts.iter().enumerate() {
        let (cx, cy) = cell_of(p);
        buckets[cy * cells + cx].push(i as u32);
    }
    let d2 = |a: usize, b: usize| (pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2);
    let mut edges = Vec::new();
    let mut near = Vec::new();
    for i in 0..n {
        let (cx, cy) = cell_of(pts[i]);
        let mut radius = 1;
        loop {
            near.clear();
            for y in cy.saturating_sub(radius)..=(cy + radius).min(cells - 1) {
                for x in cx.saturating_sub(radius)..=(cx + radius).min(cells - 1) {
                    near.extend(buckets[y * cells + x].iter().copied().filter(|&j| j as usize != i));
                }
            }
            // nearest within the window, which is close enough for a generator
            if near.len() >= K || radius >= cells {
                break;
            }
            radius += 1;
        }
        near.sort_by(|&a, &b| d2(i, a as usize).total_cmp(&d2(i, b as usize)).then(a.cmp(&b)));
        for &j in near.iter().take(K) {
            edges.push((i.min(j as usize) as u32, i.max(j as usize) as u32));
        }
    }
    edges.sort_unstable();
    edges.dedup();

    let mut uf: Vec<u32> = (0..n as u32).collect();
    fn find(uf: &mut [u32], mut v: u32) -> u32 {
        while uf[v as usize] != v {
            uf[v as usize] = uf[uf[v as usize] as usize];
            v = uf[v as usize];
        }
        v
    }
    for &(a, b) in &edges {
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        uf[ra as usize] = rb;
    }
    loop {
        let root0 = find(&mut uf, 0);
        let (inside, outside): (Vec<u32>, Vec<u32>) = (0..n as u32).partition(|&v| find(&mut uf, v) == root0);
        if outside.is_empty() {
            break;
        }
        let mut best = (f64::INFINITY, 0, 0);
        for &a in &inside {
            for &b in &outside {
                let d = d2(a as usize, b as usize);
                if d < best.0 {
                    best = (d, a, b);
                }
            }
        }
        let (_, a, b) = best;
        edges.push((a.min(b), a.max(b)));
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        uf[ra as usize] = rb;
    }
    edges
}

/// Delay profile with a morning and an evening peak, randomly scaled and
/// jittered per arc, sampled at random times.
fn rush_hour_ttf(rng: &mut ChaCha8Rng, base: f64, params: &GeneratorParams) -> Ttf {
    let p = params.period;
    let (lo, hi) = params.breakpoints;
    let k = rng.gen_range(lo.max(1)..=hi.max(lo.max(1)));
    let hour = p / 24.0;
    let morning = rng.gen_range(7.0..9.0) * hour;
    let evening = rng.gen_range(16.0..18.5) * hour;
    let width = rng.gen_range(1.0..2.0) * hour;
    let scale = rng.gen_range(0.2..1.0) * params.amplitude * base;
    let bump = |t: f64| {
        let g = |c: f64| {
            let d = (t - c).abs().min(p - (t - c).abs());
            (-(d / width).powi(2)).exp()
        };
        g(morning) + 0.8 * g(evening)
    };
    let mut ats: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..p)).collect();
    ats[0] = 0.0;
    ats.sort_by(f64::total_cmp);
    ats.dedup_by(|a, b| *a - *b < 1.0);
    let mut pts: Vec<Point> = ats.iter().map(|&at| Point::new(at, base + scale * bump(at) * rng.gen_range(0.9..1.1))).collect();
    clamp_fifo(&mut pts, p);
    Ttf::new(pts, p).expect("clamped function is FIFO")
}

/// Raise values until every segment, including the wrap segment, has slope at least `MIN_SLOPE`.
fn clamp_fifo(pts: &mut [Point], period: f64) {
    loop {
        let mut changed = false;
        for i in 0..pts.len() {
            let j = (i + 1) % pts.len();
            let next_at = if j == 0 { period } else { pts[j].at };
            let min_next = pts[i].val + MIN_SLOPE * (next_at - pts[i].at);
            if pts[j].val < min_next {
                pts[j].val = min_next;
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuerySpec {
    pub source: NodeId,
    pub target: NodeId,
    pub departure: f64,
}

/// Source, target and departure drawn uniformly.
pub fn uniform_queries(g: &TdGraph, seed: u64, count: usize) -> Vec<QuerySpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.num_nodes() as NodeId;
    (0..count)
        .map(|_| QuerySpec { source: rng.gen_range(0..n), target: rng.gen_range(0..n), departure: rng.gen_range(0.0..g.period()) })
        .collect()
}

/// For `count` random sources and departures, the `2^i`-th settled node of a
/// search becomes the target of a query of rank `i`. Entry `i` of the result
/// holds the rank `i` queries.
pub fn dijkstra_rank_queries(g: &TdGraph, seed: u64, count: usize) -> Vec<Vec<QuerySpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut search = TdDijkstra::new(g);
    let mut by_rank: Vec<Vec<QuerySpec>> = Vec::new();
    let mut nodes: Vec<NodeId> = (0..g.num_nodes() as NodeId).collect();
    nodes.shuffle(&mut rng);
    for &source in nodes.iter().cycle().take(if nodes.is_empty() { 0 } else { count }) {
        let departure = rng.gen_range(0.0..g.period());
        let mut settled = 0usize;
        search.run(source, None, departure, |v| {
            settled += 1;
            if settled.is_power_of_two() {
                let rank = settled.trailing_zeros() as usize;
                if by_rank.len() <= rank {
                    by_rank.resize(rank + 1, Vec::new());
                }
                by_rank[rank].push(QuerySpec { source, target: v, departure });
            }
        });
    }
    by_rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ttf::DEFAULT_PERIOD as P;

    fn c(x: f64) -> Ttf {
        Ttf::constant(x, P).unwrap()
    }

    #[test]
    fn single_arc_and_same_node() {
        let g = TdGraph::from_arcs(2, vec![(0, 1, c(10.0))], P).unwrap();
        assert_eq!(td_dijkstra(&g, 0, 0, 5.0).0, 5.0);
        assert_eq!(td_dijkstra(&g, 0, 1, 5.0), (15.0, Some(vec![0])));
        assert_eq!(td_dijkstra(&g, 1, 0, 5.0), (f64::INFINITY, None));
    }

    #[test]
    fn triangle_against_ttf_algebra() {
        let direct = Ttf::new(vec![Point::new(0.0, 5.0), Point::new(28800.0, 1.0), Point::new(57600.0, 5.0)], P).unwrap();
        let (a, b) = (Ttf::new(vec![Point::new(0.0, 1.0), Point::new(40000.0, 3.0)], P).unwrap(), c(0.5));
        let g = TdGraph::from_arcs(3, vec![(0, 2, direct.clone()), (0, 1, a.clone()), (1, 2, b.clone())], P).unwrap();
        let (expected, _) = direct.merge(&a.link(&b).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let t = rng.gen_range(0.0..P);
            let ea = td_dijkstra(&g, 0, 2, t).0;
            assert!((ea - t - expected.eval(t)).abs() < 1e-9);
        }
        let profile = td_profile_dijkstra(&g, 0, 2, PROFILE_BUDGET).unwrap();
        for p in expected.points() {
            assert!((profile.eval(p.at) - p.val).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_profile_is_scalar_distance() {
        let g = generate(&GeneratorParams { n: 30, td_fraction: 0.0, seed: 3, ..Default::default() });
        let dist = scalar_distances(&g, 0, |a| g.ttf(a).min());
        for t in 1..30 {
            let Profile::Ttf(f) = td_profile_dijkstra(&g, 0, t, PROFILE_BUDGET).unwrap() else { panic!() };
            assert!(f.is_constant());
            assert!((f.min() - dist[t as usize]).abs() < 1e-9);
        }
    }

    #[test]
    fn profile_matches_dijkstra_samples() {
        let g = generate(&GeneratorParams { n: 40, td_fraction: 0.75, seed: 5, ..Default::default() });
        let mut d = TdDijkstra::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let (s, t) = (rng.gen_range(0..40), rng.gen_range(0..40));
            let profile = td_profile_dijkstra(&g, s, t, PROFILE_BUDGET).unwrap();
            for i in 0..256 {
                let dep = i as f64 * P / 256.0;
                let tt = d.query(s, t, dep) - dep;
                assert!((profile.eval(dep) - tt).abs() < 1e-6, "{s}->{t} at {dep}: {} vs {tt}", profile.eval(dep));
            }
        }
    }

    #[test]
    fn profile_budget() {
        let g = generate(&GeneratorParams { n: 40, td_fraction: 1.0, seed: 5, ..Default::default() });
        assert_eq!(td_profile_dijkstra(&g, 0, 39, 10), Err(ProfileError::BudgetExceeded { budget: 10 }));
    }

    #[test]
    fn generator_properties() {
        for topology in [Topology::Grid, Topology::Path, Topology::Planar] {
            let params = GeneratorParams { topology, n: 300, seed: 9, ..Default::default() };
            let g = generate(&params);
            assert!(g.validate().is_empty());
            let mut a = Vec::new();
            let mut b = Vec::new();
            g.write_to(&mut a).unwrap();
            generate(&params).write_to(&mut b).unwrap();
            assert_eq!(a, b);
            assert_eq!(TdGraph::read_from(&mut a.as_slice()).unwrap(), g);
            let reach = scalar_distances(&g, 0, |_| 1.0);
            assert!(reach.iter().all(|d| d.is_finite()), "{topology:?} not connected");
        }
        let g = generate(&GeneratorParams { td_fraction: 0.0, ..Default::default() });
        assert!(g.ttfs().iter().all(Ttf::is_constant));
    }

    #[test]
    fn generated_functions_are_canonical() {
        for seed in 0..10 {
            for amplitude in [0.2, 1.0, 3.0] {
                let g = generate(&GeneratorParams { n: 2000, td_fraction: 1.0, amplitude, seed, ..Default::default() });
                for f in g.ttfs() {
                    assert_eq!(Ttf::new(f.points().to_vec(), f.period()).unwrap().points(), f.points());
                }
            }
        }
    }

    #[test]
    fn rank_queries_on_path() {
        let g = generate(&GeneratorParams { topology: Topology::Path, n: 40, td_fraction: 0.0, ..Default::default() });
        let ranks = dijkstra_rank_queries(&g, 1, 10);
        assert!(ranks.len() <= 6);
        for q in ranks.iter().flatten().filter(|q| q.source == 0) {
            let rank = ranks.iter().position(|r| r.contains(q)).unwrap();
            assert_eq!(q.target as usize, (1 << rank) - 1);
        }
        assert_eq!(ranks, dijkstra_rank_queries(&g, 1, 10));
    }

    #[test]
    fn uniform_queries_in_range() {
        let g = generate(&GeneratorParams { n: 50, ..Default::default() });
        assert!(uniform_queries(&g, 1, 0).is_empty());
        let qs = uniform_queries(&g, 4, 100_000);
        assert!(qs.iter().all(|q| q.source < 50 && q.target < 50 && (0.0..P).contains(&q.departure)));
        assert_eq!(qs[..10], uniform_queries(&g, 4, 10)[..]);
    }
}

//! Customization: scalar bounds, then exact expansions for every arc of the
//! augmented graph, processing arcs by ascending lower endpoint.
//!
//! Travel time functions only exist while they are needed; after a node has
//! been processed the functions of the arcs entering it from below are dropped.
//! With more than one thread, independent subtrees of the elimination tree are
//! processed concurrently.

mod relax;
pub mod scalar;

use std::sync::atomic::{AtomicI64, AtomicU64, Ordering::Relaxed};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

pub use relax::{link, Approximation, ArcFn, ArcState};
pub use scalar::ScalarBounds;

use crate::contraction::{AugmentedGraph, SlotId};
use crate::graph::{ArcId, TdGraph};
use crate::hierarchy::EliminationTree;
use crate::shortcuts::{down, reconstruct, reconstruct_ttf, up, ArcRef, Expansion, ExpansionStore, Scratch, Step, UnpackSource, WithLocal};
use crate::ttf::{plf, Point, Ttf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Breakpoint threshold for approximation; `usize::MAX` for exact functions only.
    pub beta: usize,
    pub epsilon: f64,
    pub threads: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params { beta: 1000, epsilon: 1.0, threads: 1 }
    }
}

impl Params {
    pub fn approximation(&self) -> Approximation {
        Approximation { beta: self.beta, epsilon: self.epsilon }
    }
}

/// Operation counters, shared by all workers.
#[derive(Debug, Default)]
pub struct Counters {
    pub triangles: AtomicU64,
    pub links: AtomicU64,
    pub link_prunes: AtomicU64,
    pub merge_prunes: AtomicU64,
    pub dominance_scans: AtomicU64,
    pub merges: AtomicU64,
    pub approximations: AtomicU64,
    pub reconstruction_calls: AtomicU64,
    live_fns: AtomicI64,
    peak_live_fns: AtomicI64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CounterSnapshot {
    pub triangles: u64,
    pub links: u64,
    pub link_prunes: u64,
    pub merge_prunes: u64,
    pub dominance_scans: u64,
    pub merges: u64,
    pub approximations: u64,
    pub reconstruction_calls: u64,
    pub peak_live_fns: u64,
}

impl Counters {
    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            triangles: self.triangles.load(Relaxed),
            links: self.links.load(Relaxed),
            link_prunes: self.link_prunes.load(Relaxed),
            merge_prunes: self.merge_prunes.load(Relaxed),
            dominance_scans: self.dominance_scans.load(Relaxed),
            merges: self.merges.load(Relaxed),
            approximations: self.approximations.load(Relaxed),
            reconstruction_calls: self.reconstruction_calls.load(Relaxed),
            peak_live_fns: self.peak_live_fns.load(Relaxed) as u64,
        }
    }

    fn fn_created(&self) {
        let live = self.live_fns.fetch_add(1, Relaxed) + 1;
        self.peak_live_fns.fetch_max(live, Relaxed);
    }

    fn fn_dropped(&self) {
        self.live_fns.fetch_sub(1, Relaxed);
    }
}

/// Result of customization, indexed by directed arc id (see [`up`] and [`down`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Customized {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub removed: Vec<bool>,
    pub expansions: ExpansionStore,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub counters: CounterSnapshot,
    pub scalar_time: Duration,
    pub td_time: Duration,
}

struct Ctx<'a> {
    aug: &'a AugmentedGraph,
    graph: &'a TdGraph,
    bounds: &'a ScalarBounds,
    approx: Approximation,
    fns: Vec<Mutex<Option<Arc<ArcFn>>>>,
    steps: Vec<OnceLock<Vec<Expansion>>>,
    max_tt: Vec<OnceLock<f64>>,
    counters: Counters,
}

impl UnpackSource for Ctx<'_> {
    fn period(&self) -> f64 {
        self.graph.period()
    }

    fn input_ttf(&self, arc: ArcId) -> &Ttf {
        self.graph.ttf(arc)
    }

    fn num_steps(&self, arc: ArcRef) -> usize {
        match arc {
            ArcRef::Shortcut(a) => self.finished(a).len(),
            _ => unreachable!("no local arcs during customization"),
        }
    }

    fn step(&self, arc: ArcRef, i: usize) -> (f64, Step) {
        match arc {
            ArcRef::Shortcut(a) => {
                let e = self.finished(a)[i];
                (e.start, e.step())
            }
            _ => unreachable!("no local arcs during customization"),
        }
    }
}

impl Ctx<'_> {
    fn finished(&self, arc: u32) -> &[Expansion] {
        self.steps[arc as usize].get().expect("lower arcs are customized first")
    }

    fn func(&self, arc: u32) -> Option<Arc<ArcFn>> {
        self.fns[arc as usize].lock().unwrap().clone()
    }

    /// Process all upward arcs of `u` and drop functions no longer needed.
    fn process_node(&self, u: u32, parallel_arcs: bool) {
        let arcs: Vec<u32> = self.aug.upward_slots(u).flat_map(|s| [up(s as u32), down(s as u32)]).collect();
        let work = |&arc: &u32| {
            let mut scratch = Scratch::new();
            let mut triangles = Vec::new();
            self.process_arc(u, arc, &mut triangles, &mut scratch);
        };
        if parallel_arcs {
            par::for_each(&arcs, work);
        } else {
            arcs.iter().for_each(work);
        }
        let (_, slots) = self.aug.downward(u);
        for &s in slots {
            for arc in [up(s), down(s)] {
                if self.fns[arc as usize].lock().unwrap().take().is_some() {
                    self.counters.fn_dropped();
                }
            }
        }
    }

    fn process_arc(&self, u: u32, arc: u32, triangles: &mut Vec<(u32, SlotId, SlotId)>, scratch: &mut Scratch) {
        let slot = arc / 2;
        let b = self.bounds;
        let state = if b.removed[arc as usize] {
            ArcState::no_path()
        } else {
            let inputs = if arc.is_multiple_of(2) { self.aug.up_inputs(slot) } else { self.aug.down_inputs(slot) };
            let mut state = ArcState::default();
            for &a in inputs {
                let f = ArcFn::Exact(self.graph.ttf(a).clone());
                state.relax(f, Step::Single(ArcRef::Input(a)), f64::INFINITY, self, self.approx, &self.counters, scratch);
            }
            self.aug.lower_triangles(u, self.aug.slot_head(slot), triangles);
            // (first arc, second arc, middle node) in the direction of `arc`
            let mut candidates: Vec<(f64, u32, u32, u32)> = triangles
                .iter()
                .map(|&(w, s_wu, s_wv)| {
                    let (first, second) = if arc.is_multiple_of(2) { (down(s_wu), up(s_wv)) } else { (down(s_wv), up(s_wu)) };
                    (b.own_min[first as usize] + b.own_min[second as usize], w, first, second)
                })
                .filter(|c| c.0.is_finite())
                .collect();
            candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            let own_max = b.own_max[arc as usize];
            for &(lb, _, first, second) in &candidates {
                self.counters.triangles.fetch_add(1, Relaxed);
                let current_max = state.func.as_ref().map_or(f64::INFINITY, |f| f.upper().max());
                if own_max < lb || current_max <= lb {
                    self.counters.link_prunes.fetch_add(1, Relaxed);
                    continue;
                }
                let (Some(f1), Some(f2)) = (self.func(first), self.func(second)) else {
                    unreachable!("arcs with finite bounds have functions");
                };
                self.counters.links.fetch_add(1, Relaxed);
                let linked = link(&f1, &f2);
                let step = Step::Pair(ArcRef::Shortcut(first), ArcRef::Shortcut(second));
                state.relax(linked, step, own_max, self, self.approx, &self.counters, scratch);
            }
            if state.func.is_none() {
                ArcState::no_path()
            } else {
                state
            }
        };

        let mut state = state;
        refine_switches(self, &mut state.steps, scratch);
        let max_tt = match &state.func {
            None => f64::INFINITY,
            Some(ArcFn::Exact(f)) => f.max(),
            Some(ArcFn::Approx(bp)) => {
                if b.perfect_max[arc as usize] <= bp.lower.max() {
                    b.perfect_max[arc as usize]
                } else {
                    let tmp: Vec<Expansion> = state.steps.iter().map(|&(t, s)| Expansion::from_step(t, s)).collect();
                    let view = Single { base: self, arc, steps: &tmp };
                    reconstruct_ttf(&view, ArcRef::Shortcut(arc), scratch, None).map_or(f64::INFINITY, |f| f.max())
                }
            }
        };
        let expansions = state.steps.iter().map(|&(t, s)| Expansion::from_step(t, s)).collect();
        self.max_tt[arc as usize].set(max_tt).unwrap();
        self.steps[arc as usize].set(expansions).expect("each arc is customized once");
        if let Some(f) = state.func {
            *self.fns[arc as usize].lock().unwrap() = Some(Arc::new(f));
            self.counters.fn_created();
        }
    }
}

/// Half width of the window around a switch in which it is recomputed.
const REFINE_WINDOW: f64 = 0.5;

/// Recompute every switch time between two paths as the crossing of their
/// reconstructed functions closest to the current switch. The result only
/// depends on the expansions of lower arcs, not on how the functions of this
/// arc were obtained, so it is the same with or without approximation.
fn refine_switches<S: UnpackSource + ?Sized>(src: &S, steps: &mut [(f64, Step)], scratch: &mut Scratch) {
    let (mut fa, mut fb) = (Vec::new(), Vec::new());
    for i in 1..steps.len() {
        let (t, b) = steps[i];
        let a = steps[i - 1].1;
        if a == Step::None || b == Step::None {
            continue;
        }
        let locals = [vec![(0.0, a)], vec![(0.0, b)]];
        let view = WithLocal { base: src, locals: &locals, offset: 0 };
        let (lo, hi) = (t - REFINE_WINDOW, t + REFINE_WINDOW);
        fa.clear();
        fb.clear();
        if !reconstruct(&view, ArcRef::Local(0), lo, hi, &mut fa, scratch, None) || !reconstruct(&view, ArcRef::Local(1), lo, hi, &mut fb, scratch, None) {
            continue;
        }
        let next = steps.get(i + 1).map_or(src.period(), |s| s.0);
        if let Some(x) = crossing_near(&fa, &fb, t) {
            if x > steps[i - 1].0 && x < next {
                steps[i].0 = x;
            }
        }
    }
}

/// Time closest to `t` where `f - g` changes from at most zero to positive.
fn crossing_near(f: &[Point], g: &[Point], t: f64) -> Option<f64> {
    let mut times: Vec<f64> = f.iter().chain(g).map(|p| p.at).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let d = |x: f64| plf::eval(f, x) - plf::eval(g, x);
    let mut best: Option<f64> = None;
    for w in times.windows(2) {
        let (d0, d1) = (d(w[0]), d(w[1]));
        if d0 <= 0.0 && d1 > 0.0 {
            let x = w[0] + (w[1] - w[0]) * (-d0 / (d1 - d0));
            if best.is_none_or(|b| (x - t).abs() < (b - t).abs()) {
                best = Some(x);
            }
        }
    }
    best
}

/// View of the customization state where one arc is not yet published.
struct Single<'a, 'b> {
    base: &'a Ctx<'b>,
    arc: u32,
    steps: &'a [Expansion],
}

impl UnpackSource for Single<'_, '_> {
    fn period(&self) -> f64 {
        self.base.period()
    }

    fn input_ttf(&self, arc: ArcId) -> &Ttf {
        self.base.input_ttf(arc)
    }

    fn num_steps(&self, arc: ArcRef) -> usize {
        match arc {
            ArcRef::Shortcut(a) if a == self.arc => self.steps.len(),
            _ => self.base.num_steps(arc),
        }
    }

    fn step(&self, arc: ArcRef, i: usize) -> (f64, Step) {
        match arc {
            ArcRef::Shortcut(a) if a == self.arc => (self.steps[i].start, self.steps[i].step()),
            _ => self.base.step(arc, i),
        }
    }
}

/// Run the full customization.
pub fn customize(aug: &AugmentedGraph, etree: &EliminationTree, graph: &TdGraph, params: &Params) -> (Customized, Report) {
    let start = Instant::now();
    let bounds = scalar::precustomize(aug, graph);
    let scalar_time = start.elapsed();
    let start = Instant::now();
    let arcs = 2 * aug.num_slots();
    let ctx = Ctx {
        aug,
        graph,
        bounds: &bounds,
        approx: params.approximation(),
        fns: (0..arcs).map(|_| Mutex::new(None)).collect(),
        steps: (0..arcs).map(|_| OnceLock::new()).collect(),
        max_tt: (0..arcs).map(|_| OnceLock::new()).collect(),
        counters: Counters::default(),
    };
    if params.threads > 1 && par::ENABLED {
        let tree = TaskTree::new(etree, params.threads);
        par::run_with_threads(params.threads, || tree.run_roots(&ctx));
    } else {
        for u in 0..aug.num_nodes() as u32 {
            ctx.process_node(u, false);
        }
    }
    let td_time = start.elapsed();
    let counters = ctx.counters.snapshot();

    let mut lower = Vec::with_capacity(arcs);
    let mut upper = Vec::with_capacity(arcs);
    let mut removed = Vec::with_capacity(arcs);
    let mut first = Vec::with_capacity(arcs + 1);
    let mut entries = Vec::new();
    first.push(0);
    for (arc, (steps, max_tt)) in ctx.steps.into_iter().zip(ctx.max_tt).enumerate() {
        let steps = steps.into_inner().unwrap();
        let max_tt = max_tt.into_inner().unwrap();
        let gone = bounds.removed[arc] || !max_tt.is_finite();
        removed.push(gone);
        if gone {
            lower.push(f64::INFINITY);
            upper.push(f64::INFINITY);
            entries.push(Expansion::no_path(0.0));
        } else {
            lower.push(bounds.perfect_min[arc]);
            upper.push(bounds.perfect_max[arc].min(max_tt));
            entries.extend(steps);
        }
        first.push(entries.len() as u32);
    }
    let customized = Customized { lower, upper, removed, expansions: ExpansionStore { first, entries } };
    log::debug!("customized {arcs} arcs with {} threads: scalar {scalar_time:?}, time-dependent {td_time:?}, {} expansions", params.threads, customized.expansions.entries.len());
    (customized, Report { counters, scalar_time, td_time })
}

/// Schedule derived from the elimination tree: subtrees below a size threshold
/// run sequentially, larger ones process their children concurrently first.
struct TaskTree {
    children: Vec<Vec<u32>>,
    size: Vec<usize>,
    roots: Vec<u32>,
    threshold: usize,
}

/// Tuning factor of the sequential threshold `n / (ALPHA * threads)`.
const ALPHA: usize = 32;

impl TaskTree {
    fn new(etree: &EliminationTree, threads: usize) -> Self {
        let n = etree.parents().len();
        let children = etree.children();
        let size = etree.subtree_sizes();
        let roots = (0..n as u32).filter(|&r| etree.parent(r).is_none()).collect();
        TaskTree { children, size, roots, threshold: (n / (ALPHA * threads)).max(1) }
    }

    fn run_roots(&self, ctx: &Ctx) {
        par::for_each(&self.roots, |&r| self.run(ctx, r));
    }

    fn run(&self, ctx: &Ctx, root: u32) {
        if self.size[root as usize] < self.threshold {
            let mut nodes = vec![root];
            let mut i = 0;
            while i < nodes.len() {
                nodes.extend_from_slice(&self.children[nodes[i] as usize]);
                i += 1;
            }
            nodes.sort_unstable();
            for u in nodes {
                ctx.process_node(u, false);
            }
            return;
        }
        // a chain of nodes with a single large child is processed top down after its bottom
        let mut chain = vec![root];
        let mut v = root;
        while let [only] = self.children[v as usize][..] {
            if self.size[only as usize] < self.threshold {
                break;
            }
            v = only;
            chain.push(v);
        }
        par::for_each(&self.children[v as usize], |&c| self.run(ctx, c));
        for &u in chain.iter().rev() {
            ctx.process_node(u, true);
        }
    }
}

#[cfg(feature = "parallel")]
pub(crate) mod par {
    use rayon::prelude::*;

    pub const ENABLED: bool = true;

    pub fn for_each<T: Sync>(items: &[T], f: impl Fn(&T) + Sync + Send) {
        items.par_iter().for_each(f);
    }

    pub fn run_with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        pool.install(f)
    }

    pub fn join<A: Send, B: Send>(a: impl FnOnce() -> A + Send, b: impl FnOnce() -> B + Send) -> (A, B) {
        rayon::join(a, b)
    }

    pub fn map_chunks<T: Sync, R: Send>(items: &[T], chunk: usize, f: impl Fn(&[T]) -> Vec<R> + Sync + Send) -> Vec<R> {
        items.par_chunks(chunk.max(1)).map(f).collect::<Vec<_>>().into_iter().flatten().collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) mod par {
    pub const ENABLED: bool = false;

    pub fn for_each<T: Sync>(items: &[T], f: impl Fn(&T) + Sync + Send) {
        items.iter().for_each(f);
    }

    pub fn run_with_threads<R: Send>(_threads: usize, f: impl FnOnce() -> R + Send) -> R {
        f()
    }

    pub fn join<A: Send, B: Send>(a: impl FnOnce() -> A + Send, b: impl FnOnce() -> B + Send) -> (A, B) {
        (a(), b())
    }

    pub fn map_chunks<T: Sync, R: Send>(items: &[T], _chunk: usize, f: impl Fn(&[T]) -> Vec<R> + Sync + Send) -> Vec<R> {
        f(items)
    }
}

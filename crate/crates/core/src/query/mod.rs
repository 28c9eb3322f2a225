//! Earliest arrival and profile queries on a customized index.
//!
//! Every query starts with the elimination tree interval query: both search
//! spaces are scanned bottom up with scalar bounds, and the arcs that can be
//! part of a fastest path at some departure time form the corridor. The
//! earliest arrival queries then run a Dijkstra variant on the corridor.

mod profile;

use std::fmt;

use thiserror::Error;

pub use profile::{ProfileOutput, ProfileWant};

use crate::customization::par;
use crate::graph::{ArcId, NodeId};
use crate::heap::IndexedHeap;
use crate::index::CatchupIndex;
use crate::oracle::QuerySpec;
use crate::shortcuts::{down, eval_with, unpack_path, up, ArcRef, Scratch, Step, UnpackSource};
use crate::ttf::TIE_EPS;

/// Slack for comparing sums of scalar bounds against each other.
const BOUND_EPS: f64 = TIE_EPS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Dijkstra on both complete search spaces, evaluating shortcuts fully.
    Basic,
    /// Dijkstra on the corridor, evaluating shortcuts fully.
    Corridor,
    /// Corridor with shortcuts unpacked one input arc at a time.
    Lazy,
    /// Lazy unpacking ordered by arrival plus a lower bound to the target.
    LazyAstar,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Basic => "basic",
            Mode::Corridor => "corridor",
            Mode::Lazy => "lazy",
            Mode::LazyAstar => "lazy-astar",
        })
    }
}

/// A label of the interval query: `node` reached from `parent` over the
/// directed arc `arc` with the given scalar bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Label {
    pub node: u32,
    pub parent: u32,
    pub arc: u32,
    pub lower: f64,
    pub upper: f64,
}

/// Result of the interval query. Nodes are ranks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corridor {
    pub source: u32,
    pub target: u32,
    /// Bounds of the travel time over all departures.
    pub lower: f64,
    pub upper: f64,
    /// Labels of both searches that survived pruning.
    pub fw_labels: Vec<Label>,
    pub bw_labels: Vec<Label>,
    pub meeting: Vec<u32>,
    /// Corridor nodes, ascending.
    pub fw_nodes: Vec<u32>,
    pub bw_nodes: Vec<u32>,
    /// Corridor arcs as `(tail, head, arc)`: upward arcs towards the meeting
    /// nodes and downward arcs from them to the target.
    pub fw_arcs: Vec<(u32, u32, u32)>,
    pub bw_arcs: Vec<(u32, u32, u32)>,
    /// Complete search spaces, ascending.
    pub fw_space: Vec<u32>,
    pub bw_space: Vec<u32>,
}

impl Corridor {
    pub fn num_arcs(&self) -> usize {
        self.fw_arcs.len() + self.bw_arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meeting.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub queue_pops: u64,
    /// Input travel time function evaluations.
    pub ttf_evals: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryResult {
    /// Absolute earliest arrival, infinite if the target is unreachable.
    pub earliest_arrival: f64,
    pub departure: f64,
    pub stats: QueryStats,
}

impl QueryResult {
    pub fn travel_time(&self) -> f64 {
        self.earliest_arrival - self.departure
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("no query has been run")]
    NoQuery,
    #[error("target is unreachable, there is no path")]
    Unreachable,
    #[error("node {0} out of range")]
    Node(NodeId),
}

/// Per node state of the search, indexed by rank.
#[derive(Debug, Clone)]
struct NodeState {
    fw_lower: Vec<f64>,
    fw_upper: Vec<f64>,
    bw_lower: Vec<f64>,
    bw_upper: Vec<f64>,
    fw_allow: Vec<f64>,
    bw_allow: Vec<f64>,
    in_fw: Vec<bool>,
    in_bw: Vec<bool>,
    ea: Vec<f64>,
    parent: Vec<(u32, ArcRef)>,
    potential: Vec<f64>,
    /// Popped with its current arrival, so new outgoing arcs are relaxed right away.
    done: Vec<bool>,
    pops: Vec<u32>,
    out: Vec<Vec<u32>>,
    touched: Vec<u32>,
    seen: Vec<bool>,
}

impl NodeState {
    fn new(n: usize) -> Self {
        let inf = vec![f64::INFINITY; n];
        NodeState {
            fw_lower: inf.clone(),
            fw_upper: inf.clone(),
            bw_lower: inf.clone(),
            bw_upper: inf.clone(),
            fw_allow: vec![f64::NEG_INFINITY; n],
            bw_allow: vec![f64::NEG_INFINITY; n],
            in_fw: vec![false; n],
            in_bw: vec![false; n],
            ea: inf.clone(),
            parent: vec![(u32::MAX, ArcRef::Input(u32::MAX)); n],
            potential: inf,
            done: vec![false; n],
            pops: vec![0; n],
            out: vec![Vec::new(); n],
            touched: Vec::new(),
            seen: vec![false; n],
        }
    }

    fn touch(&mut self, v: u32) {
        if !self.seen[v as usize] {
            self.seen[v as usize] = true;
            self.touched.push(v);
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            let v = v as usize;
            self.fw_lower[v] = f64::INFINITY;
            self.fw_upper[v] = f64::INFINITY;
            self.bw_lower[v] = f64::INFINITY;
            self.bw_upper[v] = f64::INFINITY;
            self.fw_allow[v] = f64::NEG_INFINITY;
            self.bw_allow[v] = f64::NEG_INFINITY;
            self.in_fw[v] = false;
            self.in_bw[v] = false;
            self.ea[v] = f64::INFINITY;
            self.parent[v] = (u32::MAX, ArcRef::Input(u32::MAX));
            self.potential[v] = f64::INFINITY;
            self.done[v] = false;
            self.pops[v] = 0;
            self.out[v].clear();
            self.seen[v] = false;
        }
        self.touched.clear();
    }
}

/// Query engine with reusable per-query buffers. Many servers may share one index.
pub struct Server<'a> {
    index: &'a CatchupIndex,
    slot_tails: Vec<u32>,
    state: NodeState,
    corridor: Corridor,
    heap: IndexedHeap,
    scratch: Scratch,
    arc_stamp: Vec<u32>,
    generation: u32,
    work: Vec<(u32, u32)>,
    last: Option<(u32, u32, QueryResult)>,
    verify_termination: bool,
    late_improvement: bool,
}

impl<'a> Server<'a> {
    pub fn new(index: &'a CatchupIndex) -> Self {
        let n = index.graph().num_nodes();
        Server {
            index,
            slot_tails: index.aug().slot_tails(),
            state: NodeState::new(n),
            corridor: Corridor::default(),
            heap: IndexedHeap::new(n),
            scratch: Scratch::new(),
            arc_stamp: vec![0; 2 * index.aug().num_slots()],
            generation: 0,
            work: Vec::new(),
            last: None,
            verify_termination: cfg!(debug_assertions),
            late_improvement: false,
        }
    }

    pub fn index(&self) -> &'a CatchupIndex {
        self.index
    }

    /// Keep searching after the target is popped in the A* query and record
    /// whether its arrival still improves. On by default in debug builds, where
    /// an improvement fails an assertion.
    pub fn set_verify_termination(&mut self, on: bool) {
        self.verify_termination = on;
    }

    /// Whether the last verified A* query saw the target improve after it was popped.
    pub fn late_improvement(&self) -> bool {
        self.late_improvement
    }

    pub fn corridor(&self) -> &Corridor {
        &self.corridor
    }

    /// How often the node was popped in the last query.
    pub fn pop_count(&self, node: NodeId) -> u32 {
        self.state.pops[self.index.order().rank(node) as usize]
    }

    fn check_node(&self, v: NodeId) -> Result<u32, QueryError> {
        if (v as usize) < self.index.graph().num_nodes() {
            Ok(self.index.order().rank(v))
        } else {
            Err(QueryError::Node(v))
        }
    }

    #[inline]
    fn arc_tail(&self, arc: u32) -> u32 {
        let slot = arc / 2;
        if arc.is_multiple_of(2) {
            self.slot_tails[slot as usize]
        } else {
            self.index.aug().slot_head(slot)
        }
    }

    #[inline]
    fn arc_head(&self, arc: u32) -> u32 {
        let slot = arc / 2;
        if arc.is_multiple_of(2) {
            self.index.aug().slot_head(slot)
        } else {
            self.slot_tails[slot as usize]
        }
    }

    /// Elimination tree interval query between two nodes (original ids).
    pub fn interval_query(&mut self, s: NodeId, t: NodeId) -> Result<&Corridor, QueryError> {
        let (rs, rt) = (self.check_node(s)?, self.check_node(t)?);
        self.state.reset();
        self.run_interval_query(rs, rt);
        Ok(&self.corridor)
    }

    fn run_interval_query(&mut self, rs: u32, rt: u32) {
        let index = self.index;
        let aug = index.aug();
        let etree = index.etree();
        let st = &mut self.state;
        let c = &mut self.corridor;
        c.source = rs;
        c.target = rt;
        for v in [&mut c.fw_labels, &mut c.bw_labels] {
            v.clear();
        }
        for v in [&mut c.meeting, &mut c.fw_nodes, &mut c.bw_nodes, &mut c.fw_space, &mut c.bw_space] {
            v.clear();
        }
        c.fw_arcs.clear();
        c.bw_arcs.clear();
        c.fw_space.extend(etree.ancestors(rs));
        c.bw_space.extend(etree.ancestors(rt));
        for &v in &c.fw_space {
            st.touch(v);
            st.in_fw[v as usize] = true;
        }
        for &v in &c.bw_space {
            st.touch(v);
            st.in_bw[v as usize] = true;
        }
        st.fw_lower[rs as usize] = 0.0;
        st.fw_upper[rs as usize] = 0.0;
        st.bw_lower[rt as usize] = 0.0;
        st.bw_upper[rt as usize] = 0.0;

        let mut mu = f64::INFINITY;
        let (mut i, mut j) = (0, 0);
        let (fs, bs) = (&c.fw_space, &c.bw_space);
        while i < fs.len() || j < bs.len() {
            let u = match (fs.get(i), bs.get(j)) {
                (Some(&a), Some(&b)) => a.min(b),
                (Some(&a), None) => a,
                (None, Some(&b)) => b,
                (None, None) => unreachable!(),
            };
            if fs.get(i) == Some(&u) {
                i += 1;
            }
            if bs.get(j) == Some(&u) {
                j += 1;
            }
            let ui = u as usize;
            if st.in_fw[ui] && st.in_bw[ui] {
                mu = mu.min(st.fw_upper[ui] + st.bw_upper[ui]);
            }
            if st.in_fw[ui] && st.fw_lower[ui] <= mu + BOUND_EPS {
                for s in aug.upward_slots(u) {
                    let (arc, v) = (up(s as u32), aug.slot_head(s as u32));
                    if index.removed(arc) {
                        continue;
                    }
                    let (lo, hi) = (st.fw_lower[ui] + index.lower(arc), st.fw_upper[ui] + index.upper(arc));
                    let vi = v as usize;
                    st.fw_lower[vi] = st.fw_lower[vi].min(lo);
                    st.fw_upper[vi] = st.fw_upper[vi].min(hi);
                    c.fw_labels.push(Label { node: v, parent: u, arc, lower: lo, upper: hi });
                }
            }
            if st.in_bw[ui] && st.bw_lower[ui] <= mu + BOUND_EPS {
                for s in aug.upward_slots(u) {
                    let (arc, v) = (down(s as u32), aug.slot_head(s as u32));
                    if index.removed(arc) {
                        continue;
                    }
                    let (lo, hi) = (st.bw_lower[ui] + index.lower(arc), st.bw_upper[ui] + index.upper(arc));
                    let vi = v as usize;
                    st.bw_lower[vi] = st.bw_lower[vi].min(lo);
                    st.bw_upper[vi] = st.bw_upper[vi].min(hi);
                    c.bw_labels.push(Label { node: v, parent: u, arc, lower: lo, upper: hi });
                }
            }
        }

        c.upper = mu;
        c.lower = f64::INFINITY;
        if mu.is_infinite() {
            c.fw_labels.clear();
            c.bw_labels.clear();
            return;
        }
        for &m in &c.fw_space {
            let mi = m as usize;
            let lo = st.fw_lower[mi] + st.bw_lower[mi];
            if st.in_bw[mi] && lo <= mu + BOUND_EPS {
                c.meeting.push(m);
                c.lower = c.lower.min(lo);
                st.fw_allow[mi] = mu - st.bw_lower[mi];
                st.bw_allow[mi] = mu - st.fw_lower[mi];
            }
        }
        // A label can only be on a fastest path if it fits below the upper bound of its node.
        c.fw_labels.retain(|l| l.lower <= st.fw_upper[l.node as usize] + BOUND_EPS);
        c.bw_labels.retain(|l| l.lower <= st.bw_upper[l.node as usize] + BOUND_EPS);
        // labels grouped by node, highest first; stable so insertion order decides ties
        c.fw_labels.sort_by(|a, b| b.node.cmp(&a.node));
        c.bw_labels.sort_by(|a, b| b.node.cmp(&a.node));
        mark(&c.fw_labels, &mut st.fw_allow, &st.fw_lower, index, &mut c.fw_arcs, false);
        mark(&c.bw_labels, &mut st.bw_allow, &st.bw_lower, index, &mut c.bw_arcs, true);
        c.fw_nodes.extend(c.fw_space.iter().filter(|&&v| st.fw_allow[v as usize] >= st.fw_lower[v as usize] - BOUND_EPS));
        c.bw_nodes.extend(c.bw_space.iter().filter(|&&v| st.bw_allow[v as usize] >= st.bw_lower[v as usize] - BOUND_EPS));
    }

    /// Earliest arrival from `s` to `t` departing at `departure` with the fully optimized query.
    pub fn ea_query(&mut self, s: NodeId, t: NodeId, departure: f64) -> Result<QueryResult, QueryError> {
        self.query(s, t, departure, Mode::LazyAstar)
    }

    pub fn ea_query_basic(&mut self, s: NodeId, t: NodeId, departure: f64) -> Result<QueryResult, QueryError> {
        self.query(s, t, departure, Mode::Basic)
    }

    pub fn query(&mut self, s: NodeId, t: NodeId, departure: f64, mode: Mode) -> Result<QueryResult, QueryError> {
        let (rs, rt) = (self.check_node(s)?, self.check_node(t)?);
        self.state.reset();
        self.heap.clear();
        self.scratch.evals = 0;
        self.late_improvement = false;
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.arc_stamp.iter_mut().for_each(|x| *x = 0);
            self.generation = 1;
        }
        let mut stats = QueryStats::default();
        if rs == rt {
            self.state.touch(rs);
            self.state.ea[rs as usize] = departure;
            let result = QueryResult { earliest_arrival: departure, departure, stats };
            self.last = Some((rs, rt, result));
            return Ok(result);
        }
        self.run_interval_query(rs, rt);
        self.build_graph(mode);
        if mode == Mode::LazyAstar {
            self.init_potentials();
        }
        let st = &mut self.state;
        st.ea[rs as usize] = departure;
        st.touch(rs);
        if mode != Mode::LazyAstar || st.potential[rs as usize].is_finite() {
            let key = if mode == Mode::LazyAstar { departure + st.potential[rs as usize] } else { departure };
            self.heap.push_or_update(rs, key);
        }
        let mut target_ea = None;
        let mut counted = None;
        while let Some((_, u)) = self.heap.pop() {
            stats.queue_pops += 1;
            let ui = u as usize;
            self.state.done[ui] = true;
            self.state.pops[ui] += 1;
            if u == rt {
                if target_ea.is_none() {
                    target_ea = Some(self.state.ea[ui]);
                    stats.ttf_evals = self.scratch.evals;
                    counted = Some(stats);
                }
                if mode == Mode::LazyAstar && self.verify_termination {
                    continue;
                }
                break;
            }
            let ea = self.state.ea[ui];
            let mut k = 0;
            while k < self.state.out[ui].len() {
                let arc = self.state.out[ui][k];
                k += 1;
                self.relax(u, arc, ea, mode);
                self.drain_work(mode);
            }
        }
        let earliest_arrival = self.state.ea[rt as usize];
        if let Some(first) = target_ea {
            self.late_improvement = earliest_arrival < first;
            debug_assert!(!self.late_improvement, "target improved from {first} to {earliest_arrival} after it was popped");
        }
        stats.ttf_evals = self.scratch.evals;
        // work done after the target was popped only serves the check
        let stats = counted.unwrap_or(stats);
        let result = QueryResult { earliest_arrival, departure, stats };
        self.last = Some((rs, rt, result));
        Ok(result)
    }

    /// Adjacency of the query graph: complete search spaces or the corridor.
    fn build_graph(&mut self, mode: Mode) {
        let index = self.index;
        let aug = index.aug();
        let c = &self.corridor;
        if c.is_empty() {
            return;
        }
        let st = &mut self.state;
        let gen = self.generation;
        let mut add = |tail: u32, arc: u32, st: &mut NodeState| {
            if self.arc_stamp[arc as usize] != gen {
                self.arc_stamp[arc as usize] = gen;
                st.out[tail as usize].push(arc);
            }
        };
        if mode == Mode::Basic {
            for &u in &c.fw_space {
                for s in aug.upward_slots(u) {
                    if !index.removed(up(s as u32)) {
                        add(u, up(s as u32), st);
                    }
                }
            }
            for &u in &c.bw_space {
                for s in aug.upward_slots(u) {
                    let v = aug.slot_head(s as u32);
                    st.touch(v);
                    if !index.removed(down(s as u32)) {
                        add(v, down(s as u32), st);
                    }
                }
            }
        } else {
            for &(tail, _, arc) in c.fw_arcs.iter().chain(&c.bw_arcs) {
                add(tail, arc, st);
            }
        }
    }

    fn init_potentials(&mut self) {
        let st = &mut self.state;
        let c = &self.corridor;
        let index = self.index;
        st.potential[c.target as usize] = 0.0;
        // downward arcs are listed by tail, highest first; upward arcs by head, lowest first
        for &(tail, head, arc) in c.bw_arcs.iter().rev() {
            let p = st.potential[head as usize] + index.lower(arc);
            let slot = &mut st.potential[tail as usize];
            *slot = slot.min(p);
        }
        for &(tail, head, arc) in c.fw_arcs.iter().rev() {
            let p = st.potential[head as usize] + index.lower(arc);
            let slot = &mut st.potential[tail as usize];
            *slot = slot.min(p);
        }
    }

    fn relax(&mut self, u: u32, arc: u32, ea: f64, mode: Mode) {
        match mode {
            Mode::Basic | Mode::Corridor => {
                let tt = eval_with(self.index, ArcRef::Shortcut(arc), ea, &mut self.scratch, None);
                let v = self.arc_head(arc);
                self.improve(v, ea + tt, (u, ArcRef::Shortcut(arc)), mode);
            }
            Mode::Lazy | Mode::LazyAstar => {
                let mut cur = arc;
                loop {
                    match self.index.step_at(ArcRef::Shortcut(cur), ea) {
                        Step::None => return,
                        Step::Single(ArcRef::Input(a)) => {
                            self.scratch.evals += 1;
                            let arrival = ea + self.index.graph().ttf(a).eval(ea);
                            let v = self.index.order().rank(self.index.graph().head(a));
                            self.improve(v, arrival, (u, ArcRef::Input(a)), mode);
                            return;
                        }
                        Step::Pair(ArcRef::Shortcut(first), ArcRef::Shortcut(second)) => {
                            let w = self.arc_tail(second);
                            self.add_arc(w, second, mode);
                            cur = first;
                        }
                        other => unreachable!("unexpected step {other:?} in the index"),
                    }
                }
            }
        }
    }

    /// Add an arc found by unpacking to the query graph. The potential of its
    /// tail is updated even if the arc is known, as the head's may have dropped.
    fn add_arc(&mut self, w: u32, arc: u32, mode: Mode) {
        let head = self.arc_head(arc);
        if mode == Mode::LazyAstar {
            let p = self.state.potential[head as usize] + self.index.lower(arc);
            self.min_rule(w, p);
        }
        if self.arc_stamp[arc as usize] == self.generation {
            return;
        }
        self.arc_stamp[arc as usize] = self.generation;
        let st = &mut self.state;
        st.touch(w);
        let wi = w as usize;
        st.out[wi].push(arc);
        if st.done[wi] {
            self.work.push((w, arc));
        }
    }

    fn min_rule(&mut self, w: u32, p: f64) {
        let st = &mut self.state;
        let wi = w as usize;
        st.touch(w);
        if p < st.potential[wi] {
            st.potential[wi] = p;
            if st.ea[wi].is_finite() && !st.done[wi] {
                self.heap.push_or_update(w, st.ea[wi] + p);
            }
        }
    }

    fn drain_work(&mut self, mode: Mode) {
        while let Some((w, arc)) = self.work.pop() {
            let ea = self.state.ea[w as usize];
            self.relax(w, arc, ea, mode);
        }
    }

    fn improve(&mut self, v: u32, arrival: f64, parent: (u32, ArcRef), mode: Mode) {
        let st = &mut self.state;
        let vi = v as usize;
        if arrival >= st.ea[vi] {
            return;
        }
        st.touch(v);
        st.ea[vi] = arrival;
        st.parent[vi] = parent;
        st.done[vi] = false;
        match mode {
            Mode::LazyAstar => {
                if st.potential[vi].is_finite() {
                    self.heap.push_or_update(v, arrival + st.potential[vi]);
                }
            }
            _ => self.heap.push_or_update(v, arrival),
        }
    }

    /// Input arcs of the path found by the last earliest arrival query.
    pub fn retrieve_path(&self) -> Result<Vec<ArcId>, QueryError> {
        let (rs, rt, result) = self.last.ok_or(QueryError::NoQuery)?;
        if result.earliest_arrival.is_infinite() {
            return Err(QueryError::Unreachable);
        }
        let st = &self.state;
        let mut hops = Vec::new();
        let mut v = rt;
        while v != rs {
            let (p, via) = st.parent[v as usize];
            hops.push((st.ea[p as usize], via));
            v = p;
        }
        let mut arcs = Vec::new();
        for &(dep, via) in hops.iter().rev() {
            match via {
                ArcRef::Input(a) => arcs.push(a),
                ArcRef::Shortcut(_) => arcs.extend(unpack_path(self.index, via, dep).expect("finite arrival over a shortcut")),
                ArcRef::Local(_) => unreachable!(),
            }
        }
        Ok(arcs)
    }

    /// Node sequence of the path found by the last query, starting at the source.
    pub fn retrieve_node_path(&self) -> Result<Vec<NodeId>, QueryError> {
        let arcs = self.retrieve_path()?;
        let (rs, ..) = self.last.unwrap();
        let g = self.index.graph();
        let mut nodes = vec![self.index.order().node(rs)];
        nodes.extend(arcs.iter().map(|&a| g.head(a)));
        Ok(nodes)
    }
}

/// Run `f` on every query with one server per chunk of queries, on up to
/// `threads` threads. Results are in query order.
pub fn batch<T: Send>(index: &CatchupIndex, queries: &[QuerySpec], threads: usize, f: impl Fn(&mut Server, &QuerySpec) -> T + Sync + Send) -> Vec<T> {
    let threads = threads.max(1);
    let chunk = queries.len().div_ceil(4 * threads).max(16);
    par::run_with_threads(threads, || {
        par::map_chunks(queries, chunk, |qs| {
            let mut server = Server::new(index);
            qs.iter().map(|q| f(&mut server, q)).collect()
        })
    })
}

/// Mark corridor arcs from the meeting nodes towards the search origin.
/// `allow[v]` is the largest travel time between the origin and `v` that can
/// still be part of a fastest path.
fn mark(labels: &[Label], allow: &mut [f64], lower: &[f64], index: &CatchupIndex, out: &mut Vec<(u32, u32, u32)>, backward: bool) {
    for l in labels {
        let (v, p) = (l.node as usize, l.parent as usize);
        if allow[v] < lower[v] - BOUND_EPS || l.lower > allow[v] + BOUND_EPS {
            continue;
        }
        allow[p] = allow[p].max(allow[v] - index.lower(l.arc));
        if backward {
            out.push((l.node, l.parent, l.arc));
        } else {
            out.push((l.parent, l.node, l.arc));
        }
    }
    // ascending by the higher endpoint for forward arcs
    if !backward {
        out.reverse();
    }
}

//! Profile queries: the travel time function between two nodes for all departures.
//!
//! Four phases: the corridor from the interval query, the functions of the
//! corridor arcs, local shortcuts from the source to every forward corridor
//! node and from every backward corridor node to the target as if both were
//! ranked above everything else, and finally the exact function or the paths
//! of the shortcut between them.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use super::{QueryError, Server};
use crate::customization::par;
use crate::customization::{link, Approximation, ArcFn, ArcState, Counters};
use crate::graph::NodeId;
use crate::index::CatchupIndex;
use crate::shortcuts::{reconstruct_ttf, unpack_paths_profile, ArcRef, PathPiece, ReconstructionCache, Scratch, Step, WithLocal};
use crate::ttf::{bound_pair, BoundPair, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileWant {
    Bounds,
    ExactTtf,
    Paths,
}

#[derive(Debug, Clone)]
pub struct ProfileOutput {
    /// Exact function; `None` if only bounds were requested and the result is approximated.
    pub profile: Option<Profile>,
    /// Bounds of the travel time function, `None` if source and target coincide or are disconnected.
    pub bounds: Option<BoundPair>,
    /// Fastest paths with their departure intervals.
    pub paths: Vec<PathPiece>,
    /// Number of expansions of the shortcut between source and target.
    pub switches: usize,
    pub distinct_paths: usize,
    pub corridor_arcs: usize,
    pub phase_times: [Duration; 4],
}

impl ProfileOutput {
    fn trivial(profile: Profile, phase_times: [Duration; 4]) -> Self {
        ProfileOutput { profile: Some(profile), bounds: None, paths: Vec::new(), switches: 0, distinct_paths: 0, corridor_arcs: 0, phase_times }
    }
}

/// Local shortcuts of one side of the corridor.
struct Side {
    steps: Vec<Vec<(f64, Step)>>,
    fns: Vec<ArcFn>,
}

impl Server<'_> {
    pub fn profile_query(&mut self, s: NodeId, t: NodeId, want: ProfileWant) -> Result<ProfileOutput, QueryError> {
        let (rs, rt) = (self.check_node(s)?, self.check_node(t)?);
        let mut times = [Duration::ZERO; 4];
        if rs == rt {
            return Ok(ProfileOutput::trivial(Profile::Zero, times));
        }
        let index = self.index;
        let period = index.graph().period();
        let approx = index.params().approximation();

        let start = Instant::now();
        self.state.reset();
        self.run_interval_query(rs, rt);
        let c = &self.corridor;
        times[0] = start.elapsed();
        if c.is_empty() {
            return Ok(ProfileOutput::trivial(Profile::Unreachable, times));
        }

        let start = Instant::now();
        let mut arcs: Vec<u32> = c.fw_arcs.iter().chain(&c.bw_arcs).map(|a| a.2).collect();
        // lower arcs first so that higher ones find their parts in the cache
        arcs.sort_by_key(|&a| (index.aug().slot_head(a / 2), a));
        arcs.dedup();
        let mut cache = ReconstructionCache::new();
        let mut scratch = Scratch::new();
        for &a in &arcs {
            let f = reconstruct_ttf(index, ArcRef::Shortcut(a), &mut scratch, Some(&cache)).expect("corridor arcs have paths");
            cache.insert(ArcRef::Shortcut(a), f);
        }
        let arc_fns: HashMap<u32, ArcFn> = arcs
            .iter()
            .map(|&a| {
                let f = cache[&ArcRef::Shortcut(a)].clone();
                let f = if f.len() > approx.beta { ArcFn::Approx(bound_pair(&f, approx.epsilon)) } else { ArcFn::Exact(f) };
                (a, f)
            })
            .collect();
        times[1] = start.elapsed();

        let start = Instant::now();
        let counters = Counters::default();
        let fw_ids: HashMap<u32, u32> = c.fw_nodes.iter().filter(|&&v| v != rs).enumerate().map(|(i, &v)| (v, i as u32)).collect();
        let nf = fw_ids.len() as u32;
        let bw_ids: HashMap<u32, u32> = c.bw_nodes.iter().filter(|&&v| v != rt).enumerate().map(|(i, &v)| (v, nf + i as u32)).collect();
        let (fw, bw) = par::join(
            || forward_side(index, &c.fw_nodes, &c.fw_arcs, rs, &fw_ids, &arc_fns, approx, &counters),
            || backward_side(index, &c.bw_nodes, &c.bw_arcs, rt, &bw_ids, &arc_fns, nf, approx, &counters),
        );
        let mut locals = fw.steps;
        locals.extend(bw.steps);
        let mut state = ArcState::default();
        for &m in &c.meeting {
            let (f, step) = if m == rs {
                let id = bw_ids[&m];
                (bw.fns[(id - nf) as usize].clone(), Step::Single(ArcRef::Local(id)))
            } else if m == rt {
                let id = fw_ids[&m];
                (fw.fns[id as usize].clone(), Step::Single(ArcRef::Local(id)))
            } else {
                let (a, b) = (fw_ids[&m], bw_ids[&m]);
                (link(&fw.fns[a as usize], &bw.fns[(b - nf) as usize]), Step::Pair(ArcRef::Local(a), ArcRef::Local(b)))
            };
            let src = WithLocal { base: index, locals: &locals, offset: 0 };
            state.relax(f, step, f64::INFINITY, &src, approx, &counters, &mut scratch);
        }
        let st_id = locals.len() as u32;
        let switches = state.steps.len();
        let func = state.func.expect("meeting nodes connect source and target");
        locals.push(state.steps);
        times[2] = start.elapsed();

        let start = Instant::now();
        let src = WithLocal { base: index, locals: &locals, offset: 0 };
        let bounds = match &func {
            ArcFn::Exact(f) => BoundPair::exact(f.clone()),
            ArcFn::Approx(b) => b.clone(),
        };
        let profile = match (want, func) {
            (ProfileWant::Bounds, ArcFn::Approx(_)) => None,
            (_, ArcFn::Exact(f)) => Some(Profile::Ttf(f)),
            (_, ArcFn::Approx(_)) => {
                Some(Profile::Ttf(reconstruct_ttf(&src, ArcRef::Local(st_id), &mut scratch, Some(&cache)).expect("finite profile")))
            }
        };
        let paths = if want == ProfileWant::Paths { unpack_paths_profile(&src, ArcRef::Local(st_id), 0.0, period) } else { Vec::new() };
        let mut distinct: Vec<&Vec<u32>> = paths.iter().map(|p| &p.arcs).collect();
        distinct.sort();
        distinct.dedup();
        let distinct_paths = distinct.len();
        times[3] = start.elapsed();
        Ok(ProfileOutput { profile, bounds: Some(bounds), paths, switches, distinct_paths, corridor_arcs: c.num_arcs(), phase_times: times })
    }
}

#[allow(clippy::too_many_arguments)]
fn forward_side(
    index: &CatchupIndex,
    nodes: &[u32],
    arcs: &[(u32, u32, u32)],
    source: u32,
    ids: &HashMap<u32, u32>,
    arc_fns: &HashMap<u32, ArcFn>,
    approx: Approximation,
    counters: &Counters,
) -> Side {
    let mut by_head: HashMap<u32, Vec<(u32, u32)>> = HashMap::new();
    for &(tail, head, arc) in arcs {
        by_head.entry(head).or_default().push((tail, arc));
    }
    let mut side = Side { steps: Vec::new(), fns: Vec::new() };
    let mut scratch = Scratch::new();
    for &x in nodes.iter().filter(|&&v| v != source) {
        let mut state = ArcState::default();
        for &(u, arc) in by_head.get(&x).map_or(&[][..], Vec::as_slice) {
            let (f, step) = if u == source {
                (arc_fns[&arc].clone(), Step::Single(ArcRef::Shortcut(arc)))
            } else {
                let id = ids[&u];
                (link(&side.fns[id as usize], &arc_fns[&arc]), Step::Pair(ArcRef::Local(id), ArcRef::Shortcut(arc)))
            };
            let src = WithLocal { base: index, locals: &side.steps, offset: 0 };
            state.relax(f, step, f64::INFINITY, &src, approx, counters, &mut scratch);
        }
        side.fns.push(state.func.expect("corridor nodes are reachable"));
        side.steps.push(state.steps);
    }
    side
}

#[allow(clippy::too_many_arguments)]
fn backward_side(
    index: &CatchupIndex,
    nodes: &[u32],
    arcs: &[(u32, u32, u32)],
    target: u32,
    ids: &HashMap<u32, u32>,
    arc_fns: &HashMap<u32, ArcFn>,
    offset: u32,
    approx: Approximation,
    counters: &Counters,
) -> Side {
    let mut by_tail: HashMap<u32, Vec<(u32, u32)>> = HashMap::new();
    for &(tail, head, arc) in arcs.iter().rev() {
        by_tail.entry(tail).or_default().push((head, arc));
    }
    let mut side = Side { steps: Vec::new(), fns: Vec::new() };
    let mut scratch = Scratch::new();
    for &x in nodes.iter().filter(|&&v| v != target) {
        let mut state = ArcState::default();
        for &(y, arc) in by_tail.get(&x).map_or(&[][..], Vec::as_slice) {
            let (f, step) = if y == target {
                (arc_fns[&arc].clone(), Step::Single(ArcRef::Shortcut(arc)))
            } else {
                let id = ids[&y];
                (link(&arc_fns[&arc], &side.fns[(id - offset) as usize]), Step::Pair(ArcRef::Shortcut(arc), ArcRef::Local(id)))
            };
            let src = WithLocal { base: index, locals: &side.steps, offset };
            state.relax(f, step, f64::INFINITY, &src, approx, counters, &mut scratch);
        }
        side.fns.push(state.func.expect("corridor nodes reach the target"));
        side.steps.push(state.steps);
    }
    side
}

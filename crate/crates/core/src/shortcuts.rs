//! Time-dependent expansions and the algorithms that unpack them.
//!
//! Every directed arc of the augmented graph stores a cyclic list of
//! expansions. An expansion says, for the time span until the next entry,
//! whether the arc currently stands for an input arc, for the lower triangle
//! through some middle node, or for nothing at all.

use std::collections::HashMap;

use crate::contraction::SlotId;
use crate::graph::ArcId;
use crate::ttf::{plf, Point, Ttf};

pub const INVALID: u32 = u32::MAX;

/// Directed arc id of the up direction of a slot.
#[inline]
pub fn up(slot: SlotId) -> u32 {
    2 * slot
}

/// Directed arc id of the down direction of a slot.
#[inline]
pub fn down(slot: SlotId) -> u32 {
    2 * slot + 1
}

#[inline]
pub fn slot_of(arc: u32) -> SlotId {
    arc / 2
}

#[inline]
pub fn is_down(arc: u32) -> bool {
    arc & 1 == 1
}

/// One timestamped entry. 16 bytes: `start` plus two ids.
///
/// Two valid ids name the lower triangle: `first` is the slot of the arc
/// leaving the tail, traversed downwards, `second` the slot of the arc
/// entering the head, traversed upwards. One valid id names an input arc and
/// two invalid ids mean there is no path.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expansion {
    pub start: f64,
    pub first: u32,
    pub second: u32,
}

const _: () = assert!(std::mem::size_of::<Expansion>() == 16);

impl Expansion {
    pub fn input(start: f64, arc: ArcId) -> Self {
        Expansion { start, first: arc, second: INVALID }
    }

    pub fn triangle(start: f64, first: SlotId, second: SlotId) -> Self {
        Expansion { start, first, second }
    }

    pub fn no_path(start: f64) -> Self {
        Expansion { start, first: INVALID, second: INVALID }
    }

    pub fn step(&self) -> Step {
        match (self.first, self.second) {
            (INVALID, INVALID) => Step::None,
            (a, INVALID) => Step::Single(ArcRef::Input(a)),
            (a, b) => Step::Pair(ArcRef::Shortcut(down(a)), ArcRef::Shortcut(up(b))),
        }
    }

    /// Encode a step owned by a stored arc.
    pub(crate) fn from_step(start: f64, step: Step) -> Self {
        match step {
            Step::None => Self::no_path(start),
            Step::Single(ArcRef::Input(a)) => Self::input(start, a),
            Step::Pair(ArcRef::Shortcut(a), ArcRef::Shortcut(b)) => {
                debug_assert!(is_down(a) && !is_down(b));
                Self::triangle(start, slot_of(a), slot_of(b))
            }
            other => panic!("step {other:?} cannot be stored"),
        }
    }
}

/// Any arc that can be unpacked: an input arc, a stored directed arc of the
/// augmented graph or an arc local to some computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArcRef {
    Input(ArcId),
    Shortcut(u32),
    Local(u32),
}

/// Decoded expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Single(ArcRef),
    Pair(ArcRef, ArcRef),
    None,
}

/// Index of the entry whose cyclic validity interval contains `t` (reduced mod period).
pub fn index_at(len: usize, start: impl Fn(usize) -> f64, t: f64, period: f64) -> usize {
    debug_assert!(len > 0);
    let x = t.rem_euclid(period);
    let (mut lo, mut hi) = (0, len);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if start(mid) <= x {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if lo == 0 {
        len - 1
    } else {
        lo - 1
    }
}

pub fn expansion_at(expansions: &[Expansion], t: f64, period: f64) -> &Expansion {
    &expansions[index_at(expansions.len(), |i| expansions[i].start, t, period)]
}

/// Read access to expansions and input functions.
pub trait UnpackSource {
    fn period(&self) -> f64;
    fn input_ttf(&self, arc: ArcId) -> &Ttf;
    /// Number of entries of a non-input arc.
    fn num_steps(&self, arc: ArcRef) -> usize;
    /// Entry `i` of a non-input arc as `(start, step)`.
    fn step(&self, arc: ArcRef, i: usize) -> (f64, Step);

    fn step_index_at(&self, arc: ArcRef, t: f64) -> usize {
        index_at(self.num_steps(arc), |i| self.step(arc, i).0, t, self.period())
    }

    fn step_at(&self, arc: ArcRef, t: f64) -> Step {
        match arc {
            ArcRef::Input(_) => Step::Single(arc),
            _ => self.step(arc, self.step_index_at(arc, t)).1,
        }
    }
}

/// Scratch space for unpacking; reused between calls and never shrunk.
#[derive(Debug, Default)]
pub struct Scratch {
    stack: Vec<ArcRef>,
    pool: Vec<Vec<Point>>,
    /// Number of input function evaluations so far.
    pub evals: u64,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn take(&mut self) -> Vec<Point> {
        self.pool.pop().unwrap_or_default()
    }

    fn give(&mut self, mut buf: Vec<Point>) {
        buf.clear();
        self.pool.push(buf);
    }
}

/// Travel time of `arc` departing at `t`, or infinity without a path.
/// Input arcs traversed are appended to `path` if given.
pub fn eval_with<S: UnpackSource + ?Sized>(src: &S, arc: ArcRef, t: f64, scratch: &mut Scratch, mut path: Option<&mut Vec<ArcId>>) -> f64 {
    let stack = &mut scratch.stack;
    stack.clear();
    stack.push(arc);
    let mut now = t;
    while let Some(a) = stack.pop() {
        match src.step_at(a, now) {
            Step::Single(ArcRef::Input(id)) => {
                now += src.input_ttf(id).eval(now);
                scratch.evals += 1;
                if let Some(p) = path.as_deref_mut() {
                    p.push(id);
                }
            }
            Step::Single(other) => stack.push(other),
            Step::Pair(first, second) => {
                stack.push(second);
                stack.push(first);
            }
            Step::None => return f64::INFINITY,
        }
    }
    now - t
}

pub fn eval<S: UnpackSource + ?Sized>(src: &S, arc: ArcRef, t: f64) -> f64 {
    eval_with(src, arc, t, &mut Scratch::new(), None)
}

/// Input arcs of the path `arc` stands for at departure `t`; `None` without a path.
pub fn unpack_path<S: UnpackSource + ?Sized>(src: &S, arc: ArcRef, t: f64) -> Option<Vec<ArcId>> {
    let mut path = Vec::new();
    let tt = eval_with(src, arc, t, &mut Scratch::new(), Some(&mut path));
    tt.is_finite().then_some(path)
}

/// Cache of full-period functions of already reconstructed arcs.
pub type ReconstructionCache = HashMap<ArcRef, Ttf>;

/// Append the exact function of `arc` on the absolute time range `[lo, hi]` to `out`.
/// Returns false if the arc has no path.
pub fn reconstruct<S: UnpackSource + ?Sized>(
    src: &S,
    arc: ArcRef,
    lo: f64,
    hi: f64,
    out: &mut Vec<Point>,
    scratch: &mut Scratch,
    cache: Option<&ReconstructionCache>,
) -> bool {
    debug_assert!(lo <= hi, "{lo} > {hi}");
    if let ArcRef::Input(id) = arc {
        src.input_ttf(id).append_range(lo, hi, out);
        return true;
    }
    if let Some(f) = cache.and_then(|c| c.get(&arc)) {
        f.append_range(lo, hi, out);
        return true;
    }
    let mut ok = true;
    for_each_step(src, arc, lo, hi, |a, b, step| {
        if !ok {
            return;
        }
        match step {
            Step::None => ok = false,
            Step::Single(x) => ok = reconstruct(src, x, a, b, out, scratch, cache),
            Step::Pair(p, q) => {
                let mut fp = scratch.take();
                let mut fq = scratch.take();
                let mut linked = scratch.take();
                ok = reconstruct(src, p, a, b, &mut fp, scratch, cache);
                if ok {
                    let (qa, qb) = (fp[0].arrival(), fp.last().unwrap().arrival().max(fp[0].arrival()));
                    ok = reconstruct(src, q, qa, qb, &mut fq, scratch, cache);
                }
                if ok {
                    plf::link(&fp, &fq, &mut linked);
                    for &p in &linked {
                        plf::push_point(out, p);
                    }
                }
                scratch.give(fp);
                scratch.give(fq);
                scratch.give(linked);
            }
        }
    });
    ok
}

/// Full-period function of `arc`, `None` without a path.
pub fn reconstruct_ttf<S: UnpackSource + ?Sized>(src: &S, arc: ArcRef, scratch: &mut Scratch, cache: Option<&ReconstructionCache>) -> Option<Ttf> {
    if let ArcRef::Input(id) = arc {
        return Some(src.input_ttf(id).clone());
    }
    if let Some(f) = cache.and_then(|c| c.get(&arc)) {
        return Some(f.clone());
    }
    let period = src.period();
    let mut out = Vec::new();
    reconstruct(src, arc, 0.0, period, &mut out, scratch, cache).then(|| {
        plf::canonicalize(&mut out);
        Ttf::from_full_partial(out, period)
    })
}

/// Call `f(a, b, step)` for the steps of `arc` active on consecutive pieces `[a, b]` of `[lo, hi]`.
pub(crate) fn for_each_step<S: UnpackSource + ?Sized>(src: &S, arc: ArcRef, lo: f64, hi: f64, mut f: impl FnMut(f64, f64, Step)) {
    let period = src.period();
    let n = src.num_steps(arc);
    let k = (lo / period).floor();
    let x = lo - k * period;
    let mut i = src.step_index_at(arc, x);
    let mut base = if src.step(arc, i).0 <= x { k * period } else { (k - 1.0) * period };
    let mut a = lo;
    loop {
        let end = if i + 1 < n { base + src.step(arc, i + 1).0 } else { base + period + src.step(arc, 0).0 };
        let b = end.min(hi);
        if b > a || (a == lo && b >= hi) {
            f(a, b.max(a), src.step(arc, i).1);
        }
        if b >= hi {
            break;
        }
        a = b;
        i += 1;
        if i == n {
            i = 0;
            base += period;
        }
    }
}

/// A path of input arcs together with the departure interval `[start, end]` where it is used.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPiece {
    pub arcs: Vec<ArcId>,
    pub start: f64,
    pub end: f64,
}

/// Departure time at the start of `arcs` for arriving at their end at `arrival`.
pub fn invert_path<S: UnpackSource + ?Sized>(src: &S, arcs: &[ArcId], arrival: f64) -> f64 {
    arcs.iter().rev().fold(arrival, |t, &a| src.input_ttf(a).invert_arrival(t))
}

/// All paths `arc` stands for during `[lo, hi]` with their validity intervals,
/// which tile `[lo, hi]`. Consecutive identical paths are joined.
pub fn unpack_paths_profile<S: UnpackSource + ?Sized>(src: &S, arc: ArcRef, lo: f64, hi: f64) -> Vec<PathPiece> {
    let mut out: Vec<PathPiece> = Vec::new();
    let push = |piece: PathPiece, out: &mut Vec<PathPiece>| match out.last_mut() {
        Some(last) if last.arcs == piece.arcs => last.end = piece.end,
        _ => out.push(piece),
    };
    if let ArcRef::Input(id) = arc {
        return vec![PathPiece { arcs: vec![id], start: lo, end: hi }];
    }
    for_each_step(src, arc, lo, hi, |a, b, step| match step {
        Step::None => {}
        Step::Single(x) => {
            for p in unpack_paths_profile(src, x, a, b) {
                push(p, &mut out);
            }
        }
        Step::Pair(p, q) => {
            for first in unpack_paths_profile(src, p, a, b) {
                let tt = |t: f64| first.arcs.iter().fold(t, |now, &x| now + src.input_ttf(x).eval(now));
                let (qa, qb) = (tt(first.start), tt(first.end));
                let seconds = unpack_paths_profile(src, q, qa, qb.max(qa));
                let count = seconds.len();
                let mut prev_end = first.start;
                for (j, second) in seconds.into_iter().enumerate() {
                    let end = if j + 1 == count { first.end } else { invert_path(src, &first.arcs, second.end).clamp(prev_end, first.end) };
                    let mut arcs = first.arcs.clone();
                    arcs.extend_from_slice(&second.arcs);
                    push(PathPiece { arcs, start: prev_end, end }, &mut out);
                    prev_end = end;
                }
            }
        }
    });
    out
}

/// Expansions of a stored arc in a flat array.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpansionStore {
    pub first: Vec<u32>,
    pub entries: Vec<Expansion>,
}

impl ExpansionStore {
    #[inline]
    pub fn of(&self, arc: u32) -> &[Expansion] {
        &self.entries[self.first[arc as usize] as usize..self.first[arc as usize + 1] as usize]
    }

    pub fn num_arcs(&self) -> usize {
        self.first.len() - 1
    }
}

/// Steps given as plain lists, for arcs that only exist inside one computation.
pub struct WithLocal<'a, S: ?Sized> {
    pub base: &'a S,
    pub locals: &'a [Vec<(f64, Step)>],
    /// Id of the first local arc.
    pub offset: u32,
}

impl<S: UnpackSource + ?Sized> UnpackSource for WithLocal<'_, S> {
    fn period(&self) -> f64 {
        self.base.period()
    }

    fn input_ttf(&self, arc: ArcId) -> &Ttf {
        self.base.input_ttf(arc)
    }

    fn num_steps(&self, arc: ArcRef) -> usize {
        match arc {
            ArcRef::Local(i) if i >= self.offset && ((i - self.offset) as usize) < self.locals.len() => self.locals[(i - self.offset) as usize].len(),
            _ => self.base.num_steps(arc),
        }
    }

    fn step(&self, arc: ArcRef, i: usize) -> (f64, Step) {
        match arc {
            ArcRef::Local(l) if l >= self.offset && ((l - self.offset) as usize) < self.locals.len() => self.locals[(l - self.offset) as usize][i],
            _ => self.base.step(arc, i),
        }
    }
}

/// Turn winner segments of a merge into steps: `current` where the first argument
/// wins and `candidate` where the second wins. Consecutive equal steps are joined.
pub(crate) fn splice_steps(current: &[(f64, Step)], segments: &[crate::ttf::Segment], candidate: Step, period: f64, out: &mut Vec<(f64, Step)>) {
    use crate::ttf::Winner;
    out.clear();
    let push = |t: f64, s: Step, out: &mut Vec<(f64, Step)>| {
        if out.last().is_none_or(|l| l.1 != s) {
            out.push((t, s));
        }
    };
    for seg in segments {
        match seg.winner {
            Winner::Second => push(seg.start, candidate, out),
            Winner::First => {
                let mut i = index_at(current.len(), |i| current[i].0, seg.start, period);
                push(seg.start, current[i].1, out);
                loop {
                    i += 1;
                    if i >= current.len() || current[i].0 >= seg.end {
                        break;
                    }
                    push(current[i].0, current[i].1, out);
                }
            }
        }
    }
}

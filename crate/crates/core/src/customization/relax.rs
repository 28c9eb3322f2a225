//! Relaxing one arc with candidate paths: linking, pruning and (approximate) merging.

use std::sync::atomic::Ordering::Relaxed;

use super::Counters;
use crate::shortcuts::{reconstruct, splice_steps, ArcRef, Scratch, Step, UnpackSource};
use crate::ttf::{
    approx::{link_bounds_unchecked, overlap_regions_with},
    bound_pair, finalize_segments, plf, BoundPair, Point, Segment, Ttf, Winner, TIE_EPS, TIME_EPS,
};

/// Margin by which a candidate must beat the current function everywhere to replace it outright.
const REPLACE_EPS: f64 = 2.0 * TIE_EPS;
/// Bounds closer than this are treated as overlapping, absorbing rounding in the bound functions.
const WINDOW_EPS: f64 = 4.0 * TIE_EPS;

/// Transient travel time function of an arc.
#[derive(Debug, Clone, PartialEq)]
pub enum ArcFn {
    Exact(Ttf),
    Approx(BoundPair),
}

impl ArcFn {
    pub fn lower(&self) -> &Ttf {
        match self {
            ArcFn::Exact(f) => f,
            ArcFn::Approx(b) => &b.lower,
        }
    }

    pub fn upper(&self) -> &Ttf {
        match self {
            ArcFn::Exact(f) => f,
            ArcFn::Approx(b) => &b.upper,
        }
    }

    pub fn complexity(&self) -> usize {
        self.lower().len().max(self.upper().len())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ArcFn::Exact(_))
    }

    fn bounds(&self) -> BoundPair {
        match self {
            ArcFn::Exact(f) => BoundPair::exact(f.clone()),
            ArcFn::Approx(b) => b.clone(),
        }
    }
}

pub fn link(first: &ArcFn, second: &ArcFn) -> ArcFn {
    match (first, second) {
        (ArcFn::Exact(f), ArcFn::Exact(g)) => ArcFn::Exact(f.link_unchecked(g)),
        _ => ArcFn::Approx(link_bounds_unchecked(&first.bounds(), &second.bounds())),
    }
}

/// Approximation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approximation {
    /// Functions with more breakpoints are approximated; `usize::MAX` disables approximation.
    pub beta: usize,
    pub epsilon: f64,
}

/// An arc being computed: its function and the steps naming the fastest path at each time.
#[derive(Debug, Clone, Default)]
pub struct ArcState {
    pub func: Option<ArcFn>,
    pub steps: Vec<(f64, Step)>,
}

const CURRENT: ArcRef = ArcRef::Local(u32::MAX);
const CANDIDATE: ArcRef = ArcRef::Local(u32::MAX - 1);

/// `base` plus the state being relaxed and the candidate step.
struct Pending<'a, S: ?Sized> {
    base: &'a S,
    current: &'a [(f64, Step)],
    candidate: Step,
}

impl<S: UnpackSource + ?Sized> UnpackSource for Pending<'_, S> {
    fn period(&self) -> f64 {
        self.base.period()
    }

    fn input_ttf(&self, arc: u32) -> &Ttf {
        self.base.input_ttf(arc)
    }

    fn num_steps(&self, arc: ArcRef) -> usize {
        match arc {
            CURRENT => self.current.len(),
            CANDIDATE => 1,
            _ => self.base.num_steps(arc),
        }
    }

    fn step(&self, arc: ArcRef, i: usize) -> (f64, Step) {
        match arc {
            CURRENT => self.current[i],
            CANDIDATE => (0.0, self.candidate),
            _ => self.base.step(arc, i),
        }
    }
}

impl ArcState {
    /// State of a single path given by `step` with function `func`.
    pub fn single(func: ArcFn, step: Step) -> Self {
        ArcState { func: Some(func), steps: vec![(0.0, step)] }
    }

    pub fn no_path() -> Self {
        ArcState { func: None, steps: vec![(0.0, Step::None)] }
    }

    /// Merge the candidate path `step` with function `cand` into the state. Ties keep
    /// the current state. `own_max` is an upper bound of the final function of this arc;
    /// candidates above it everywhere are skipped.
    #[allow(clippy::too_many_arguments)]
    pub fn relax<S: UnpackSource + ?Sized>(
        &mut self,
        cand: ArcFn,
        step: Step,
        own_max: f64,
        src: &S,
        approx: Approximation,
        counters: &Counters,
        scratch: &mut Scratch,
    ) {
        let Some(cur) = self.func.as_ref() else {
            *self = ArcState::single(cand, step);
            self.approximate_if_needed(approx, counters);
            return;
        };
        if own_max < cand.lower().min() {
            counters.merge_prunes.fetch_add(1, Relaxed);
            return;
        }
        counters.dominance_scans.fetch_add(1, Relaxed);
        if le_everywhere(cur.upper(), cand.lower(), TIE_EPS) {
            return;
        }
        if le_everywhere(cand.upper(), cur.lower(), -REPLACE_EPS) {
            *self = ArcState::single(cand, step);
            self.approximate_if_needed(approx, counters);
            return;
        }
        counters.merges.fetch_add(1, Relaxed);
        let period = cur.lower().period();
        let (func, segments) = match (cur, &cand) {
            (ArcFn::Exact(f), ArcFn::Exact(g)) => {
                let (merged, segments) = exact_merge(f, g);
                (ArcFn::Exact(merged), segments)
            }
            _ => {
                let pending = Pending { base: src, current: &self.steps, candidate: step };
                let segments = windowed_segments(cur, &cand, &pending, counters, scratch);
                let lower = min_of(cur.lower(), cand.lower());
                let upper = min_of(cur.upper(), cand.upper());
                (ArcFn::Approx(BoundPair { lower, upper, exact: false }), segments)
            }
        };
        let mut steps = Vec::with_capacity(self.steps.len() + 2);
        splice_steps(&self.steps, &segments, step, period, &mut steps);
        self.steps = steps;
        self.func = Some(func);
        self.approximate_if_needed(approx, counters);
    }

    fn approximate_if_needed(&mut self, approx: Approximation, counters: &Counters) {
        let Some(func) = self.func.as_ref() else { return };
        if func.complexity() <= approx.beta {
            return;
        }
        counters.approximations.fetch_add(1, Relaxed);
        let bounds = match func {
            ArcFn::Exact(f) => bound_pair(f, approx.epsilon),
            ArcFn::Approx(b) => BoundPair {
                lower: bound_pair(&b.lower, approx.epsilon).lower,
                upper: bound_pair(&b.upper, approx.epsilon).upper,
                exact: false,
            },
        };
        self.func = Some(ArcFn::Approx(bounds));
    }
}

fn full(f: &Ttf) -> Vec<Point> {
    let mut v = Vec::with_capacity(f.len() + 1);
    f.to_full_partial(&mut v);
    v
}

fn le_everywhere(f: &Ttf, g: &Ttf, tol: f64) -> bool {
    if f.is_constant() && g.is_constant() {
        return f.points()[0].val <= g.points()[0].val + tol;
    }
    if f.max() <= g.min() + tol {
        return true;
    }
    plf::le_everywhere(&full(f), &full(g), tol)
}

fn min_of(f: &Ttf, g: &Ttf) -> Ttf {
    f.merge_unchecked(g).0
}

/// Exact merge whose result follows the finalized winner segments, so that it
/// matches the function the resulting steps describe.
pub(crate) fn exact_merge(f: &Ttf, g: &Ttf) -> (Ttf, Vec<Segment>) {
    let period = f.period();
    let (fp, gp) = (full(f), full(g));
    let mut min = Vec::with_capacity(fp.len() + gp.len());
    let mut segments = Vec::new();
    plf::merge(&fp, &gp, &mut min, &mut segments);
    finalize_segments(&mut segments, 0.0, period, true);
    if segments.len() == 1 {
        let winner = if segments[0].winner == Winner::First { f } else { g };
        return (winner.clone(), segments);
    }
    let mut out = Vec::with_capacity(min.len());
    for s in &segments {
        let src = if s.winner == Winner::First { &fp } else { &gp };
        plf::append_restricted(src, s.start, s.end, &mut out);
    }
    plf::canonicalize(&mut out);
    (Ttf::from_full_partial(out, period), segments)
}

/// Winner segments over the whole period: certain outside the overlap windows
/// of the bounds, exact inside from reconstructed functions.
fn windowed_segments<S: UnpackSource + ?Sized>(cur: &ArcFn, cand: &ArcFn, src: &S, counters: &Counters, scratch: &mut Scratch) -> Vec<Segment> {
    let period = cur.lower().period();
    let (cl, cu, gl, gu) = (full(cur.lower()), full(cur.upper()), full(cand.lower()), full(cand.upper()));
    let regions = overlap_regions_with(&cl, &cu, &gl, &gu, WINDOW_EPS);
    let mut segments = Vec::new();
    let gap_piece = |a: f64, b: f64, segments: &mut Vec<Segment>| {
        let m = 0.5 * (a + b);
        let d = plf::eval(&cl, m) - plf::eval(&gu, m);
        if d > 0.0 {
            segments.push(Segment::new(a, b, Winner::Second, d));
        } else {
            segments.push(Segment::new(a, b, Winner::First, plf::eval(&gl, m) - plf::eval(&cu, m)));
        }
    };
    let mut t = 0.0;
    let (mut fa, mut ga, mut tmp) = (Vec::new(), Vec::new(), Vec::new());
    for &(a, b) in &regions {
        if b - a <= TIME_EPS {
            continue;
        }
        if a > t {
            gap_piece(t, a, &mut segments);
        }
        counters.reconstruction_calls.fetch_add(1, Relaxed);
        fa.clear();
        ga.clear();
        tmp.clear();
        let ok = reconstruct(src, CURRENT, a, b, &mut fa, scratch, None) && reconstruct(src, CANDIDATE, a, b, &mut ga, scratch, None);
        assert!(ok, "finite functions reconstruct to finite functions");
        plf::merge(&fa, &ga, &mut tmp, &mut segments);
        if let Some(last) = segments.last_mut() {
            last.end = b;
        }
        t = b;
    }
    if t < period {
        gap_piece(t, period, &mut segments);
    }
    finalize_segments(&mut segments, 0.0, period, true);
    segments
}

//! Periodic piecewise linear travel time functions.
//!
//! A [`Ttf`] maps a departure time to a strictly positive travel time. It is
//! stored as breakpoints within one period and interpolated periodically, so
//! the segment after the last breakpoint wraps around to the first one.
//!
//! Most algorithms work on *partial* functions: plain point slices covering a
//! closed domain `[first.at, last.at]` (see [`plf`]). Periodic functions are
//! converted to partial ones by unrolling them over the required range.

pub(crate) mod approx;
mod interval;
pub mod plf;

pub use approx::{bound_pair, douglas_peucker, link_bounds, overlap_windows, BoundPair};
pub use interval::{Segment, TimeInterval, Winner};
pub(crate) use interval::finalize_segments;

use thiserror::Error;

/// Default length of one period: a day in seconds.
pub const DEFAULT_PERIOD: f64 = 86_400.0;
/// Two travel times closer than this are treated as equal when deciding which path wins.
pub const TIE_EPS: f64 = 1e-6;
/// Maximum deviation of a breakpoint from the line through its neighbors for it to be dropped.
pub const COLLINEAR_EPS: f64 = 1e-9;
/// Breakpoints closer than this in time are collapsed.
pub const TIME_EPS: f64 = 1e-9;
/// Slack on the FIFO slope check to absorb floating point noise.
pub const FIFO_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub at: f64,
    pub val: f64,
}

impl Point {
    pub const fn new(at: f64, val: f64) -> Self {
        Point { at, val }
    }

    /// Arrival time when departing at this breakpoint.
    #[inline]
    pub fn arrival(&self) -> f64 {
        self.at + self.val
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TtfError {
    #[error("travel time function has no breakpoints")]
    Empty,
    #[error("period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("breakpoint {index} has non-positive or non-finite value {val}")]
    NonPositive { index: usize, val: f64 },
    #[error("breakpoint {index} at {at} lies outside [0, period)")]
    OutOfPeriod { index: usize, at: f64 },
    #[error("breakpoint {index} is not strictly after its predecessor")]
    Unsorted { index: usize },
    #[error("segment starting at breakpoint {index} has slope {slope} < -1 (FIFO violated)")]
    NotFifo { index: usize, slope: f64 },
    #[error("period mismatch: {0} vs {1}")]
    PeriodMismatch(f64, f64),
}

/// A periodic piecewise linear travel time function in canonical form.
///
/// Invariants: the first breakpoint sits at time 0, timestamps are strictly
/// increasing within `[0, period)`, all values are positive, every segment
/// (including the wrap segment) has slope >= -1 and no interior breakpoint is
/// collinear with its neighbors.
#[derive(Debug, Clone, PartialEq)]
pub struct Ttf {
    points: Vec<Point>,
    period: f64,
}

impl Ttf {
    /// Validate and canonicalize. A first breakpoint after time 0 is completed
    /// by a periodically interpolated point at 0.
    pub fn new(points: Vec<Point>, period: f64) -> Result<Self, TtfError> {
        validate_points(&points, period)?;
        let mut points = points;
        if points[0].at > 0.0 {
            let val = eval_periodic(&points, period, 0.0);
            points.insert(0, Point::new(0.0, val));
        }
        let mut ttf = Ttf { points, period };
        ttf.canonicalize();
        Ok(ttf)
    }

    pub fn constant(val: f64, period: f64) -> Result<Self, TtfError> {
        Self::new(vec![Point::new(0.0, val)], period)
    }

    /// Build from points produced by the algebra. Only checked in debug builds.
    pub(crate) fn from_raw(points: Vec<Point>, period: f64) -> Self {
        debug_assert!(!points.is_empty());
        debug_assert!(points[0].at == 0.0, "{:?}", &points[..points.len().min(3)]);
        let mut ttf = Ttf { points, period };
        ttf.canonicalize();
        ttf
    }

    /// Turn a partial function covering exactly `[0, period]` into a periodic one.
    pub(crate) fn from_full_partial(mut points: Vec<Point>, period: f64) -> Self {
        debug_assert!(points.len() >= 2 || period == 0.0);
        debug_assert!((points[0].at).abs() <= TIME_EPS, "{:?}", points[0]);
        debug_assert!((points.last().unwrap().at - period).abs() <= 1e-6, "{:?}", points.last());
        points[0].at = 0.0;
        points.pop();
        while points.len() > 1 && points.last().unwrap().at >= period - TIME_EPS {
            points.pop();
        }
        if points.is_empty() {
            unreachable!("partial function without interior");
        }
        Self::from_raw(points, period)
    }

    #[inline]
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    #[inline]
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Number of breakpoints, the complexity of the function.
    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.points.len() == 1
    }

    /// Travel time when departing at `t`; `t` is reduced modulo the period.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        eval_periodic(&self.points, self.period, t)
    }

    pub fn min(&self) -> f64 {
        self.points.iter().map(|p| p.val).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.points.iter().map(|p| p.val).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Append a partial function covering `[start, end]` (absolute times, possibly
    /// spanning several periods). If `out` already ends at `start`, the shared point is not duplicated.
    pub fn append_range(&self, start: f64, end: f64, out: &mut Vec<Point>) {
        debug_assert!(start <= end, "{start} > {end}");
        let first = Point::new(start, self.eval(start));
        plf::push_point(out, first);
        if end <= start {
            return;
        }
        let period = self.period;
        let mut base = (start / period).floor() * period;
        let mut idx = self.points.partition_point(|p| base + p.at <= start);
        loop {
            if idx == self.points.len() {
                idx = 0;
                base += period;
            }
            let t = base + self.points[idx].at;
            if t >= end {
                break;
            }
            out.push(Point::new(t, self.points[idx].val));
            idx += 1;
        }
        plf::push_point(out, Point::new(end, self.eval(end)));
    }

    /// The partial function covering exactly one period `[0, period]`.
    pub fn to_full_partial(&self, out: &mut Vec<Point>) {
        out.extend_from_slice(&self.points);
        out.push(Point::new(self.period, self.points[0].val));
    }

    /// Linking: the travel time of traversing `self` first and `next` afterwards,
    /// `t -> self(t) + next(t + self(t))`.
    pub fn link(&self, next: &Ttf) -> Result<Ttf, TtfError> {
        check_period(self.period, next.period)?;
        Ok(self.link_unchecked(next))
    }

    pub(crate) fn link_unchecked(&self, next: &Ttf) -> Ttf {
        if self.is_constant() && next.is_constant() {
            return Ttf {
                points: vec![Point::new(0.0, self.points[0].val + next.points[0].val)],
                period: self.period,
            };
        }
        let mut first = Vec::with_capacity(self.len() + 1);
        self.to_full_partial(&mut first);
        let a0 = first[0].arrival();
        let a1 = first.last().unwrap().arrival();
        let mut second = Vec::with_capacity(next.len() + 2);
        next.append_range(a0, a1, &mut second);
        let mut out = Vec::with_capacity(first.len() + second.len());
        plf::link(&first, &second, &mut out);
        Ttf::from_full_partial(out, self.period)
    }

    /// Merging: pointwise minimum plus the segments of the period where each input wins.
    /// Ties go to `self`.
    pub fn merge(&self, other: &Ttf) -> Result<(Ttf, Vec<Segment>), TtfError> {
        check_period(self.period, other.period)?;
        Ok(self.merge_unchecked(other))
    }

    pub(crate) fn merge_unchecked(&self, other: &Ttf) -> (Ttf, Vec<Segment>) {
        let mut f = Vec::with_capacity(self.len() + 1);
        self.to_full_partial(&mut f);
        let mut g = Vec::with_capacity(other.len() + 1);
        other.to_full_partial(&mut g);
        let mut out = Vec::with_capacity(f.len() + g.len());
        let mut segments = Vec::new();
        plf::merge(&f, &g, &mut out, &mut segments);
        interval::finalize_segments(&mut segments, 0.0, self.period, true);
        (Ttf::from_full_partial(out, self.period), segments)
    }

    /// Merge returning the minimum and the tiling of `[0, period)` into the
    /// intervals where `self` wins and where `other` wins.
    pub fn merge_intervals(&self, other: &Ttf) -> Result<(Ttf, Vec<TimeInterval>, Vec<TimeInterval>), TtfError> {
        let (merged, segments) = self.merge(other)?;
        let (f, g) = interval::split_by_winner(&segments, self.period);
        Ok((merged, f, g))
    }

    /// Departure time `t` such that `t + self(t) == arrival`. On flat arrival
    /// segments (slope exactly -1) the earliest such departure is returned.
    pub fn invert_arrival(&self, arrival: f64) -> f64 {
        let period = self.period;
        let k = ((arrival - self.points[0].val) / period).floor();
        let base = k * period;
        // arrival of breakpoint i shifted into the window starting at `base`
        let arr = |i: usize| -> f64 {
            if i == self.points.len() {
                base + period + self.points[0].val
            } else {
                base + self.points[i].arrival()
            }
        };
        let n = self.points.len();
        // first index in 0..=n with arrival >= target
        let mut lo = 0;
        let mut hi = n;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if arr(mid) < arrival {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let at = |i: usize| if i == n { base + period } else { base + self.points[i].at };
        if lo == 0 {
            return at(0);
        }
        let (a_prev, a_next) = (arr(lo - 1), arr(lo));
        if a_next <= a_prev {
            return at(lo - 1);
        }
        let frac = (arrival - a_prev) / (a_next - a_prev);
        at(lo - 1) + frac * (at(lo) - at(lo - 1))
    }

    /// Largest downward slope deviation; `>= -1` for FIFO functions.
    pub fn min_slope(&self) -> f64 {
        let n = self.points.len();
        if n == 1 {
            return 0.0;
        }
        (0..n)
            .map(|i| {
                let p = self.points[i];
                let q = if i + 1 == n { Point::new(self.period, self.points[0].val) } else { self.points[i + 1] };
                (q.val - p.val) / (q.at - p.at)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_fifo(&self) -> bool {
        self.min_slope() >= -1.0 - 1e-12
    }

    /// Add a constant to all values.
    pub fn shifted(&self, delta: f64) -> Ttf {
        Ttf {
            points: self.points.iter().map(|p| Point::new(p.at, p.val + delta)).collect(),
            period: self.period,
        }
    }

    fn canonicalize(&mut self) {
        let period = self.period;
        let pts = &mut self.points;
        // collapse near-duplicate timestamps
        let mut w = 1;
        for r in 1..pts.len() {
            if pts[r].at - pts[w - 1].at > TIME_EPS && pts[r].at < period - TIME_EPS {
                pts[w] = pts[r];
                w += 1;
            }
        }
        pts.truncate(w);
        // dropping a point can make its neighbours collinear, so repeat until stable
        loop {
            let len = pts.len();
            *pts = drop_collinear(pts, period);
            if pts.len() == len {
                break;
            }
        }
    }
}

/// One pass removing collinear interior points; the point at 0 is kept.
fn drop_collinear(pts: &[Point], period: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(pts.len());
    for i in 0..pts.len() {
        let p = pts[i];
        if i > 0 {
            let prev = *out.last().unwrap();
            let next = if i + 1 < pts.len() { pts[i + 1] } else { Point::new(period, pts[0].val) };
            if collinear(prev, p, next) {
                continue;
            }
        }
        out.push(p);
    }
    // the last kept point might have become collinear with the wrap segment
    while out.len() > 1 {
        let k = out.len() - 1;
        if collinear(out[k - 1], out[k], Point::new(period, out[0].val)) {
            out.pop();
        } else {
            break;
        }
    }
    out
}

pub(crate) fn check_period(a: f64, b: f64) -> Result<(), TtfError> {
    if a == b {
        Ok(())
    } else {
        Err(TtfError::PeriodMismatch(a, b))
    }
}

#[inline]
pub(crate) fn collinear(prev: Point, p: Point, next: Point) -> bool {
    let dt = next.at - prev.at;
    if dt <= 0.0 {
        return false;
    }
    let interpolated = prev.val + (next.val - prev.val) * (p.at - prev.at) / dt;
    (interpolated - p.val).abs() <= COLLINEAR_EPS
}

pub(crate) fn eval_periodic(points: &[Point], period: f64, t: f64) -> f64 {
    debug_assert!(!points.is_empty());
    if points.len() == 1 {
        return points[0].val;
    }
    let x = t.rem_euclid(period);
    let idx = points.partition_point(|p| p.at <= x);
    let (prev, next) = if idx == 0 {
        let last = points[points.len() - 1];
        (Point::new(last.at - period, last.val), points[0])
    } else if idx == points.len() {
        (points[idx - 1], Point::new(points[0].at + period, points[0].val))
    } else {
        (points[idx - 1], points[idx])
    };
    plf::interpolate(prev, next, x)
}

fn validate_points(points: &[Point], period: f64) -> Result<(), TtfError> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(TtfError::BadPeriod(period));
    }
    if points.is_empty() {
        return Err(TtfError::Empty);
    }
    for (index, p) in points.iter().enumerate() {
        if !(p.val > 0.0 && p.val.is_finite()) {
            return Err(TtfError::NonPositive { index, val: p.val });
        }
        if !(p.at >= 0.0 && p.at < period) {
            return Err(TtfError::OutOfPeriod { index, at: p.at });
        }
        if index > 0 && p.at <= points[index - 1].at {
            return Err(TtfError::Unsorted { index });
        }
    }
    if let Some((index, slope)) = first_fifo_violation(points, period) {
        return Err(TtfError::NotFifo { index, slope });
    }
    Ok(())
}

/// First segment (by start breakpoint index) whose slope is below -1, including the wrap segment.
pub(crate) fn first_fifo_violation(points: &[Point], period: f64) -> Option<(usize, f64)> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    for i in 0..n {
        let p = points[i];
        let q = if i + 1 == n { Point::new(points[0].at + period, points[0].val) } else { points[i + 1] };
        let slope = (q.val - p.val) / (q.at - p.at);
        if slope < -1.0 - FIFO_EPS {
            return Some((i, slope));
        }
    }
    None
}

/// Travel time profile between two nodes, including the degenerate cases.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// Source and target coincide.
    Zero,
    Unreachable,
    Ttf(Ttf),
}

impl Profile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Unreachable => f64::INFINITY,
            Profile::Ttf(f) => f.eval(t),
        }
    }

    pub fn ttf(&self) -> Option<&Ttf> {
        match self {
            Profile::Ttf(f) => Some(f),
            _ => None,
        }
    }

    pub fn num_points(&self) -> usize {
        self.ttf().map_or(0, Ttf::len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::random_fifo;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: f64 = DEFAULT_PERIOD;

    fn f(points: &[(f64, f64)]) -> Ttf {
        Ttf::new(points.iter().map(|&(a, v)| Point::new(a, v)).collect(), P).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(f(&[(0.0, 10.0)]).eval(55555.0), 10.0);
        let g = f(&[(0.0, 10.0), (43200.0, 20.0)]);
        assert_eq!(g.eval(21600.0), 15.0);
        assert_eq!(g.eval(64800.0), 15.0);
        assert_eq!(g.eval(64800.0 + 3.0 * P), 15.0);
        assert_eq!(g.eval(-21600.0), 15.0);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Ttf::new(vec![], P), Err(TtfError::Empty));
        assert!(matches!(Ttf::constant(0.0, P), Err(TtfError::NonPositive { .. })));
        assert!(matches!(
            Ttf::new(vec![Point::new(0.0, 100.0), Point::new(10.0, 50.0)], P),
            Err(TtfError::NotFifo { index: 0, .. })
        ));
        assert!(matches!(
            Ttf::new(vec![Point::new(0.0, 1.0), Point::new(P, 1.0)], P),
            Err(TtfError::OutOfPeriod { .. })
        ));
    }

    #[test]
    fn canonical_form() {
        let g = f(&[(0.0, 10.0), (100.0, 11.0), (200.0, 12.0), (300.0, 10.0)]);
        assert_eq!(g.points(), &[Point::new(0.0, 10.0), Point::new(200.0, 12.0), Point::new(300.0, 10.0)]);
        assert!(f(&[(0.0, 10.0), (43200.0, 10.0)]).is_constant());
        // first point after zero gets a wrap-interpolated point at zero
        let h = f(&[(43200.0, 20.0)]);
        assert!(h.is_constant());
        let h = f(&[(21600.0, 10.0), (64800.0, 20.0)]);
        assert_eq!(h.points()[0], Point::new(0.0, 15.0));
    }

    #[test]
    fn link_examples() {
        let c = f(&[(0.0, 2.0)]).link(&f(&[(0.0, 3.0)])).unwrap();
        assert_eq!(c.points(), &[Point::new(0.0, 5.0)]);
        let g = f(&[(0.0, 10.0), (43200.0, 20.0)]).link(&f(&[(0.0, 100.0)])).unwrap();
        assert_eq!(g.points(), &[Point::new(0.0, 110.0), Point::new(43200.0, 120.0)]);
    }

    #[test]
    fn link_matches_pointwise_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_fifo(&mut rng, 30, 50.0, 3000.0);
            let b = random_fifo(&mut rng, 30, 50.0, 3000.0);
            let l = a.link(&b).unwrap();
            assert!(l.is_fifo());
            assert!(l.len() <= a.len() + b.len());
            for _ in 0..1000 {
                let t: f64 = rng.gen_range(0.0..P);
                let expected = a.eval(t) + b.eval(t + a.eval(t));
                assert!((l.eval(t) - expected).abs() <= 1e-9 * expected.max(1.0), "{} vs {}", l.eval(t), expected);
            }
        }
    }

    #[test]
    fn merge_examples() {
        let (m, fi, gi) = f(&[(0.0, 5.0)]).merge_intervals(&f(&[(0.0, 7.0)])).unwrap();
        assert_eq!(m.points(), &[Point::new(0.0, 5.0)]);
        assert_eq!(fi, vec![TimeInterval::new(0.0, P)]);
        assert!(gi.is_empty());

        let a = f(&[(0.0, 10.0)]);
        let b = f(&[(0.0, 5.0), (43200.0, 15.0)]);
        let (m, fi, gi) = a.merge_intervals(&b).unwrap();
        assert_eq!(fi, vec![TimeInterval::new(21600.0, 64800.0)]);
        assert_eq!(gi, vec![TimeInterval::new(64800.0, 21600.0)]);
        for i in 0..10_000 {
            let t = i as f64 * P / 10_000.0;
            assert!((m.eval(t) - a.eval(t).min(b.eval(t))).abs() < 1e-9);
            let f_wins = fi.iter().any(|iv| iv.contains(t, P));
            let g_wins = gi.iter().any(|iv| iv.contains(t, P));
            assert!(f_wins ^ g_wins);
            if (t - 21600.0).abs() > 1e-3 && (t - 64800.0).abs() > 1e-3 {
                assert_eq!(f_wins, a.eval(t) <= b.eval(t));
            }
        }

        let (m, fi, gi) = b.merge_intervals(&b).unwrap();
        assert_eq!(m, b);
        assert_eq!(fi, vec![TimeInterval::new(0.0, P)]);
        assert!(gi.is_empty());
    }

    #[test]
    fn merge_matches_pointwise_min() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = random_fifo(&mut rng, 40, 100.0, 200.0);
            let b = random_fifo(&mut rng, 40, 100.0, 200.0);
            let (m, fi, gi) = a.merge_intervals(&b).unwrap();
            assert!(m.is_fifo());
            let measure: f64 = fi.iter().chain(gi.iter()).map(|iv| iv.length(P)).sum();
            assert!((measure - P).abs() < 1e-6);
            for _ in 0..10_000 {
                let t: f64 = rng.gen_range(0.0..P);
                let expected = a.eval(t).min(b.eval(t));
                assert!((m.eval(t) - expected).abs() <= 1e-9 * expected.max(1.0));
            }
        }
    }

    #[test]
    fn invert_arrival_examples() {
        assert!((f(&[(0.0, 10.0)]).invert_arrival(110.0) - 100.0).abs() < 1e-9);
        let g = f(&[(0.0, 10.0), (43200.0, 20.0)]);
        assert!((g.invert_arrival(21600.0 + 15.0) - 21600.0).abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // evenly spaced breakpoints keep slopes well above -1, so the inverse is well conditioned
        let pts: Vec<Point> = (0..50).map(|i| Point::new(i as f64 * P / 50.0, 10.0 + rng.gen_range(0.0..500.0))).collect();
        let h = Ttf::new(pts, P).unwrap();
        for _ in 0..1000 {
            let t: f64 = rng.gen_range(-P..3.0 * P);
            assert!((h.invert_arrival(t + h.eval(t)) - t).abs() < 1e-6);
        }
    }

    #[test]
    fn invert_arrival_flat_segment_returns_earliest() {
        // arrival constant at 200 for departures in [100, 150]
        let g = f(&[(0.0, 100.0), (100.0, 100.0), (150.0, 50.0), (300.0, 100.0)]);
        assert!((g.invert_arrival(200.0) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn append_range_spans_periods() {
        let g = f(&[(0.0, 10.0), (43200.0, 20.0)]);
        let mut out = Vec::new();
        g.append_range(-21600.0, 2.0 * P, &mut out);
        assert_eq!(out.first().unwrap(), &Point::new(-21600.0, 15.0));
        assert_eq!(out.last().unwrap(), &Point::new(2.0 * P, 10.0));
        for w in out.windows(2) {
            assert!(w[0].at < w[1].at);
        }
        for p in &out {
            assert!((g.eval(p.at) - p.val).abs() < 1e-9);
        }
    }
}

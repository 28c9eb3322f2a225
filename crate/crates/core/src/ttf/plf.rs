//! Algorithms on partial piecewise linear functions.
//!
//! A partial function is a slice of points with strictly increasing timestamps,
//! defined on `[first.at, last.at]`. Outputs are appended to caller provided
//! buffers so that repeated operations do not allocate once the buffers have grown.

use super::interval::{Segment, Winner};
use super::{collinear, Point, TIME_EPS};

#[inline]
pub fn interpolate(prev: Point, next: Point, t: f64) -> f64 {
    let dt = next.at - prev.at;
    if dt <= 0.0 {
        return prev.val;
    }
    prev.val + (next.val - prev.val) * ((t - prev.at) / dt)
}

/// Push `p` unless the last point already sits at (almost) the same time.
#[inline]
pub fn push_point(out: &mut Vec<Point>, p: Point) {
    if let Some(last) = out.last() {
        if p.at - last.at <= TIME_EPS {
            return;
        }
    }
    out.push(p);
}

/// Evaluate, clamping to the domain.
pub fn eval(points: &[Point], t: f64) -> f64 {
    let idx = points.partition_point(|p| p.at <= t);
    if idx == 0 {
        points[0].val
    } else if idx == points.len() {
        points[idx - 1].val
    } else {
        interpolate(points[idx - 1], points[idx], t)
    }
}

pub fn min_val(points: &[Point]) -> f64 {
    points.iter().map(|p| p.val).fold(f64::INFINITY, f64::min)
}

pub fn max_val(points: &[Point]) -> f64 {
    points.iter().map(|p| p.val).fold(f64::NEG_INFINITY, f64::max)
}

/// Drop interior points collinear with their neighbors; endpoints are kept.
pub fn canonicalize(points: &mut Vec<Point>) {
    if points.len() <= 2 {
        return;
    }
    let mut w = 1;
    for r in 1..points.len() - 1 {
        if !collinear(points[w - 1], points[r], points[r + 1]) {
            points[w] = points[r];
            w += 1;
        }
    }
    let last = points[points.len() - 1];
    points[w] = last;
    points.truncate(w + 1);
}

/// Append `points` restricted to `[lo, hi]`, which must lie within their domain.
pub fn append_restricted(points: &[Point], lo: f64, hi: f64, out: &mut Vec<Point>) {
    push_point(out, Point::new(lo, eval(points, lo)));
    let from = points.partition_point(|p| p.at <= lo);
    for p in &points[from..] {
        if p.at >= hi {
            break;
        }
        push_point(out, *p);
    }
    push_point(out, Point::new(hi, eval(points, hi)));
}

/// Link `first` with `second`: `t -> first(t) + second(t + first(t))` on the domain of `first`.
/// `second` must cover the arrival range of `first`.
pub fn link(first: &[Point], second: &[Point], out: &mut Vec<Point>) {
    debug_assert!(!first.is_empty() && !second.is_empty());
    let start = out.len();
    let p0 = first[0];
    out.push(Point::new(p0.at, p0.val + eval(second, p0.arrival())));
    let mut j = second.partition_point(|q| q.at <= p0.arrival());
    for w in first.windows(2) {
        let (p, q) = (w[0], w[1]);
        let (ap, aq) = (p.arrival(), q.arrival());
        while j < second.len() && second[j].at < aq {
            let g = second[j];
            if g.at > ap && aq > ap {
                let t = p.at + (g.at - ap) * (q.at - p.at) / (aq - ap);
                if t - out.last().unwrap().at > TIME_EPS && q.at - t > TIME_EPS {
                    out.push(Point::new(t, g.at - t + g.val));
                }
            }
            j += 1;
        }
        let val = q.val + eval(second, aq);
        if q.at - out.last().unwrap().at > TIME_EPS {
            out.push(Point::new(q.at, val));
        } else if out.len() - start > 1 {
            // keep the exact domain end
            let last = out.last_mut().unwrap();
            *last = Point::new(q.at, val);
        }
    }
    let mut tail = out.split_off(start);
    canonicalize(&mut tail);
    out.extend_from_slice(&tail);
}

/// Iterate over the union of breakpoints of two partial functions with the same domain,
/// yielding `(t, f(t), g(t))`.
pub(crate) struct Sweep<'a> {
    f: &'a [Point],
    g: &'a [Point],
    i: usize,
    j: usize,
    started: bool,
}

impl<'a> Sweep<'a> {
    pub(crate) fn new(f: &'a [Point], g: &'a [Point]) -> Self {
        debug_assert!((f[0].at - g[0].at).abs() <= 1e-6, "{:?} {:?}", f[0], g[0]);
        Sweep { f, g, i: 0, j: 0, started: false }
    }
}

impl Iterator for Sweep<'_> {
    type Item = (f64, f64, f64);

    fn next(&mut self) -> Option<(f64, f64, f64)> {
        let (f, g) = (self.f, self.g);
        if !self.started {
            self.started = true;
            return Some((f[0].at.min(g[0].at), f[0].val, g[0].val));
        }
        let tf = f.get(self.i + 1).map_or(f64::INFINITY, |p| p.at);
        let tg = g.get(self.j + 1).map_or(f64::INFINITY, |p| p.at);
        if tf == f64::INFINITY && tg == f64::INFINITY {
            return None;
        }
        if (tf - tg).abs() <= TIME_EPS || tf == f64::INFINITY && tg - f[self.i].at <= TIME_EPS || tg == f64::INFINITY && tf - g[self.j].at <= TIME_EPS {
            // both advance; also covers a domain end that differs by rounding
            let t = if tf.is_finite() { tf } else { tg };
            let fv = if tf.is_finite() { f[self.i + 1].val } else { f[self.i].val };
            let gv = if tg.is_finite() { g[self.j + 1].val } else { g[self.j].val };
            if tf.is_finite() {
                self.i += 1;
            }
            if tg.is_finite() {
                self.j += 1;
            }
            return Some((t, fv, gv));
        }
        if tf < tg {
            self.i += 1;
            let gv = if tg.is_finite() { interpolate(g[self.j], g[self.j + 1], tf) } else { g[self.j].val };
            Some((tf, f[self.i].val, gv))
        } else {
            self.j += 1;
            let fv = if tf.is_finite() { interpolate(f[self.i], f[self.i + 1], tg) } else { f[self.i].val };
            Some((tg, fv, g[self.j].val))
        }
    }
}

/// Pointwise minimum of `f` and `g` (same domain) appended to `out`, plus raw
/// winner segments. `f` wins where `f <= g`.
pub fn merge(f: &[Point], g: &[Point], out: &mut Vec<Point>, segments: &mut Vec<Segment>) {
    let start = out.len();
    let mut sweep = Sweep::new(f, g);
    let (t_start, f0, g0) = sweep.next().unwrap();
    out.push(Point::new(t_start, f0.min(g0)));
    let (mut t0, mut f0, mut g0) = (t_start, f0, g0);
    let mut winner = if f0 - g0 <= 0.0 { Winner::First } else { Winner::Second };
    let mut seg_start = t0;
    let mut gap = winner_gap(winner, f0 - g0);

    for (t1, f1, g1) in sweep {
        let (d0, d1) = (f0 - g0, f1 - g1);
        if (d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0) {
            let tc = t0 + (t1 - t0) * (d0 / (d0 - d1));
            let val = f0 + (f1 - f0) * ((tc - t0) / (t1 - t0));
            push_point(out, Point::new(tc, val));
        }
        let next_winner = if d1 <= 0.0 { Winner::First } else { Winner::Second };
        if next_winner != winner {
            let tx = match winner {
                Winner::First => t0 + (t1 - t0) * (-d0 / (d1 - d0)),
                Winner::Second => t0 + (t1 - t0) * (d0 / (d0 - d1)),
            };
            segments.push(Segment::new(seg_start, tx, winner, gap));
            winner = next_winner;
            seg_start = tx;
            gap = winner_gap(winner, d1);
        } else {
            gap = gap.max(winner_gap(winner, d1));
        }
        push_point(out, Point::new(t1, f1.min(g1)));
        t0 = t1;
        f0 = f1;
        g0 = g1;
    }
    segments.push(Segment::new(seg_start, t0, winner, gap));
    let mut tail = out.split_off(start);
    canonicalize(&mut tail);
    out.extend_from_slice(&tail);
}

#[inline]
fn winner_gap(winner: Winner, d: f64) -> f64 {
    match winner {
        Winner::First => -d,
        Winner::Second => d,
    }
}

/// Is `f <= g + tol` everywhere on the common domain?
pub fn le_everywhere(f: &[Point], g: &[Point], tol: f64) -> bool {
    Sweep::new(f, g).all(|(_, fv, gv)| fv <= gv + tol)
}

/// Closed intervals of the common domain where `f(t) - g(t) <= tol`, appended to `out`.
pub fn region_le(f: &[Point], g: &[Point], tol: f64, out: &mut Vec<(f64, f64)>) {
    let mut sweep = Sweep::new(f, g);
    let (mut t0, f0, g0) = sweep.next().unwrap();
    let mut d0 = f0 - g0 - tol;
    let mut open: Option<f64> = if d0 <= 0.0 { Some(t0) } else { None };
    for (t1, f1, g1) in sweep {
        let d1 = f1 - g1 - tol;
        match open {
            Some(s) if d1 > 0.0 => {
                let tx = if d0 < 0.0 { t0 + (t1 - t0) * (-d0 / (d1 - d0)) } else { t0 };
                out.push((s, tx));
                open = None;
            }
            None if d1 <= 0.0 => {
                let tx = if d0 > 0.0 { t0 + (t1 - t0) * (d0 / (d0 - d1)) } else { t1 };
                open = Some(tx);
            }
            _ => {}
        }
        t0 = t1;
        d0 = d1;
    }
    if let Some(s) = open {
        out.push((s, t0));
    }
}

/// Pointwise maximum of `f` and the constant `c` (`above == true`) or minimum (`above == false`).
pub fn clip(f: &[Point], c: f64, above: bool, out: &mut Vec<Point>) {
    let start = out.len();
    let keep = |v: f64| if above { v.max(c) } else { v.min(c) };
    out.push(Point::new(f[0].at, keep(f[0].val)));
    for w in f.windows(2) {
        let (p, q) = (w[0], w[1]);
        let (dp, dq) = (p.val - c, q.val - c);
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let t = p.at + (q.at - p.at) * (dp / (dp - dq));
            push_point(out, Point::new(t, c));
        }
        push_point(out, Point::new(q.at, keep(q.val)));
    }
    let mut tail = out.split_off(start);
    canonicalize(&mut tail);
    out.extend_from_slice(&tail);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(a, b)| Point::new(a, b)).collect()
    }

    #[test]
    fn partial_link() {
        let f = pts(&[(0.0, 10.0), (10.0, 20.0)]);
        let g = pts(&[(10.0, 5.0), (20.0, 5.0), (25.0, 10.0), (30.0, 10.0)]);
        let mut out = Vec::new();
        link(&f, &g, &mut out);
        for k in 0..=100 {
            let t = k as f64 / 10.0;
            let expected = eval(&f, t) + eval(&g, t + eval(&f, t));
            assert!((eval(&out, t) - expected).abs() < 1e-9, "{t}");
        }
        assert_eq!(out.first().unwrap().at, 0.0);
        assert_eq!(out.last().unwrap().at, 10.0);
    }

    #[test]
    fn partial_merge_segments() {
        let f = pts(&[(0.0, 10.0), (10.0, 10.0)]);
        let g = pts(&[(0.0, 5.0), (10.0, 15.0)]);
        let mut out = Vec::new();
        let mut segs = Vec::new();
        merge(&f, &g, &mut out, &mut segs);
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].winner, Winner::Second);
        assert!((segs[0].end - 5.0).abs() < 1e-12);
        assert_eq!(out, pts(&[(0.0, 5.0), (5.0, 10.0), (10.0, 10.0)]));
    }

    #[test]
    fn regions() {
        let f = pts(&[(0.0, 0.0), (10.0, 10.0)]);
        let g = pts(&[(0.0, 5.0), (10.0, 5.0)]);
        let mut out = Vec::new();
        region_le(&f, &g, 0.0, &mut out);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, 0.0);
        assert!((out[0].1 - 5.0).abs() < 1e-12);
        let mut c = Vec::new();
        clip(&f, 5.0, true, &mut c);
        assert_eq!(c, pts(&[(0.0, 5.0), (5.0, 5.0), (10.0, 10.0)]));
    }
}

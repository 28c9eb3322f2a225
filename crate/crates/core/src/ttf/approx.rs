//! Approximation: Douglas-Peucker simplification and lower/upper bound pairs.

use super::{plf, Point, TimeInterval, Ttf, TtfError, TIE_EPS};

/// Simplify `f` keeping a subset of its breakpoints such that the vertical
/// distance to `f` never exceeds `epsilon`. The point at time 0 is always kept.
pub fn douglas_peucker(f: &Ttf, epsilon: f64) -> Ttf {
    if f.len() <= 2 {
        return f.clone();
    }
    let mut full = Vec::with_capacity(f.len() + 1);
    f.to_full_partial(&mut full);
    let keep = dp_keep(&full, epsilon);
    let pts: Vec<Point> = full.iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| *p).collect();
    Ttf::from_full_partial(pts, f.period())
}

fn dp_keep(points: &[Point], epsilon: f64) -> Vec<bool> {
    let n = points.len();
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0usize, n - 1)];
    while let Some((i, j)) = stack.pop() {
        if j <= i + 1 {
            continue;
        }
        let (a, b) = (points[i], points[j]);
        let mut worst = 0.0;
        let mut worst_idx = i;
        for (k, p) in points.iter().enumerate().take(j).skip(i + 1) {
            let err = (p.val - plf::interpolate(a, b, p.at)).abs();
            if err > worst {
                worst = err;
                worst_idx = k;
            }
        }
        if worst > epsilon {
            keep[worst_idx] = true;
            stack.push((i, worst_idx));
            stack.push((worst_idx, j));
        }
    }
    keep
}

/// A lower and an upper bound of some travel time function. With `exact`,
/// both bounds equal the function itself.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundPair {
    pub lower: Ttf,
    pub upper: Ttf,
    pub exact: bool,
}

impl BoundPair {
    pub fn exact(f: Ttf) -> Self {
        BoundPair { lower: f.clone(), upper: f, exact: true }
    }

    pub fn new(lower: Ttf, upper: Ttf) -> Result<Self, TtfError> {
        super::check_period(lower.period(), upper.period())?;
        Ok(BoundPair { lower, upper, exact: false })
    }

    /// Breakpoints of the larger bound.
    pub fn complexity(&self) -> usize {
        self.lower.len().max(self.upper.len())
    }

    pub fn min(&self) -> f64 {
        self.lower.min()
    }

    pub fn max(&self) -> f64 {
        self.upper.max()
    }
}

/// Approximate `f` by a pair of bounds at most `2 * epsilon` apart.
///
/// The Douglas-Peucker simplification is shifted down and up by `epsilon`;
/// every breakpoint is then moved back towards `f` by the smaller of the
/// minimum errors of its two adjacent segments. Slopes are repaired to keep
/// the FIFO property and the bounds are clipped to `[min f, max f]`.
pub fn bound_pair(f: &Ttf, epsilon: f64) -> BoundPair {
    debug_assert!(epsilon > 0.0);
    let period = f.period();
    if f.is_constant() {
        return BoundPair { lower: f.clone(), upper: f.clone(), exact: false };
    }
    let mut full = Vec::with_capacity(f.len() + 1);
    f.to_full_partial(&mut full);
    let keep = dp_keep(&full, epsilon);
    let kept: Vec<usize> = (0..full.len()).filter(|&i| keep[i]).collect();
    let segs = kept.len() - 1;

    let mut lower: Vec<Point> = kept.iter().map(|&i| Point::new(full[i].at, full[i].val - epsilon)).collect();
    let mut upper: Vec<Point> = kept.iter().map(|&i| Point::new(full[i].at, full[i].val + epsilon)).collect();

    // minimum distance between f and each bound segment
    let mut slack_lower = vec![f64::INFINITY; segs];
    let mut slack_upper = vec![f64::INFINITY; segs];
    for s in 0..segs {
        for p in &full[kept[s]..=kept[s + 1]] {
            slack_lower[s] = slack_lower[s].min(p.val - plf::interpolate(lower[s], lower[s + 1], p.at));
            slack_upper[s] = slack_upper[s].min(plf::interpolate(upper[s], upper[s + 1], p.at) - p.val);
        }
    }
    for k in 0..kept.len() {
        // the point at the period end is the point at 0
        let (left, right) = if k == 0 || k == segs { (segs - 1, 0) } else { (k - 1, k) };
        let dl = slack_lower[left].min(slack_lower[right]).max(0.0);
        let du = slack_upper[left].min(slack_upper[right]).max(0.0);
        lower[k].val += dl;
        upper[k].val -= du;
    }

    repair_fifo(&mut lower, false);
    repair_fifo(&mut upper, true);

    let mut clipped = Vec::with_capacity(lower.len() + 4);
    plf::clip(&lower, f.min(), true, &mut clipped);
    let lower = Ttf::from_full_partial(clipped, period);
    let mut clipped = Vec::with_capacity(upper.len() + 4);
    plf::clip(&upper, f.max(), false, &mut clipped);
    let upper = Ttf::from_full_partial(clipped, period);
    BoundPair { lower, upper, exact: false }
}

/// Restore slopes >= -1 on a full-period partial function whose first and last
/// point are the same periodic point. Lower bounds are only ever decreased and
/// upper bounds only increased, so validity is preserved.
fn repair_fifo(points: &mut [Point], is_upper: bool) {
    let n = points.len();
    for _ in 0..3 {
        let mut changed = false;
        if is_upper {
            for i in 0..n - 1 {
                let min_next = points[i].val - (points[i + 1].at - points[i].at);
                if points[i + 1].val < min_next {
                    points[i + 1].val = min_next;
                    changed = true;
                }
            }
            let v = points[0].val.max(points[n - 1].val);
            changed |= points[0].val != v || points[n - 1].val != v;
            points[0].val = v;
            points[n - 1].val = v;
        } else {
            for i in (0..n - 1).rev() {
                let max_here = points[i + 1].val + (points[i + 1].at - points[i].at);
                if points[i].val > max_here {
                    points[i].val = max_here;
                    changed = true;
                }
            }
            let v = points[0].val.min(points[n - 1].val);
            changed |= points[0].val != v || points[n - 1].val != v;
            points[0].val = v;
            points[n - 1].val = v;
        }
        if !changed {
            break;
        }
    }
}

/// Link two bound pairs: lower with lower and upper with upper.
pub fn link_bounds(a: &BoundPair, b: &BoundPair) -> Result<BoundPair, TtfError> {
    super::check_period(a.lower.period(), b.lower.period())?;
    Ok(link_bounds_unchecked(a, b))
}

pub(crate) fn link_bounds_unchecked(a: &BoundPair, b: &BoundPair) -> BoundPair {
    if a.exact && b.exact {
        return BoundPair::exact(a.lower.link_unchecked(&b.lower));
    }
    BoundPair {
        lower: a.lower.link_unchecked(&b.lower),
        upper: a.upper.link_unchecked(&b.upper),
        exact: false,
    }
}

/// Parts of `[0, period]` where the bounds of `a` and `b` overlap, i.e. where
/// neither function is certainly smaller than the other. Within [`TIE_EPS`]
/// the bounds are considered overlapping.
pub(crate) fn overlap_regions(a: &BoundPair, b: &BoundPair) -> Vec<(f64, f64)> {
    let full = |f: &Ttf| {
        let mut v = Vec::with_capacity(f.len() + 1);
        f.to_full_partial(&mut v);
        v
    };
    overlap_regions_with(&full(&a.lower), &full(&a.upper), &full(&b.lower), &full(&b.upper), TIE_EPS)
}

/// Overlap regions of two bound pairs given as full-period partial functions.
pub(crate) fn overlap_regions_with(al: &[Point], au: &[Point], bl: &[Point], bu: &[Point], tol: f64) -> Vec<(f64, f64)> {
    let mut r1 = Vec::new();
    let mut r2 = Vec::new();
    plf::region_le(al, bu, tol, &mut r1);
    plf::region_le(bl, au, tol, &mut r2);
    intersect(&r1, &r2)
}

fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let s = a[i].0.max(b[j].0);
        let e = a[i].1.min(b[j].1);
        if s <= e {
            out.push((s, e));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Maximal intervals where the two bound pairs overlap. Outside of them one of
/// the underlying functions is certainly smaller.
pub fn overlap_windows(a: &BoundPair, b: &BoundPair) -> Result<Vec<TimeInterval>, TtfError> {
    super::check_period(a.lower.period(), b.lower.period())?;
    let period = a.lower.period();
    let regions = overlap_regions(a, b);
    let mut out: Vec<TimeInterval> = regions.iter().map(|&(s, e)| TimeInterval::new(s, e)).collect();
    if out.len() == 1 && out[0].start <= 0.0 && out[0].end >= period {
        return Ok(vec![TimeInterval::full(period)]);
    }
    if out.len() > 1 && out[0].start <= 0.0 && out.last().unwrap().end >= period {
        let first = out.remove(0);
        out.last_mut().unwrap().end = first.end;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::random_fifo;
    use crate::ttf::DEFAULT_PERIOD as P;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(points: &[(f64, f64)]) -> Ttf {
        Ttf::new(points.iter().map(|&(a, v)| Point::new(a, v)).collect(), P).unwrap()
    }

    fn sawtooth() -> Ttf {
        let pts: Vec<Point> = (0..200).map(|i| Point::new(i as f64 * 432.0, if i % 2 == 0 { 100.0 } else { 103.0 + (i % 7) as f64 })).collect();
        Ttf::new(pts, P).unwrap()
    }

    #[test]
    fn dp_examples() {
        let two = f(&[(0.0, 10.0), (43200.0, 20.0)]);
        assert_eq!(douglas_peucker(&two, 1.0), two);
        let triple = f(&[(0.0, 10.0), (100.0, 11.0), (200.0, 12.0), (300.0, 10.5)]);
        let dp = douglas_peucker(&triple, 0.1);
        assert!(!dp.points().iter().any(|p| p.at == 100.0));
    }

    #[test]
    fn dp_error_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = random_fifo(&mut rng, 10_000, 100.0, 60.0);
        let dp = douglas_peucker(&g, 1.0);
        assert!(dp.len() < g.len());
        let mut orig = g.points().iter().map(|p| p.at);
        assert!(dp.points().iter().all(|p| orig.any(|a| a == p.at)));
        for _ in 0..100_000 {
            let t: f64 = rng.gen_range(0.0..P);
            assert!((dp.eval(t) - g.eval(t)).abs() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn bound_pair_compresses_smooth_functions() {
        let pts: Vec<Point> = (0..2000).map(|i| {
            let t = i as f64 * P / 2000.0;
            Point::new(t, 600.0 + 300.0 * (t * std::f64::consts::TAU / P).sin())
        }).collect();
        let g = Ttf::new(pts, P).unwrap();
        let b = bound_pair(&g, 1.0);
        assert!(b.lower.len() < g.len() / 10 && b.upper.len() < g.len() / 10);
    }

    #[test]
    fn bound_pair_constant_is_tight() {
        let c = f(&[(0.0, 10.0)]);
        let b = bound_pair(&c, 1.0);
        assert_eq!(b.lower, c);
        assert_eq!(b.upper, c);
        let two = f(&[(0.0, 10.0), (43200.0, 20.0)]);
        let b = bound_pair(&two, 1.0);
        assert!(b.lower.len() <= 2 && b.upper.len() <= 2);
    }

    #[test]
    fn bound_pair_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for g in [sawtooth(), random_fifo(&mut rng, 500, 50.0, 500.0)] {
            let b = bound_pair(&g, 1.0);
            assert!(b.lower.is_fifo() && b.upper.is_fifo());
            for _ in 0..100_000 {
                let t: f64 = rng.gen_range(0.0..P);
                let v = g.eval(t);
                assert!(b.lower.eval(t) <= v + 1e-9 && v <= b.upper.eval(t) + 1e-9);
                assert!(b.upper.eval(t) - b.lower.eval(t) <= 2.0 + 1e-9);
            }
        }
    }

    #[test]
    fn link_bounds_examples() {
        let a = BoundPair::new(f(&[(0.0, 9.0)]), f(&[(0.0, 11.0)])).unwrap();
        let b = BoundPair::new(f(&[(0.0, 19.0)]), f(&[(0.0, 21.0)])).unwrap();
        let l = link_bounds(&a, &b).unwrap();
        assert_eq!(l.lower.eval(0.0), 28.0);
        assert_eq!(l.upper.eval(0.0), 32.0);
        assert!(!l.exact);
        let e = link_bounds(&BoundPair::exact(f(&[(0.0, 1.0)])), &BoundPair::exact(f(&[(0.0, 2.0), (100.0, 3.0)]))).unwrap();
        assert!(e.exact);
        assert_eq!(e.lower, f(&[(0.0, 1.0)]).link(&f(&[(0.0, 2.0), (100.0, 3.0)])).unwrap());
    }

    #[test]
    fn linked_bounds_contain_exact_link() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let x = random_fifo(&mut rng, 300, 30.0, 200.0);
            let y = random_fifo(&mut rng, 300, 30.0, 200.0);
            let exact = x.link(&y).unwrap();
            let l = link_bounds(&bound_pair(&x, 1.0), &bound_pair(&y, 1.0)).unwrap();
            for _ in 0..10_000 {
                let t: f64 = rng.gen_range(0.0..P);
                let v = exact.eval(t);
                assert!(l.lower.eval(t) <= v + 1e-9 && v <= l.upper.eval(t) + 1e-9);
            }
        }
    }

    #[test]
    fn overlap_window_examples() {
        let pair = |l: f64, u: f64| BoundPair::new(f(&[(0.0, l)]), f(&[(0.0, u)])).unwrap();
        assert!(overlap_windows(&pair(5.0, 6.0), &pair(8.0, 9.0)).unwrap().is_empty());
        assert_eq!(overlap_windows(&pair(5.0, 9.0), &pair(8.0, 12.0)).unwrap(), vec![TimeInterval::full(P)]);
    }

    #[test]
    fn crossings_lie_in_windows() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let x = random_fifo(&mut rng, 200, 100.0, 50.0);
            let y = random_fifo(&mut rng, 200, 100.0, 50.0);
            let windows = overlap_windows(&bound_pair(&x, 1.0), &bound_pair(&y, 1.0)).unwrap();
            let (_, fx, _) = x.merge_intervals(&y).unwrap();
            for iv in fx {
                for t in [iv.start, iv.end] {
                    if t == 0.0 || t == P {
                        continue;
                    }
                    assert!(windows.iter().any(|w| w.contains(t, P) || (w.end - t).abs() < 1e-9), "{t}");
                }
            }
        }
    }
}

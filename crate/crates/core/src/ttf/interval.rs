use super::TIE_EPS;

/// Half-open time interval `[start, end)` interpreted modulo the period.
/// `start > end` denotes an interval wrapping across the period boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeInterval {
    pub start: f64,
    pub end: f64,
}

impl TimeInterval {
    pub const fn new(start: f64, end: f64) -> Self {
        TimeInterval { start, end }
    }

    pub fn full(period: f64) -> Self {
        TimeInterval::new(0.0, period)
    }

    pub fn wraps(&self) -> bool {
        self.start > self.end
    }

    pub fn length(&self, period: f64) -> f64 {
        if self.wraps() {
            period - self.start + self.end
        } else {
            self.end - self.start
        }
    }

    pub fn contains(&self, t: f64, period: f64) -> bool {
        let x = t.rem_euclid(period);
        if self.wraps() {
            x >= self.start || x < self.end
        } else {
            self.start <= x && x < self.end
        }
    }
}

/// Which of two merged functions is used on a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    First,
    Second,
}

/// A piece of a merge result. `gap` is the largest advantage of the winner over the
/// loser observed on the piece; it decides whether a second-argument win is real
/// or floating point noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub winner: Winner,
    pub gap: f64,
}

impl Segment {
    pub fn new(start: f64, end: f64, winner: Winner, gap: f64) -> Self {
        Segment { start, end, winner, gap }
    }

    fn len(&self) -> f64 {
        self.end - self.start
    }
}

fn coalesce(segments: &mut Vec<Segment>) {
    let mut out: Vec<Segment> = Vec::with_capacity(segments.len());
    for s in segments.drain(..) {
        if s.end <= s.start && !out.is_empty() {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.winner == s.winner => {
                last.end = s.end;
                last.gap = last.gap.max(s.gap);
            }
            _ => out.push(s),
        }
    }
    *segments = out;
}

/// Normalize raw merge segments tiling `[lo, hi]`:
/// second-argument wins by at most [`TIE_EPS`] go to the first argument,
/// pieces shorter than [`TIE_EPS`] are absorbed by a neighbor and adjacent pieces
/// with the same winner are joined. With `cyclic`, the first and last piece are
/// neighbors through the period boundary.
pub(crate) fn finalize_segments(segments: &mut Vec<Segment>, lo: f64, hi: f64, cyclic: bool) {
    debug_assert!(!segments.is_empty());
    coalesce(segments);
    let n = segments.len();
    if cyclic && n > 1 && segments[0].winner == Winner::Second && segments[n - 1].winner == Winner::Second {
        let gap = segments[0].gap.max(segments[n - 1].gap);
        segments[0].gap = gap;
        segments[n - 1].gap = gap;
    }
    for s in segments.iter_mut() {
        if s.winner == Winner::Second && s.gap <= TIE_EPS {
            s.winner = Winner::First;
            s.gap = 0.0;
        }
    }
    coalesce(segments);

    loop {
        let n = segments.len();
        if n == 1 {
            break;
        }
        let joint_len = |s: &[Segment], i: usize| -> f64 {
            let mut len = s[i].len();
            if cyclic && (i == 0 || i == n - 1) && s[0].winner == s[n - 1].winner {
                len = s[0].len() + s[n - 1].len();
            }
            len
        };
        let tiny = (0..n).find(|&i| joint_len(segments, i) < TIE_EPS);
        match tiny {
            None => break,
            Some(i) => {
                let neighbor = if i > 0 {
                    segments[i - 1].winner
                } else if cyclic {
                    segments[n - 1].winner
                } else {
                    segments[1].winner
                };
                if neighbor == segments[i].winner {
                    // only possible in the cyclic joint case where the whole rest is tiny
                    break;
                }
                segments[i].winner = neighbor;
                segments[i].gap = 0.0;
                coalesce(segments);
            }
        }
    }
    segments[0].start = lo;
    let last = segments.len() - 1;
    segments[last].end = hi;
}

/// Intervals of `[0, period)` won by each argument; a piece touching both ends
/// of the period is reported as one wrapping interval.
pub(crate) fn split_by_winner(segments: &[Segment], period: f64) -> (Vec<TimeInterval>, Vec<TimeInterval>) {
    let mut first = Vec::new();
    let mut second = Vec::new();
    let n = segments.len();
    let wrap_join = n > 1 && segments[0].winner == segments[n - 1].winner;
    for (i, s) in segments.iter().enumerate() {
        if wrap_join && i == 0 {
            continue;
        }
        let iv = if wrap_join && i == n - 1 {
            TimeInterval::new(s.start, segments[0].end)
        } else {
            TimeInterval::new(s.start, s.end)
        };
        let iv = if iv.start == 0.0 && iv.end == period { TimeInterval::full(period) } else { iv };
        match s.winner {
            Winner::First => first.push(iv),
            Winner::Second => second.push(iv),
        }
    }
    (first, second)
}

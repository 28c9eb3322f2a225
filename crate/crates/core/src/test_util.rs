use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::ttf::{Point, Ttf, DEFAULT_PERIOD};

/// Random FIFO function with about `n` breakpoints and values in `[base, base + amp)`.
pub(crate) fn random_fifo(rng: &mut ChaCha8Rng, n: usize, base: f64, amp: f64) -> Ttf {
    let p = DEFAULT_PERIOD;
    let mut ats: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..p)).collect();
    ats[0] = 0.0;
    ats.sort_by(f64::total_cmp);
    ats.dedup_by(|a, b| (*a - *b).abs() < 1.0);
    let mut pts: Vec<Point> = ats.iter().map(|&at| Point::new(at, base + rng.gen_range(0.0..amp))).collect();
    for _ in 0..2 {
        for i in 0..pts.len() {
            let next_at = if i + 1 == pts.len() { p } else { pts[i + 1].at };
            let j = (i + 1) % pts.len();
            let min_next = pts[i].val - (next_at - pts[i].at) * (1.0 - 1e-6);
            if pts[j].val < min_next {
                pts[j].val = min_next;
            }
        }
    }
    Ttf::new(pts, p).unwrap()
}

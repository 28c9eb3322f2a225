//! Scalar customization on the minimum and maximum metrics.

use crate::contraction::AugmentedGraph;
use crate::graph::TdGraph;
use crate::shortcuts::{down, up};

/// Per directed arc scalar weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarBounds {
    pub basic_min: Vec<f64>,
    pub basic_max: Vec<f64>,
    pub perfect_min: Vec<f64>,
    pub perfect_max: Vec<f64>,
    /// Arcs never part of a shortest path: some other path is faster at all times.
    pub removed: Vec<bool>,
    /// Lower triangle closure without removed arcs; bounds the functions the
    /// time-dependent pass actually computes.
    pub own_min: Vec<f64>,
    pub own_max: Vec<f64>,
}

/// Initial weights: the best input arc of each directed arc by `weight`.
pub fn input_weights(aug: &AugmentedGraph, weight: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut w = vec![f64::INFINITY; 2 * aug.num_slots()];
    for s in 0..aug.num_slots() as u32 {
        for &a in aug.up_inputs(s) {
            w[up(s) as usize] = w[up(s) as usize].min(weight(a as usize));
        }
        for &a in aug.down_inputs(s) {
            w[down(s) as usize] = w[down(s) as usize].min(weight(a as usize));
        }
    }
    w
}

/// Lower triangle relaxation in ascending order. Arcs flagged in `skip` stay infinite.
pub fn basic(aug: &AugmentedGraph, mut w: Vec<f64>, skip: Option<&[bool]>) -> Vec<f64> {
    let mut triangles = Vec::new();
    for u in 0..aug.num_nodes() as u32 {
        for s in aug.upward_slots(u) {
            let s = s as u32;
            let (up_s, down_s) = (up(s) as usize, down(s) as usize);
            aug.lower_triangles(u, aug.slot_head(s), &mut triangles);
            for &(_, s_wu, s_wv) in &triangles {
                // u -> w -> v and v -> w -> u
                w[up_s] = w[up_s].min(w[down(s_wu) as usize] + w[up(s_wv) as usize]);
                w[down_s] = w[down_s].min(w[down(s_wv) as usize] + w[up(s_wu) as usize]);
            }
            if let Some(skip) = skip {
                if skip[up_s] {
                    w[up_s] = f64::INFINITY;
                }
                if skip[down_s] {
                    w[down_s] = f64::INFINITY;
                }
            }
        }
    }
    w
}

/// Descending pass over upper and intermediate triangles; the result is the
/// shortest path distance between the endpoints of every arc.
pub fn perfect(aug: &AugmentedGraph, mut w: Vec<f64>) -> Vec<f64> {
    for u in (0..aug.num_nodes() as u32).rev() {
        let slots = aug.upward_slots(u);
        for i in slots.clone() {
            for j in i + 1..slots.end {
                let (si, sj) = (i as u32, j as u32);
                let (v, x) = (aug.slot_head(si), aug.slot_head(sj));
                let t = aug.find_slot(v, x).expect("upward neighborhoods are cliques");
                let (ui, di, uj, dj, ut, dt) = (up(si) as usize, down(si) as usize, up(sj) as usize, down(sj) as usize, up(t) as usize, down(t) as usize);
                // u -> v via x, v -> u via x, u -> x via v, x -> u via v
                w[ui] = w[ui].min(w[uj] + w[dt]);
                w[di] = w[di].min(w[ut] + w[dj]);
                w[uj] = w[uj].min(w[ui] + w[ut]);
                w[dj] = w[dj].min(w[dt] + w[di]);
            }
        }
    }
    w
}

pub fn precustomize(aug: &AugmentedGraph, g: &TdGraph) -> ScalarBounds {
    let ttfs = g.ttfs();
    let in_min = input_weights(aug, |a| ttfs[a].min());
    let in_max = input_weights(aug, |a| ttfs[a].max());
    let basic_min = basic(aug, in_min.clone(), None);
    let basic_max = basic(aug, in_max.clone(), None);
    let perfect_min = perfect(aug, basic_min.clone());
    let perfect_max = perfect(aug, basic_max.clone());
    let removed: Vec<bool> = perfect_max.iter().zip(&basic_min).map(|(p, b)| p < b).collect();
    let own_min = basic(aug, in_min, Some(&removed));
    let own_max = basic(aug, in_max, Some(&removed));
    ScalarBounds { basic_min, basic_max, perfect_min, perfect_max, removed, own_min, own_max }
}

mod common;

use catchup::customization::Params;
use catchup::hierarchy::compute_order;
use catchup::index::CatchupIndex;
use catchup::oracle::{generate, scalar_distances, td_profile_dijkstra, GeneratorParams, TdDijkstra, Topology, PROFILE_BUDGET};
use catchup::shortcuts::{eval, reconstruct_ttf, unpack_path, ArcRef, Scratch};
use catchup::ttf::Profile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::build;


fn assert_same_customization(a: &CatchupIndex, b: &CatchupIndex) {
    let (ca, cb) = (a.customized(), b.customized());
    assert_eq!(ca.removed, cb.removed);
    assert_eq!(ca.lower, cb.lower);
    for arc in 0..ca.upper.len() as u32 {
        let (ua, ub) = (a.upper(arc), b.upper(arc));
        assert!(ua == ub || (ua - ub).abs() <= 1e-6, "arc {arc}: upper {ua} vs {ub}");
        let (xa, xb) = (a.expansions(arc), b.expansions(arc));
        assert_eq!(xa.len(), xb.len(), "arc {arc}: {xa:?} vs {xb:?}");
        for (x, y) in xa.iter().zip(xb) {
            assert_eq!((x.first, x.second), (y.first, y.second), "arc {arc}");
            assert!((x.start - y.start).abs() <= 1e-6, "arc {arc}: switch {} vs {}", x.start, y.start);
        }
    }
}

#[test]
fn approximation_does_not_change_expansions() {
    for seed in 0..4 {
        let gp = GeneratorParams { n: 400, td_fraction: 0.75, seed, topology: if seed % 2 == 0 { Topology::Grid } else { Topology::Planar }, ..Default::default() };
        let exact = build(&gp, usize::MAX, 1.0, 1);
        for (beta, eps) in [(8, 0.1), (8, 1.0), (1000, 1.0)] {
            assert_same_customization(&exact, &build(&gp, beta, eps, 1));
        }
    }
}

#[test]
fn thread_count_does_not_change_bytes() {
    let gp = GeneratorParams { n: 2000, td_fraction: 0.3, seed: 11, ..Default::default() };
    let mut one = Vec::new();
    build(&gp, 8, 1.0, 1).write_to(&mut one).unwrap();
    let mut many = Vec::new();
    build(&gp, 8, 1.0, 8).write_to(&mut many).unwrap();
    assert!(one == many);
}

#[test]
fn constant_metric_gives_scalar_distances() {
    let gp = GeneratorParams { n: 500, td_fraction: 0.0, seed: 2, topology: Topology::Planar, ..Default::default() };
    let index = build(&gp, 1000, 1.0, 1);
    let g = index.graph();
    let aug = index.aug();
    let order = index.order();
    for u in 0..aug.num_nodes() as u32 {
        let dist = scalar_distances(g, order.node(u), |a| g.ttf(a).min());
        let back: Vec<f64> = aug.upward_heads(u).iter().map(|&v| scalar_distances(g, order.node(v), |a| g.ttf(a).min())[order.node(u) as usize]).collect();
        for (i, s) in aug.upward_slots(u).enumerate() {
            let v = aug.slot_head(s as u32);
            for (arc, expected) in [(2 * s as u32, dist[order.node(v) as usize]), (2 * s as u32 + 1, back[i])] {
                assert_eq!(index.expansions(arc).len(), 1);
                if index.removed(arc) {
                    continue;
                }
                assert_eq!(index.lower(arc), index.upper(arc));
                assert!((index.lower(arc) - expected).abs() < 1e-9, "arc {arc}: {} vs {expected}", index.lower(arc));
            }
        }
    }
}

#[test]
fn bounds_contain_profiles() {
    for seed in 0..3 {
        let gp = GeneratorParams { n: 40, td_fraction: 0.75, seed, ..Default::default() };
        let index = build(&gp, 8, 1.0, 1);
        let aug = index.aug();
        let order = index.order();
        for s in 0..aug.num_slots() as u32 {
            let (u, v) = (order.node(aug.slot_tail(s)), order.node(aug.slot_head(s)));
            for (arc, from, to) in [(2 * s, u, v), (2 * s + 1, v, u)] {
                let Profile::Ttf(f) = td_profile_dijkstra(index.graph(), from, to, PROFILE_BUDGET).unwrap() else { panic!() };
                if index.removed(arc) {
                    continue;
                }
                assert!(index.lower(arc) <= f.min() + 1e-9, "arc {arc}: {} > {}", index.lower(arc), f.min());
                assert!(f.max() <= index.upper(arc) + 1e-6, "arc {arc}: {} > {}", f.max(), index.upper(arc));
            }
        }
    }
}

#[test]
fn shortcut_evaluation_is_consistent() {
    let gp = GeneratorParams { n: 300, td_fraction: 0.75, seed: 4, topology: Topology::Planar, ..Default::default() };
    let index = build(&gp, 8, 1.0, 1);
    let g = index.graph();
    let order = index.order();
    let mut dijkstra = TdDijkstra::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let tails = index.aug().slot_tails();
    let mut scratch = Scratch::new();
    for arc in 0..2 * index.aug().num_slots() as u32 {
        if index.removed(arc) {
            continue;
        }
        let s = arc / 2;
        let (mut u, mut v) = (order.node(tails[s as usize]), order.node(index.aug().slot_head(s)));
        if arc % 2 == 1 {
            std::mem::swap(&mut u, &mut v);
        }
        let f = reconstruct_ttf(&index, ArcRef::Shortcut(arc), &mut scratch, None);
        for _ in 0..5 {
            let t = rng.gen_range(0.0..g.period());
            let tt = eval(&index, ArcRef::Shortcut(arc), t);
            let best = dijkstra.query(u, v, t) - t;
            assert!(tt >= best - 1e-9);
            if tt.is_finite() {
                let path = unpack_path(&index, ArcRef::Shortcut(arc), t).unwrap();
                assert!((g.path_travel_time(&path, t) - tt).abs() <= 1e-9);
                let f = f.as_ref().unwrap();
                assert!((f.eval(t) - tt).abs() <= 1e-6, "arc {arc} at {t}: {} vs {tt}", f.eval(t));
            }
        }
    }
}

#[test]
fn transient_functions_are_dropped() {
    let gp = GeneratorParams { n: 1000, td_fraction: 0.3, seed: 6, ..Default::default() };
    let g = generate(&gp);
    let order = compute_order(&g, 6);
    let (index, report) = CatchupIndex::build(g, &order, &Params::default());
    let arcs = 2 * index.aug().num_slots() as u64;
    assert!(report.counters.peak_live_fns > 0);
    assert!(report.counters.peak_live_fns < arcs / 2, "{} of {arcs}", report.counters.peak_live_fns);
}

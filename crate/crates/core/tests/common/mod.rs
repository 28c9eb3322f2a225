#![allow(dead_code)]

use catchup::contraction::contract;
use catchup::customization::Params;
use catchup::graph::{NodeId, TdGraph};
use catchup::hierarchy::{build_elimination_tree, compute_order, NodeOrder};
use catchup::index::CatchupIndex;
use catchup::oracle::{generate, GeneratorParams};
use catchup::ttf::{Point, Ttf};

pub const PERIOD: f64 = 86400.0;

pub fn build(gp: &GeneratorParams, beta: usize, epsilon: f64, threads: usize) -> CatchupIndex {
    let g = generate(gp);
    let order = compute_order(&g, gp.seed);
    CatchupIndex::build(g, &order, &Params { beta, epsilon, threads }).0
}

/// Equal within 1e-9 relative, or both infinite.
pub fn same(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

pub struct ResettleInstance {
    pub index: CatchupIndex,
    pub s: NodeId,
    pub w1: NodeId,
    pub t: NodeId,
    pub path: Vec<NodeId>,
}

/// Hand-built instance where an understated lower bound on the last arc of a
/// detour makes the A* query settle w1 over the detour first and again once
/// the faster approach over w2 is unpacked. Zero travel times are replaced by
/// 0.001 and two arcs are slower at departure 0 than elsewhere, so that the
/// interval query keeps v1 in the corridor.
pub fn resettle_instance() -> ResettleInstance {
    let [s, w2, w1, v1, v2, v3, t] = [0, 1, 2, 3, 4, 5, 6];
    let c = |x: f64| Ttf::constant(x, PERIOD).unwrap();
    let ramp = |from: f64, to: f64| Ttf::new(vec![Point { at: 0.0, val: from }, Point { at: PERIOD / 2.0, val: to }], PERIOD).unwrap();
    let arcs = vec![
        (s, w2, c(1.0)),
        (w2, w1, c(1.0)),
        (s, v1, c(1.0)),
        (s, v3, ramp(1.0, 3.0)),
        (v1, w1, ramp(2.0, 0.5)),
        (w1, v2, c(10.0)),
        (w1, v3, c(0.001)),
        (v2, t, c(10.0)),
        (v3, t, c(100.0)),
    ];
    let g = TdGraph::from_arcs(7, arcs, PERIOD).unwrap();
    let order = NodeOrder::from_node_order(vec![w2, w1, s, v1, v2, v3, t]).unwrap();
    let aug = contract(&g, &order);
    let etree = build_elimination_tree(&aug);
    let (index, _) = CatchupIndex::customize(g.clone(), aug.clone(), etree.clone(), &Params::default());
    let mut custom = index.customized().clone();
    let slot = aug.find_slot(order.rank(v3), order.rank(t)).unwrap();
    custom.lower[2 * slot as usize] = 0.0;
    let index = CatchupIndex::from_parts(g, aug, etree, custom, Params::default());
    ResettleInstance { index, s, w1, t, path: vec![s, w2, w1, v2, t] }
}

//! Metric independent contraction into the augmented graph.
//!
//! Nodes are identified by rank inside the augmented graph. Every undirected
//! arc slot `{u, v}` with `u < v` carries two directed arcs: *up* (`u -> v`)
//! and *down* (`v -> u`).

use crate::graph::{ArcId, NodeId, TdGraph};
use crate::hierarchy::NodeOrder;

pub type SlotId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedGraph {
    order: NodeOrder,
    // upward CSR by tail rank, heads ascending
    up_first: Vec<u32>,
    up_head: Vec<u32>,
    // incoming upward slots by head rank: lower neighbor and slot, ascending by lower neighbor
    down_first: Vec<u32>,
    down_tail: Vec<u32>,
    down_slot: Vec<SlotId>,
    // input arcs corresponding to each directed arc
    up_input_first: Vec<u32>,
    up_input: Vec<ArcId>,
    down_input_first: Vec<u32>,
    down_input: Vec<ArcId>,
}

/// Upward neighborhoods (by rank, sorted) after contracting along `order`.
pub(crate) fn contract_neighborhoods(adj_by_rank: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    let n = adj_by_rank.len();
    let mut up: Vec<Vec<u32>> = adj_by_rank;
    for u in 0..n {
        let mut list = std::mem::take(&mut up[u]);
        list.retain(|&v| v as usize > u);
        list.sort_unstable();
        list.dedup();
        if let Some((&lowest, rest)) = list.split_first() {
            up[lowest as usize].extend_from_slice(rest);
        }
        up[u] = list;
    }
    up
}

pub fn contract(g: &TdGraph, order: &NodeOrder) -> AugmentedGraph {
    let n = g.num_nodes();
    let mut adj = vec![Vec::new(); n];
    for v in 0..n as NodeId {
        for (_, h) in g.out_arcs(v) {
            let (ru, rv) = (order.rank(v), order.rank(h));
            if ru != rv {
                adj[ru.min(rv) as usize].push(ru.max(rv));
            }
        }
    }
    let up = contract_neighborhoods(adj);
    AugmentedGraph::from_upward(order.clone(), &up, g)
}

impl AugmentedGraph {
    fn from_upward(order: NodeOrder, up: &[Vec<u32>], g: &TdGraph) -> Self {
        let n = up.len();
        let mut up_first = Vec::with_capacity(n + 1);
        up_first.push(0u32);
        let mut up_head = Vec::new();
        for list in up {
            up_head.extend_from_slice(list);
            up_first.push(up_head.len() as u32);
        }
        let m = up_head.len();
        let mut down_count = vec![0u32; n + 1];
        for &h in &up_head {
            down_count[h as usize + 1] += 1;
        }
        for i in 0..n {
            down_count[i + 1] += down_count[i];
        }
        let down_first = down_count.clone();
        let mut fill = down_count;
        let mut down_tail = vec![0u32; m];
        let mut down_slot = vec![0u32; m];
        for u in 0..n {
            for slot in up_first[u] as usize..up_first[u + 1] as usize {
                let h = up_head[slot] as usize;
                let pos = fill[h] as usize;
                down_tail[pos] = u as u32;
                down_slot[pos] = slot as u32;
                fill[h] += 1;
            }
        }

        let mut aug = AugmentedGraph {
            order,
            up_first,
            up_head,
            down_first,
            down_tail,
            down_slot,
            up_input_first: Vec::new(),
            up_input: Vec::new(),
            down_input_first: Vec::new(),
            down_input: Vec::new(),
        };
        let mut up_lists: Vec<Vec<ArcId>> = vec![Vec::new(); m];
        let mut down_lists: Vec<Vec<ArcId>> = vec![Vec::new(); m];
        for v in 0..g.num_nodes() as NodeId {
            for (arc, h) in g.out_arcs(v) {
                let (ru, rv) = (aug.order.rank(v), aug.order.rank(h));
                if ru < rv {
                    up_lists[aug.find_slot(ru, rv).unwrap() as usize].push(arc);
                } else if rv < ru {
                    down_lists[aug.find_slot(rv, ru).unwrap() as usize].push(arc);
                }
            }
        }
        (aug.up_input_first, aug.up_input) = flatten(up_lists);
        (aug.down_input_first, aug.down_input) = flatten(down_lists);
        aug
    }

    pub fn order(&self) -> &NodeOrder {
        &self.order
    }

    pub fn num_nodes(&self) -> usize {
        self.up_first.len() - 1
    }

    /// Number of undirected arc slots.
    pub fn num_slots(&self) -> usize {
        self.up_head.len()
    }

    pub fn up_first(&self) -> &[u32] {
        &self.up_first
    }

    pub fn up_heads(&self) -> &[u32] {
        &self.up_head
    }

    /// Slots whose lower endpoint is `rank`.
    #[inline]
    pub fn upward_slots(&self, rank: u32) -> std::ops::Range<usize> {
        self.up_first[rank as usize] as usize..self.up_first[rank as usize + 1] as usize
    }

    /// Upward neighbors of `rank`, ascending.
    #[inline]
    pub fn upward_heads(&self, rank: u32) -> &[u32] {
        &self.up_head[self.upward_slots(rank)]
    }

    /// Lower neighbors of `rank` with the connecting slots, ascending by neighbor.
    #[inline]
    pub fn downward(&self, rank: u32) -> (&[u32], &[SlotId]) {
        let r = self.down_first[rank as usize] as usize..self.down_first[rank as usize + 1] as usize;
        (&self.down_tail[r.clone()], &self.down_slot[r])
    }

    #[inline]
    pub fn slot_head(&self, slot: SlotId) -> u32 {
        self.up_head[slot as usize]
    }

    /// Lower endpoint of a slot.
    pub fn slot_tail(&self, slot: SlotId) -> u32 {
        (self.up_first.partition_point(|&f| f as usize <= slot as usize) - 1) as u32
    }

    /// Lower endpoint of every slot.
    pub fn slot_tails(&self) -> Vec<u32> {
        let mut tails = vec![0; self.num_slots()];
        for u in 0..self.num_nodes() {
            for s in self.upward_slots(u as u32) {
                tails[s] = u as u32;
            }
        }
        tails
    }

    pub fn find_slot(&self, lower: u32, higher: u32) -> Option<SlotId> {
        let r = self.upward_slots(lower);
        self.up_head[r.clone()].binary_search(&higher).ok().map(|i| (r.start + i) as SlotId)
    }

    /// Input arcs represented by the up direction of `slot`.
    pub fn up_inputs(&self, slot: SlotId) -> &[ArcId] {
        &self.up_input[self.up_input_first[slot as usize] as usize..self.up_input_first[slot as usize + 1] as usize]
    }

    /// Input arcs represented by the down direction of `slot`.
    pub fn down_inputs(&self, slot: SlotId) -> &[ArcId] {
        &self.down_input[self.down_input_first[slot as usize] as usize..self.down_input_first[slot as usize + 1] as usize]
    }

    /// Lower triangles of the slot `(u, v)`: middle nodes `w < u` adjacent to
    /// both, reported as `(w, slot wu, slot wv)` ascending by `w`.
    pub fn lower_triangles(&self, u: u32, v: u32, out: &mut Vec<(u32, SlotId, SlotId)>) {
        out.clear();
        let (tu, su) = self.downward(u);
        let (tv, sv) = self.downward(v);
        let (mut i, mut j) = (0, 0);
        while i < tu.len() && j < tv.len() {
            match tu[i].cmp(&tv[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push((tu[i], su[i], sv[j]));
                    i += 1;
                    j += 1;
                }
            }
        }
    }

    pub(crate) fn raw_parts(&self) -> [&[u32]; 6] {
        [&self.up_first, &self.up_head, &self.up_input_first, &self.up_input, &self.down_input_first, &self.down_input]
    }

    /// Rebuild from serialized parts; validity is checked by the caller's format checks.
    pub(crate) fn from_raw_parts(order: NodeOrder, parts: [Vec<u32>; 6]) -> Result<Self, String> {
        let [up_first, up_head, up_input_first, up_input, down_input_first, down_input] = parts;
        let n = order.len();
        if up_first.len() != n + 1 || up_first[0] != 0 || up_first.windows(2).any(|w| w[0] > w[1]) || *up_first.last().unwrap() as usize != up_head.len() {
            return Err("malformed upward offsets".into());
        }
        for u in 0..n {
            let heads = &up_head[up_first[u] as usize..up_first[u + 1] as usize];
            if heads.iter().any(|&h| h as usize <= u || h as usize >= n) || heads.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("malformed upward neighbors of rank {u}"));
            }
        }
        let m = up_head.len();
        for (first, list) in [(&up_input_first, &up_input), (&down_input_first, &down_input)] {
            if first.len() != m + 1 || first[0] != 0 || first.windows(2).any(|w| w[0] > w[1]) || *first.last().unwrap() as usize != list.len() {
                return Err("malformed input arc mapping".into());
            }
        }
        let up: Vec<Vec<u32>> = (0..n).map(|u| up_head[up_first[u] as usize..up_first[u + 1] as usize].to_vec()).collect();
        let empty = TdGraph::new(vec![0; n + 1], Vec::new(), Vec::new(), 1.0).unwrap();
        let mut aug = Self::from_upward(order, &up, &empty);
        aug.up_input_first = up_input_first;
        aug.up_input = up_input;
        aug.down_input_first = down_input_first;
        aug.down_input = down_input;
        Ok(aug)
    }
}

fn flatten(lists: Vec<Vec<ArcId>>) -> (Vec<u32>, Vec<ArcId>) {
    let mut first = Vec::with_capacity(lists.len() + 1);
    first.push(0);
    let mut flat = Vec::new();
    for l in lists {
        flat.extend(l);
        first.push(flat.len() as u32);
    }
    (first, flat)
}

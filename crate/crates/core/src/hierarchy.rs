//! Node orders from nested dissection and the elimination tree.

use std::collections::{BTreeSet, VecDeque};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::contraction::AugmentedGraph;
use crate::graph::{NodeId, TdGraph};

pub const NO_PARENT: u32 = u32::MAX;

/// Cells up to this size are ordered by greedy fill-in minimization.
const CELL_SIZE: usize = 64;
/// Maximum fraction of a cell allowed on one side of a separator.
const BALANCE: f64 = 0.6;

#[derive(Debug, Error)]
pub enum OrderError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("order file has {found} entries, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error("rank {rank} out of range")]
    OutOfRange { rank: u32 },
    #[error("not a permutation: rank {duplicate} assigned twice, rank {missing} missing")]
    NotPermutation { duplicate: u32, missing: u32 },
}

/// A node order; rank `n - 1` is the most important node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeOrder {
    rank: Vec<u32>,
    node_at_rank: Vec<u32>,
}

impl NodeOrder {
    pub fn from_ranks(rank: Vec<u32>) -> Result<Self, OrderError> {
        let n = rank.len();
        let mut node_at_rank = vec![u32::MAX; n];
        let mut duplicate = None;
        for (v, &r) in rank.iter().enumerate() {
            if r as usize >= n {
                return Err(OrderError::OutOfRange { rank: r });
            }
            if node_at_rank[r as usize] != u32::MAX {
                duplicate.get_or_insert(r);
            } else {
                node_at_rank[r as usize] = v as u32;
            }
        }
        if let Some(duplicate) = duplicate {
            let missing = node_at_rank.iter().position(|&v| v == u32::MAX).unwrap() as u32;
            return Err(OrderError::NotPermutation { duplicate, missing });
        }
        Ok(NodeOrder { rank, node_at_rank })
    }

    /// Build from the nodes listed from least to most important.
    pub fn from_node_order(nodes: Vec<NodeId>) -> Result<Self, OrderError> {
        let mut rank = vec![u32::MAX; nodes.len()];
        for (r, &v) in nodes.iter().enumerate() {
            if v as usize >= nodes.len() {
                return Err(OrderError::OutOfRange { rank: v });
            }
            rank[v as usize] = r as u32;
        }
        if rank.contains(&u32::MAX) {
            // some node is listed twice; report it through the rank check
            let mut seen = vec![false; nodes.len()];
            let duplicate = nodes.iter().find(|&&v| std::mem::replace(&mut seen[v as usize], true)).copied().unwrap();
            let missing = seen.iter().position(|&s| !s).unwrap() as u32;
            return Err(OrderError::NotPermutation { duplicate, missing });
        }
        Self::from_ranks(rank)
    }

    pub fn identity(n: usize) -> Self {
        NodeOrder { rank: (0..n as u32).collect(), node_at_rank: (0..n as u32).collect() }
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }

    #[inline]
    pub fn rank(&self, node: NodeId) -> u32 {
        self.rank[node as usize]
    }

    #[inline]
    pub fn node(&self, rank: u32) -> NodeId {
        self.node_at_rank[rank as usize]
    }

    pub fn ranks(&self) -> &[u32] {
        &self.rank
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let bytes: Vec<u8> = self.rank.iter().flat_map(|r| r.to_le_bytes()).collect();
        fs::write(path, bytes)
    }

    pub fn load(path: impl AsRef<Path>, n: usize) -> Result<Self, OrderError> {
        let bytes = fs::read(path)?;
        if bytes.len() != n * 4 {
            return Err(OrderError::Length { expected: n, found: bytes.len() / 4 });
        }
        let rank = bytes.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
        Self::from_ranks(rank)
    }
}

/// Undirected simple graph underlying `g`.
pub(crate) fn undirected_adjacency(g: &TdGraph) -> Vec<Vec<NodeId>> {
    let mut adj = vec![Vec::new(); g.num_nodes()];
    for v in 0..g.num_nodes() as NodeId {
        for (_, h) in g.out_arcs(v) {
            if h != v {
                adj[v as usize].push(h);
                adj[h as usize].push(v);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Nested dissection order. Components are ordered independently; separators
/// come from BFS level sets grown from a pseudo-peripheral node.
pub fn compute_order(g: &TdGraph, seed: u64) -> NodeOrder {
    compute_order_from_adjacency(&undirected_adjacency(g), seed)
}

pub fn compute_order_from_adjacency(adj: &[Vec<NodeId>], seed: u64) -> NodeOrder {
    let n = adj.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dissector = Dissector { adj, mark: vec![0; n], stamp: 0, dist: vec![u32::MAX; n] };
    let mut order = Vec::with_capacity(n);
    let all: Vec<NodeId> = (0..n as NodeId).collect();
    // explicit stack of cells; a cell is either dissected or emitted
    enum Task {
        Cell(Vec<NodeId>),
        Emit(Vec<NodeId>),
    }
    let mut stack = vec![Task::Cell(all)];
    while let Some(task) = stack.pop() {
        match task {
            Task::Emit(nodes) => order.extend(nodes),
            Task::Cell(nodes) => {
                let components = dissector.components(&nodes);
                if components.len() > 1 {
                    for c in components.into_iter().rev() {
                        stack.push(Task::Cell(c));
                    }
                    continue;
                }
                if nodes.len() <= CELL_SIZE {
                    order.extend(dissector.min_fill_order(&nodes));
                    continue;
                }
                let (a, b, sep) = dissector.bisect(&nodes, &mut rng);
                stack.push(Task::Emit(sep));
                stack.push(Task::Cell(b));
                stack.push(Task::Cell(a));
            }
        }
    }
    NodeOrder::from_node_order(order).expect("dissection visits every node once")
}

struct Dissector<'a> {
    adj: &'a [Vec<NodeId>],
    mark: Vec<u32>,
    stamp: u32,
    dist: Vec<u32>,
}

impl Dissector<'_> {
    fn set_members(&mut self, nodes: &[NodeId]) -> u32 {
        self.stamp += 1;
        for &v in nodes {
            self.mark[v as usize] = self.stamp;
        }
        self.stamp
    }

    fn components(&mut self, nodes: &[NodeId]) -> Vec<Vec<NodeId>> {
        let member = self.set_members(nodes);
        self.stamp += 1;
        let seen = self.stamp;
        let mut out = Vec::new();
        for &s in nodes {
            if self.mark[s as usize] != member {
                continue;
            }
            let mut comp = vec![s];
            self.mark[s as usize] = seen;
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                i += 1;
                for &w in &self.adj[v as usize] {
                    if self.mark[w as usize] == member {
                        self.mark[w as usize] = seen;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// BFS within the cell marked `member`; returns nodes by level.
    fn bfs_levels(&mut self, start: NodeId, member: u32) -> Vec<Vec<NodeId>> {
        let mut levels = vec![vec![start]];
        let mut visited = vec![start];
        self.dist[start as usize] = 0;
        loop {
            let mut next = Vec::new();
            for &v in levels.last().unwrap() {
                for &w in &self.adj[v as usize] {
                    if self.mark[w as usize] == member && self.dist[w as usize] == u32::MAX {
                        self.dist[w as usize] = levels.len() as u32;
                        visited.push(w);
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        for v in visited {
            self.dist[v as usize] = u32::MAX;
        }
        levels
    }

    /// Split a connected cell into two sides and a separating node set.
    fn bisect(&mut self, nodes: &[NodeId], rng: &mut ChaCha8Rng) -> (Vec<NodeId>, Vec<NodeId>, Vec<NodeId>) {
        let member = self.set_members(nodes);
        let start = nodes[rng.gen_range(0..nodes.len())];
        // two sweeps to find a pseudo-peripheral start node
        let far = *self.bfs_levels(start, member).last().unwrap().iter().min().unwrap();
        let levels = self.bfs_levels(far, member);
        let n = nodes.len();
        let limit = (BALANCE * n as f64).floor() as usize;

        if levels.len() < 3 {
            let sep = levels[1..].concat();
            return (levels[0].clone(), Vec::new(), sep);
        }
        // smallest level that leaves both sides within the balance limit
        let mut best: Option<(usize, (bool, usize, usize))> = None;
        let mut before = 0;
        for k in 1..levels.len() - 1 {
            before += levels[k - 1].len();
            let after = n - before - levels[k].len();
            let key = (before.max(after) > limit, levels[k].len(), before.abs_diff(after));
            if best.as_ref().is_none_or(|(_, b)| key < *b) {
                best = Some((k, key));
            }
        }
        let sep_level = best.unwrap().0;
        let mut side_a: Vec<NodeId> = levels[..sep_level].concat();
        let mut side_b: Vec<NodeId> = levels[sep_level + 1..].concat();
        let mut sep = levels[sep_level].clone();

        // separator nodes without neighbors on one side move to the other side
        const SIDE_A: u32 = 1;
        const SIDE_B: u32 = 2;
        self.stamp += 3;
        let base = self.stamp - 3;
        for &v in &side_a {
            self.mark[v as usize] = base + SIDE_A;
        }
        for &v in &side_b {
            self.mark[v as usize] = base + SIDE_B;
        }
        let mut keep = Vec::with_capacity(sep.len());
        for &v in &sep {
            let touches = |side: u32| self.adj[v as usize].iter().any(|&w| self.mark[w as usize] == base + side);
            let (ta, tb) = (touches(SIDE_A), touches(SIDE_B));
            if !tb && (side_a.len() <= side_b.len() || ta) {
                self.mark[v as usize] = base + SIDE_A;
                side_a.push(v);
            } else if !ta {
                self.mark[v as usize] = base + SIDE_B;
                side_b.push(v);
            } else {
                keep.push(v);
            }
        }
        sep = keep;
        side_a.sort_unstable();
        side_b.sort_unstable();
        sep.sort_unstable();
        (side_a, side_b, sep)
    }

    /// Greedy elimination of a small cell by fewest fill-in arcs. Ties prefer
    /// nodes far from the cell's center, then smaller ids.
    fn min_fill_order(&mut self, nodes: &[NodeId]) -> Vec<NodeId> {
        let member = self.set_members(nodes);
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        let nodes = &sorted[..];
        let ecc: Vec<usize> = nodes.iter().map(|&v| self.bfs_levels(v, member).len() - 1).collect();
        // neighborhoods include nodes outside the cell, which are eliminated later
        let mut nb: Vec<BTreeSet<NodeId>> = nodes.iter().map(|&v| self.adj[v as usize].iter().copied().collect()).collect();
        let mut eliminated = vec![false; nodes.len()];
        let mut order = Vec::with_capacity(nodes.len());
        let idx = |v: NodeId| nodes.binary_search(&v).ok();
        for _ in 0..nodes.len() {
            let mut best = None;
            let mut best_key = (usize::MAX, 0usize, 0u32);
            for i in 0..nodes.len() {
                if eliminated[i] {
                    continue;
                }
                let list: Vec<NodeId> = nb[i].iter().copied().collect();
                let mut fill = 0;
                for (a, &x) in list.iter().enumerate() {
                    for &y in &list[a + 1..] {
                        let adjacent = match idx(x) {
                            Some(j) => nb[j].contains(&y),
                            None => match idx(y) {
                                Some(j) => nb[j].contains(&x),
                                None => self.adj[x as usize].binary_search(&y).is_ok(),
                            },
                        };
                        if !adjacent {
                            fill += 1;
                        }
                    }
                }
                // smaller key wins: fill, then larger eccentricity, then id
                let key = (fill, usize::MAX - ecc[i], nodes[i]);
                if key < best_key {
                    best_key = key;
                    best = Some(i);
                }
            }
            let i = best.unwrap();
            eliminated[i] = true;
            let v = nodes[i];
            order.push(v);
            let list: Vec<NodeId> = nb[i].iter().copied().collect();
            for &x in &list {
                if let Some(j) = idx(x) {
                    nb[j].remove(&v);
                    for &y in &list {
                        if y != x {
                            nb[j].insert(y);
                        }
                    }
                }
            }
        }
        order
    }
}

/// Parent of every node (by rank) in the elimination tree: its lowest ranked
/// upward neighbor, or [`NO_PARENT`] for roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationTree {
    parent: Vec<u32>,
}

impl EliminationTree {
    pub fn from_parents(parent: Vec<u32>) -> Self {
        EliminationTree { parent }
    }

    pub fn parent(&self, rank: u32) -> Option<u32> {
        let p = self.parent[rank as usize];
        (p != NO_PARENT).then_some(p)
    }

    pub fn parents(&self) -> &[u32] {
        &self.parent
    }

    /// Ranks on the path from `rank` to its root, starting with `rank`.
    pub fn ancestors(&self, rank: u32) -> impl Iterator<Item = u32> + '_ {
        std::iter::successors(Some(rank), move |&r| self.parent(r))
    }

    /// Children lists, each sorted ascending.
    pub fn children(&self) -> Vec<Vec<u32>> {
        let mut children = vec![Vec::new(); self.parent.len()];
        for (v, &p) in self.parent.iter().enumerate() {
            if p != NO_PARENT {
                children[p as usize].push(v as u32);
            }
        }
        children
    }

    /// Subtree sizes by rank.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![1usize; self.parent.len()];
        for v in 0..self.parent.len() {
            if let Some(p) = self.parent(v as u32) {
                size[p as usize] += size[v];
            }
        }
        size
    }

    /// Depth of the deepest node, counted in nodes.
    pub fn height(&self) -> usize {
        let mut depth = vec![0usize; self.parent.len()];
        let mut best = 0;
        for v in (0..self.parent.len()).rev() {
            depth[v] = self.parent(v as u32).map_or(1, |p| depth[p as usize] + 1);
            best = best.max(depth[v]);
        }
        best
    }
}

pub fn build_elimination_tree(aug: &AugmentedGraph) -> EliminationTree {
    let parent = (0..aug.num_nodes() as u32)
        .map(|r| aug.upward_heads(r).first().copied().unwrap_or(NO_PARENT))
        .collect();
    EliminationTree { parent }
}

/// BFS over upward arcs; used to check that ancestors form the search space.
pub fn upward_reachable(aug: &AugmentedGraph, rank: u32) -> Vec<u32> {
    let mut seen = BTreeSet::from([rank]);
    let mut queue = VecDeque::from([rank]);
    while let Some(v) = queue.pop_front() {
        for &h in aug.upward_heads(v) {
            if seen.insert(h) {
                queue.push_back(h);
            }
        }
    }
    seen.into_iter().collect()
}

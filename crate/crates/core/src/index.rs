//! The query index: augmented graph, elimination tree, bounds and expansions,
//! plus the input graph whose functions the expansions refer to.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::contraction::{contract, AugmentedGraph};
use crate::customization::{customize, Customized, Params, Report};
use crate::graph::{read_exact, read_f64, read_f64s, read_u32, read_u32s, write_f64, write_u32, ArcId, GraphError, TdGraph};
use crate::hierarchy::{build_elimination_tree, EliminationTree, NodeOrder};
use crate::shortcuts::{Expansion, ExpansionStore, ArcRef, Step, UnpackSource};
use crate::ttf::Ttf;

const MAGIC: &[u8; 4] = b"CTCI";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error(transparent)]
    Format(#[from] GraphError),
    #[error("index was built for a graph with {expected} nodes and {expected_arcs} arcs, got {found} nodes and {found_arcs} arcs")]
    GraphMismatch { expected: usize, expected_arcs: usize, found: usize, found_arcs: usize },
    #[error("index does not record a graph path")]
    NoGraphPath,
}

impl From<io::Error> for IndexError {
    fn from(e: io::Error) -> Self {
        IndexError::Format(GraphError::Io(e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatchupIndex {
    graph: TdGraph,
    aug: AugmentedGraph,
    etree: EliminationTree,
    custom: Customized,
    params: Params,
    pub seed: u64,
    pub graph_path: Option<PathBuf>,
}

/// Expansion count statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionStats {
    pub arcs: usize,
    pub entries: usize,
    pub mean: f64,
    pub max: usize,
    /// Fraction of arcs with exactly one expansion, in percent.
    pub single_pct: f64,
}

impl CatchupIndex {
    /// Contract along `order` and customize.
    pub fn build(graph: TdGraph, order: &NodeOrder, params: &Params) -> (Self, Report) {
        let aug = contract(&graph, order);
        let etree = build_elimination_tree(&aug);
        Self::customize(graph, aug, etree, params)
    }

    pub fn customize(graph: TdGraph, aug: AugmentedGraph, etree: EliminationTree, params: &Params) -> (Self, Report) {
        let (custom, report) = customize(&aug, &etree, &graph, params);
        let index = CatchupIndex { graph, aug, etree, custom, params: *params, seed: 0, graph_path: None };
        (index, report)
    }

    /// Assemble an index from separately computed parts, e.g. with modified bounds.
    pub fn from_parts(graph: TdGraph, aug: AugmentedGraph, etree: EliminationTree, custom: Customized, params: Params) -> Self {
        assert_eq!(custom.lower.len(), 2 * aug.num_slots(), "bounds do not match the augmented graph");
        CatchupIndex { graph, aug, etree, custom, params, seed: 0, graph_path: None }
    }

    pub fn graph(&self) -> &TdGraph {
        &self.graph
    }

    pub fn aug(&self) -> &AugmentedGraph {
        &self.aug
    }

    pub fn etree(&self) -> &EliminationTree {
        &self.etree
    }

    pub fn order(&self) -> &NodeOrder {
        self.aug.order()
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn customized(&self) -> &Customized {
        &self.custom
    }

    #[inline]
    pub fn lower(&self, arc: u32) -> f64 {
        self.custom.lower[arc as usize]
    }

    #[inline]
    pub fn upper(&self, arc: u32) -> f64 {
        self.custom.upper[arc as usize]
    }

    #[inline]
    pub fn removed(&self, arc: u32) -> bool {
        self.custom.removed[arc as usize]
    }

    #[inline]
    pub fn expansions(&self, arc: u32) -> &[Expansion] {
        self.custom.expansions.of(arc)
    }

    pub fn expansion_stats(&self) -> ExpansionStats {
        let arcs = self.custom.expansions.num_arcs();
        let counts = (0..arcs as u32).map(|a| self.expansions(a).len());
        let (entries, max, single) = counts.fold((0, 0, 0), |(e, m, s), c| (e + c, m.max(c), s + (c == 1) as usize));
        let denom = arcs.max(1) as f64;
        ExpansionStats { arcs, entries, mean: entries as f64 / denom, max, single_pct: 100.0 * single as f64 / denom }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IndexError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        write_u32(w, VERSION)?;
        w.write_all(&(self.params.beta as u64).to_le_bytes())?;
        write_f64(w, self.params.epsilon)?;
        w.write_all(&self.seed.to_le_bytes())?;
        write_f64(w, self.graph.period())?;
        let path = self.graph_path.as_ref().map(|p| p.to_string_lossy().into_owned()).unwrap_or_default();
        write_u32(w, path.len() as u32)?;
        w.write_all(path.as_bytes())?;
        write_u32(w, self.graph.num_nodes() as u32)?;
        write_u32(w, self.graph.num_arcs() as u32)?;
        write_u32s(w, self.order().ranks())?;
        for part in self.aug.raw_parts() {
            write_u32(w, part.len() as u32)?;
            write_u32s(w, part)?;
        }
        write_u32s(w, self.etree.parents())?;
        let c = &self.custom;
        write_u32(w, c.lower.len() as u32)?;
        for &x in c.lower.iter().chain(&c.upper) {
            write_f64(w, x)?;
        }
        w.write_all(&c.removed.iter().map(|&r| r as u8).collect::<Vec<_>>())?;
        write_u32s(w, &c.expansions.first)?;
        for e in &c.expansions.entries {
            write_f64(w, e.start)?;
            write_u32(w, e.first)?;
            write_u32(w, e.second)?;
        }
        Ok(())
    }

    /// Load an index together with its graph, read from `graph_path` or else
    /// from the path recorded in the index.
    pub fn load(path: impl AsRef<Path>, graph_path: Option<&Path>) -> Result<Self, IndexError> {
        let mut r = BufReader::new(File::open(path)?);
        let header = Header::read(&mut r)?;
        let gpath = match graph_path {
            Some(p) => p.to_path_buf(),
            None => header.graph_path.clone().ok_or(IndexError::NoGraphPath)?,
        };
        let graph = TdGraph::load(&gpath)?;
        Self::read_body(&mut r, header, graph)
    }

    pub fn read_from(r: &mut impl Read, graph: TdGraph) -> Result<Self, IndexError> {
        let header = Header::read(r)?;
        Self::read_body(r, header, graph)
    }

    fn read_body(r: &mut impl Read, header: Header, graph: TdGraph) -> Result<Self, IndexError> {
        let n = read_u32(r, "header")? as usize;
        let m = read_u32(r, "header")? as usize;
        if n != graph.num_nodes() || m != graph.num_arcs() || header.period != graph.period() {
            return Err(IndexError::GraphMismatch { expected: n, expected_arcs: m, found: graph.num_nodes(), found_arcs: graph.num_arcs() });
        }
        let bad = |msg: String| IndexError::Format(GraphError::Structure(msg));
        let order = NodeOrder::from_ranks(read_u32s(r, n, "order")?).map_err(|e| bad(e.to_string()))?;
        let mut parts: [Vec<u32>; 6] = Default::default();
        for part in &mut parts {
            let len = read_u32(r, "augmented graph")? as usize;
            *part = read_u32s(r, len, "augmented graph")?;
        }
        if parts[3].iter().chain(&parts[5]).any(|&a| a as usize >= m) {
            return Err(bad("input arc out of range".into()));
        }
        let aug = AugmentedGraph::from_raw_parts(order, parts).map_err(bad)?;
        let parents = read_u32s(r, n, "elimination tree")?;
        let etree = EliminationTree::from_parents(parents);
        let arcs = read_u32(r, "bounds")? as usize;
        if arcs != 2 * aug.num_slots() {
            return Err(bad(format!("{arcs} arcs in bounds, expected {}", 2 * aug.num_slots())));
        }
        let lower = read_f64s(r, arcs, "bounds")?;
        let upper = read_f64s(r, arcs, "bounds")?;
        let mut removed = vec![0u8; arcs];
        read_exact(r, &mut removed, "bounds")?;
        let first = read_u32s(r, arcs + 1, "expansions")?;
        if first[0] != 0 || first.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("every arc needs at least one expansion".into()));
        }
        let total = first[arcs] as usize;
        let mut entries = Vec::with_capacity(total);
        let mut buf = vec![0u8; 16];
        for _ in 0..total {
            read_exact(r, &mut buf, "expansions")?;
            let start = f64::from_le_bytes(buf[0..8].try_into().unwrap());
            let a = u32::from_le_bytes(buf[8..12].try_into().unwrap());
            let b = u32::from_le_bytes(buf[12..16].try_into().unwrap());
            entries.push(Expansion { start, first: a, second: b });
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(IndexError::Format(GraphError::TrailingBytes));
        }
        let custom = Customized { lower, upper, removed: removed.into_iter().map(|x| x != 0).collect(), expansions: ExpansionStore { first, entries } };
        let params = Params { beta: header.beta, epsilon: header.epsilon, threads: 1 };
        Ok(CatchupIndex { graph, aug, etree, custom, params, seed: header.seed, graph_path: header.graph_path })
    }
}

struct Header {
    beta: usize,
    epsilon: f64,
    seed: u64,
    period: f64,
    graph_path: Option<PathBuf>,
}

impl Header {
    fn read(r: &mut impl Read) -> Result<Self, GraphError> {
        let mut magic = [0u8; 4];
        read_exact(r, &mut magic, "header")?;
        if &magic != MAGIC {
            return Err(GraphError::BadMagic);
        }
        let version = read_u32(r, "header")?;
        if version != VERSION {
            return Err(GraphError::Version(version));
        }
        let mut b = [0u8; 8];
        read_exact(r, &mut b, "header")?;
        let beta = u64::from_le_bytes(b).min(usize::MAX as u64) as usize;
        let epsilon = read_f64(r, "header")?;
        read_exact(r, &mut b, "header")?;
        let seed = u64::from_le_bytes(b);
        let period = read_f64(r, "header")?;
        let len = read_u32(r, "header")? as usize;
        let mut path = vec![0u8; len];
        read_exact(r, &mut path, "header")?;
        let path = String::from_utf8(path).map_err(|_| GraphError::Structure("graph path is not utf-8".into()))?;
        let graph_path = (!path.is_empty()).then(|| PathBuf::from(path));
        Ok(Header { beta, epsilon, seed, period, graph_path })
    }
}

fn write_u32s(w: &mut impl Write, xs: &[u32]) -> io::Result<()> {
    let bytes: Vec<u8> = xs.iter().flat_map(|x| x.to_le_bytes()).collect();
    w.write_all(&bytes)
}

impl UnpackSource for CatchupIndex {
    fn period(&self) -> f64 {
        self.graph.period()
    }

    fn input_ttf(&self, arc: ArcId) -> &Ttf {
        self.graph.ttf(arc)
    }

    fn num_steps(&self, arc: ArcRef) -> usize {
        match arc {
            ArcRef::Shortcut(a) => self.expansions(a).len(),
            ArcRef::Input(_) => 1,
            ArcRef::Local(_) => unreachable!("the index has no local arcs"),
        }
    }

    fn step(&self, arc: ArcRef, i: usize) -> (f64, Step) {
        match arc {
            ArcRef::Shortcut(a) => {
                let e = self.expansions(a)[i];
                (e.start, e.step())
            }
            ArcRef::Input(a) => (0.0, Step::Single(ArcRef::Input(a))),
            ArcRef::Local(_) => unreachable!("the index has no local arcs"),
        }
    }
}

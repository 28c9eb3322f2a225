//! Time-dependent road network in CSR layout and its binary file format.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::ttf::{first_fifo_violation, Point, Ttf, TtfError};

pub type NodeId = u32;
pub type ArcId = u32;

const MAGIC: &[u8; 4] = b"CTCH";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic bytes, not a graph file")]
    BadMagic,
    #[error("unsupported graph file version {0}")]
    Version(u32),
    #[error("file truncated while reading {0}")]
    Truncated(&'static str),
    #[error("trailing bytes after graph data")]
    TrailingBytes,
    #[error("invalid structure: {0}")]
    Structure(String),
    #[error("arc {arc}: {source}")]
    Arc { arc: ArcId, source: TtfError },
}

/// Directed graph with one travel time function per arc.
#[derive(Debug, Clone, PartialEq)]
pub struct TdGraph {
    first_out: Vec<u32>,
    head: Vec<NodeId>,
    ttfs: Vec<Ttf>,
    period: f64,
}

impl TdGraph {
    pub fn new(first_out: Vec<u32>, head: Vec<NodeId>, ttfs: Vec<Ttf>, period: f64) -> Result<Self, GraphError> {
        check_csr(&first_out, &head)?;
        if ttfs.len() != head.len() {
            return Err(GraphError::Structure(format!("{} functions for {} arcs", ttfs.len(), head.len())));
        }
        for (arc, f) in ttfs.iter().enumerate() {
            if f.period() != period {
                return Err(GraphError::Arc { arc: arc as ArcId, source: TtfError::PeriodMismatch(f.period(), period) });
            }
        }
        Ok(TdGraph { first_out, head, ttfs, period })
    }

    /// Build from an arc list `(tail, head, ttf)`. Arcs keep their relative order per tail.
    pub fn from_arcs(n: usize, arcs: Vec<(NodeId, NodeId, Ttf)>, period: f64) -> Result<Self, GraphError> {
        let mut arcs = arcs;
        for &(t, h, _) in &arcs {
            if t as usize >= n || h as usize >= n {
                return Err(GraphError::Structure(format!("arc {t}->{h} out of range for {n} nodes")));
            }
        }
        arcs.sort_by_key(|a| a.0);
        let mut first_out = vec![0u32; n + 1];
        for &(t, _, _) in &arcs {
            first_out[t as usize + 1] += 1;
        }
        for i in 0..n {
            first_out[i + 1] += first_out[i];
        }
        let (head, ttfs) = arcs.into_iter().map(|(_, h, f)| (h, f)).unzip();
        Self::new(first_out, head, ttfs, period)
    }

    pub fn num_nodes(&self) -> usize {
        self.first_out.len() - 1
    }

    pub fn num_arcs(&self) -> usize {
        self.head.len()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn first_out(&self) -> &[u32] {
        &self.first_out
    }

    pub fn heads(&self) -> &[NodeId] {
        &self.head
    }

    pub fn ttf(&self, arc: ArcId) -> &Ttf {
        &self.ttfs[arc as usize]
    }

    pub fn ttfs(&self) -> &[Ttf] {
        &self.ttfs
    }

    pub fn head(&self, arc: ArcId) -> NodeId {
        self.head[arc as usize]
    }

    pub fn arc_range(&self, node: NodeId) -> std::ops::Range<usize> {
        self.first_out[node as usize] as usize..self.first_out[node as usize + 1] as usize
    }

    /// Outgoing arcs of `node` as `(arc id, head)`.
    pub fn out_arcs(&self, node: NodeId) -> impl Iterator<Item = (ArcId, NodeId)> + '_ {
        self.arc_range(node).map(move |a| (a as ArcId, self.head[a]))
    }

    /// Tail of every arc.
    pub fn tails(&self) -> Vec<NodeId> {
        let mut tails = vec![0; self.num_arcs()];
        for v in 0..self.num_nodes() {
            for a in self.arc_range(v as NodeId) {
                tails[a] = v as NodeId;
            }
        }
        tails
    }

    /// Travel time along a sequence of arcs when departing at `departure`.
    pub fn path_travel_time(&self, arcs: &[ArcId], departure: f64) -> f64 {
        let mut t = departure;
        for &a in arcs {
            t += self.ttf(a).eval(t);
        }
        t - departure
    }

    /// The ratio `sum(max f - min f) / sum(min f)` in percent over all arcs and
    /// over the time-dependent arcs only.
    pub fn relative_total_delay(&self) -> (f64, f64) {
        let (mut delay, mut base, mut td_base) = (0.0, 0.0, 0.0);
        for f in &self.ttfs {
            let (lo, hi) = (f.min(), f.max());
            delay += hi - lo;
            base += lo;
            if !f.is_constant() {
                td_base += lo;
            }
        }
        let pct = |d: f64, b: f64| if b > 0.0 { 100.0 * d / b } else { 0.0 };
        (pct(delay, base), pct(delay, td_base))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        write_u32(w, VERSION)?;
        write_u32(w, self.num_nodes() as u32)?;
        write_u32(w, self.num_arcs() as u32)?;
        write_f64(w, self.period)?;
        for &x in &self.first_out {
            write_u32(w, x)?;
        }
        for &x in &self.head {
            write_u32(w, x)?;
        }
        let mut first_ipp = 0u32;
        write_u32(w, 0)?;
        for f in &self.ttfs {
            first_ipp += f.len() as u32;
            write_u32(w, first_ipp)?;
        }
        for f in &self.ttfs {
            for p in f.points() {
                write_f64(w, p.at)?;
            }
        }
        for f in &self.ttfs {
            for p in f.points() {
                write_f64(w, p.val)?;
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r)
    }

    /// Parse a graph. Breakpoints must already be canonical, so that saving
    /// the result reproduces the input bytes.
    pub fn read_from(r: &mut impl Read) -> Result<Self, GraphError> {
        let mut magic = [0u8; 4];
        read_exact(r, &mut magic, "header")?;
        if &magic != MAGIC {
            return Err(GraphError::BadMagic);
        }
        let version = read_u32(r, "header")?;
        if version != VERSION {
            return Err(GraphError::Version(version));
        }
        let n = read_u32(r, "header")? as usize;
        let m = read_u32(r, "header")? as usize;
        let period = read_f64(r, "header")?;
        if !(period > 0.0 && period.is_finite()) {
            return Err(GraphError::Structure(format!("bad period {period}")));
        }
        let first_out = read_u32s(r, n + 1, "first_out")?;
        let head = read_u32s(r, m, "head")?;
        check_csr(&first_out, &head)?;
        let first_ipp = read_u32s(r, m + 1, "first_ipp")?;
        if first_ipp[0] != 0 || first_ipp.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GraphError::Structure("first_ipp must start at 0 and give every arc a breakpoint".into()));
        }
        let k = first_ipp[m] as usize;
        let ats = read_f64s(r, k, "ipp_at")?;
        let vals = read_f64s(r, k, "ipp_val")?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(GraphError::TrailingBytes);
        }
        let mut ttfs = Vec::with_capacity(m);
        for arc in 0..m {
            let range = first_ipp[arc] as usize..first_ipp[arc + 1] as usize;
            let points: Vec<Point> = range.map(|i| Point::new(ats[i], vals[i])).collect();
            let f = Ttf::new(points.clone(), period).map_err(|source| GraphError::Arc { arc: arc as ArcId, source })?;
            if f.points() != points.as_slice() {
                return Err(GraphError::Structure(format!("arc {arc}: breakpoints not in canonical form")));
            }
            ttfs.push(f);
        }
        Ok(TdGraph { first_out, head, ttfs, period })
    }
}

/// Problems found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Positivity { arc: ArcId, index: usize },
    Sortedness { arc: ArcId, index: usize },
    Range { arc: ArcId, index: usize },
    Fifo { arc: ArcId, index: usize, slope: f64 },
}

/// Check raw per-arc breakpoints; the report is empty iff every arc is a valid function.
pub fn validate(period: f64, arcs: &[Vec<Point>]) -> Vec<Violation> {
    let mut report = Vec::new();
    for (arc, pts) in arcs.iter().enumerate() {
        let arc = arc as ArcId;
        if pts.is_empty() {
            report.push(Violation::Positivity { arc, index: 0 });
            continue;
        }
        for (index, p) in pts.iter().enumerate() {
            if !(p.val > 0.0 && p.val.is_finite()) {
                report.push(Violation::Positivity { arc, index });
            }
            if !(p.at >= 0.0 && p.at < period) {
                report.push(Violation::Range { arc, index });
            }
            if index > 0 && p.at <= pts[index - 1].at {
                report.push(Violation::Sortedness { arc, index });
            }
        }
        if let Some((index, slope)) = first_fifo_violation(pts, period) {
            report.push(Violation::Fifo { arc, index, slope });
        }
    }
    report
}

impl TdGraph {
    /// Graphs are valid by construction; this reports on the stored functions for symmetry with [`validate`].
    pub fn validate(&self) -> Vec<Violation> {
        let raw: Vec<Vec<Point>> = self.ttfs.iter().map(|f| f.points().to_vec()).collect();
        validate(self.period, &raw)
    }
}

fn check_csr(first_out: &[u32], head: &[NodeId]) -> Result<(), GraphError> {
    let n = first_out.len() - 1;
    if first_out[0] != 0 || first_out.windows(2).any(|w| w[0] > w[1]) || first_out[n] as usize != head.len() {
        return Err(GraphError::Structure("first_out is not a monotone offset array ending at m".into()));
    }
    if let Some(a) = head.iter().position(|&h| h as usize >= n) {
        return Err(GraphError::Structure(format!("head of arc {a} out of range")));
    }
    Ok(())
}

pub(crate) fn write_u32(w: &mut impl Write, x: u32) -> io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

pub(crate) fn write_f64(w: &mut impl Write, x: f64) -> io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

pub(crate) fn read_exact(r: &mut impl Read, buf: &mut [u8], section: &'static str) -> Result<(), GraphError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => GraphError::Truncated(section),
        _ => GraphError::Io(e),
    })
}

pub(crate) fn read_u32(r: &mut impl Read, section: &'static str) -> Result<u32, GraphError> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, section)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_f64(r: &mut impl Read, section: &'static str) -> Result<f64, GraphError> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, section)?;
    Ok(f64::from_le_bytes(b))
}

pub(crate) fn read_u32s(r: &mut impl Read, n: usize, section: &'static str) -> Result<Vec<u32>, GraphError> {
    let mut buf = vec![0u8; n * 4];
    read_exact(r, &mut buf, section)?;
    Ok(buf.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect())
}

pub(crate) fn read_f64s(r: &mut impl Read, n: usize, section: &'static str) -> Result<Vec<f64>, GraphError> {
    let mut buf = vec![0u8; n * 8];
    read_exact(r, &mut buf, section)?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

/// Query file lines: `source target [departure]`.
pub fn read_queries(path: impl AsRef<Path>) -> Result<Vec<(NodeId, NodeId, Option<f64>)>, GraphError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || GraphError::Structure(format!("query line {}: expected `source target [departure]`", i + 1));
        if fields.len() < 2 || fields.len() > 3 {
            return Err(bad());
        }
        let s = fields[0].parse().map_err(|_| bad())?;
        let t = fields[1].parse().map_err(|_| bad())?;
        let dep = fields.get(2).map(|d| d.parse::<f64>()).transpose().map_err(|_| bad())?;
        out.push((s, t, dep));
    }
    Ok(out)
}

pub fn write_queries(path: impl AsRef<Path>, queries: &[(NodeId, NodeId, Option<f64>)]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for &(s, t, dep) in queries {
        match dep {
            Some(d) => writeln!(w, "{s} {t} {d}")?,
            None => writeln!(w, "{s} {t}")?,
        }
    }
    w.flush()
}

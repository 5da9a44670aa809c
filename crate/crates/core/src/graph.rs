//! The random digraph `G_n`: each vertex picks `r` distinct inputs.
//!
//! Vertex `x` draws its ordered input tuple `(y_1(x), ..., y_r(x))` from its
//! own ChaCha8 stream (stream index `x`), so the full graph and the
//! on-demand [`LazyGraph`] agree on every vertex without materializing `n·r`
//! entries.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// 0-based vertex id.
pub type Vertex = u32;

pub(crate) type Nbrs = SmallVec<[Vertex; 8]>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphConfig {
    pub n: usize,
    pub r: usize,
    pub seed: u64,
}

impl GraphConfig {
    pub fn new(n: usize, r: usize, seed: u64) -> Result<Self> {
        let c = GraphConfig { n, r, seed };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::precondition("r must be at least 1"));
        }
        if self.n <= self.r {
            return Err(Error::precondition(format!(
                "need n > r to choose {} distinct non-self inputs (n = {})",
                self.r, self.n
            )));
        }
        if self.n > Vertex::MAX as usize {
            return Err(Error::precondition("n exceeds the vertex id range"));
        }
        Ok(())
    }
}

/// Read access to input lists, shared by the materialized and lazy graphs.
pub trait InNeighbors {
    fn n(&self) -> usize;
    fn r(&self) -> usize;
    /// Calls `f` with `(y_1(x), ..., y_r(x))`.
    fn with_in_nbrs<R>(&self, x: Vertex, f: impl FnOnce(&[Vertex]) -> R) -> R;
}

/// Uniform ordered `r`-tuple of distinct elements of `{0..n} - {x}`.
fn sample_in_nbrs(base: &ChaCha8Rng, n: usize, r: usize, x: Vertex, out: &mut Nbrs) {
    let mut rng = base.clone();
    rng.set_stream(u64::from(x));
    out.clear();
    if 2 * r <= n {
        while out.len() < r {
            let mut y = rng.random_range(0..(n - 1) as Vertex);
            if y >= x {
                y += 1;
            }
            if !out.contains(&y) {
                out.push(y);
            }
        }
    } else {
        let mut cand: Vec<Vertex> = (0..n as Vertex).filter(|&y| y != x).collect();
        for i in 0..r {
            let j = rng.random_range(i..cand.len());
            cand.swap(i, j);
            out.push(cand[i]);
        }
    }
}

/// Materialized input lists, `r` entries per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InGraph {
    config: GraphConfig,
    in_nbrs: Vec<Vertex>,
}

impl InGraph {
    pub fn generate(config: GraphConfig) -> Result<Self> {
        config.validate()?;
        let GraphConfig { n, r, seed } = config;
        let base = ChaCha8Rng::seed_from_u64(seed);
        let mut in_nbrs = Vec::with_capacity(n * r);
        let mut buf = Nbrs::new();
        for x in 0..n as Vertex {
            sample_in_nbrs(&base, n, r, x, &mut buf);
            in_nbrs.extend_from_slice(&buf);
        }
        Ok(InGraph { config, in_nbrs })
    }

    /// Builds a graph from explicit input lists, checking every invariant.
    pub fn from_lists(config: GraphConfig, lists: &[Vec<Vertex>]) -> Result<Self> {
        config.validate()?;
        let GraphConfig { n, r, .. } = config;
        if lists.len() != n {
            return Err(Error::Parse(format!("expected {n} input lists, got {}", lists.len())));
        }
        let mut in_nbrs = Vec::with_capacity(n * r);
        for (x, l) in lists.iter().enumerate() {
            if l.len() != r {
                return Err(Error::Parse(format!("vertex {x} has {} inputs, expected {r}", l.len())));
            }
            for (i, &y) in l.iter().enumerate() {
                if y as usize >= n {
                    return Err(Error::Parse(format!("vertex {x}: input {y} out of range")));
                }
                if y as usize == x {
                    return Err(Error::Parse(format!("vertex {x} lists itself as input")));
                }
                if l[..i].contains(&y) {
                    return Err(Error::Parse(format!("vertex {x}: repeated input {y}")));
                }
            }
            in_nbrs.extend_from_slice(l);
        }
        Ok(InGraph { config, in_nbrs })
    }

    pub fn config(&self) -> GraphConfig {
        self.config
    }

    #[inline]
    pub fn in_nbrs(&self, x: Vertex) -> &[Vertex] {
        let r = self.config.r;
        let i = x as usize * r;
        &self.in_nbrs[i..i + r]
    }

    /// Text format: header `n r seed`, then line `k` lists the inputs of vertex `k`.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let GraphConfig { n, r, seed } = self.config;
        writeln!(w, "{n} {r} {seed}")?;
        for x in 0..n as Vertex {
            let line: Vec<String> = self.in_nbrs(x).iter().map(|y| y.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph file".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [n, deg, seed] = fields[..] else {
            return Err(Error::Parse(format!("bad graph header `{header}`")));
        };
        let parse = |s: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("bad number `{s}` in graph header")))
        };
        let config = GraphConfig::new(parse(n)? as usize, parse(deg)? as usize, parse(seed)?)?;
        let mut lists = Vec::with_capacity(config.n);
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let l = line
                .split_whitespace()
                .map(|s| {
                    s.parse::<Vertex>()
                        .map_err(|_| Error::Parse(format!("line {}: bad vertex `{s}`", k + 2)))
                })
                .collect::<Result<Vec<_>>>()?;
            lists.push(l);
        }
        InGraph::from_lists(config, &lists)
    }
}

impl InNeighbors for InGraph {
    fn n(&self) -> usize {
        self.config.n
    }

    fn r(&self) -> usize {
        self.config.r
    }

    #[inline]
    fn with_in_nbrs<R>(&self, x: Vertex, f: impl FnOnce(&[Vertex]) -> R) -> R {
        f(self.in_nbrs(x))
    }
}

/// The same graph as `InGraph::generate(config)`, sampled per vertex on demand.
///
/// Used where only a small neighborhood of a large graph is ever explored.
#[derive(Clone, Debug)]
pub struct LazyGraph {
    config: GraphConfig,
    base: ChaCha8Rng,
}

impl LazyGraph {
    pub fn new(config: GraphConfig) -> Result<Self> {
        config.validate()?;
        Ok(LazyGraph {
            config,
            base: ChaCha8Rng::seed_from_u64(config.seed),
        })
    }

    pub fn config(&self) -> GraphConfig {
        self.config
    }
}

impl InNeighbors for LazyGraph {
    fn n(&self) -> usize {
        self.config.n
    }

    fn r(&self) -> usize {
        self.config.r
    }

    fn with_in_nbrs<R>(&self, x: Vertex, f: impl FnOnce(&[Vertex]) -> R) -> R {
        let mut buf = Nbrs::new();
        sample_in_nbrs(&self.base, self.config.n, self.config.r, x, &mut buf);
        f(&buf)
    }
}

/// The inverted graph `Ĝ_n`: for each `x`, the pairs `(z, i)` with `y_i(z) = x`.
///
/// Stored in CSR form, targets ascending and slots ascending within a target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutGraph {
    r: usize,
    offsets: Vec<usize>,
    entries: Vec<(Vertex, u32)>,
}

impl OutGraph {
    pub fn out_adj(&self, x: Vertex) -> &[(Vertex, u32)] {
        let x = x as usize;
        &self.entries[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.entries.len()
    }

    /// Recovers the input lists from the inverted edges.
    pub fn to_in_lists(&self) -> Vec<Vec<Vertex>> {
        let mut lists = vec![vec![Vertex::MAX; self.r]; self.n()];
        for x in 0..self.n() {
            for &(z, i) in self.out_adj(x as Vertex) {
                lists[z as usize][i as usize] = x as Vertex;
            }
        }
        lists
    }
}

pub fn invert(g: &InGraph) -> OutGraph {
    let GraphConfig { n, r, .. } = g.config;
    let mut offsets = vec![0usize; n + 1];
    for &y in &g.in_nbrs {
        offsets[y as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut entries = vec![(0, 0); n * r];
    for z in 0..n as Vertex {
        for (i, &y) in g.in_nbrs(z).iter().enumerate() {
            let y = y as usize;
            entries[fill[y]] = (z, i as u32);
            fill[y] += 1;
        }
    }
    OutGraph { r, offsets, entries }
}

/// Both directions of one graph, as the primal dynamics needs.
#[derive(Clone, Debug)]
pub struct Digraph {
    pub ins: InGraph,
    pub outs: OutGraph,
}

impl Digraph {
    pub fn new(ins: InGraph) -> Self {
        let outs = invert(&ins);
        Digraph { ins, outs }
    }

    pub fn generate(config: GraphConfig) -> Result<Self> {
        Ok(Digraph::new(InGraph::generate(config)?))
    }

    pub fn n(&self) -> usize {
        self.ins.config.n
    }

    pub fn r(&self) -> usize {
        self.ins.config.r
    }
}

impl InNeighbors for Digraph {
    fn n(&self) -> usize {
        self.ins.config.n
    }

    fn r(&self) -> usize {
        self.ins.config.r
    }

    #[inline]
    fn with_in_nbrs<R>(&self, x: Vertex, f: impl FnOnce(&[Vertex]) -> R) -> R {
        f(self.ins.in_nbrs(x))
    }
}

/// Whether the positions reached from `x` by iterating the input maps for up
/// to `depth` generations are all distinct vertices.
pub fn is_tree_neighborhood<G: InNeighbors>(g: &G, x: Vertex, depth: usize) -> bool {
    let mut seen = HashSet::new();
    seen.insert(x);
    let mut frontier = vec![x];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(frontier.len() * g.r());
        for &z in &frontier {
            let fresh = g.with_in_nbrs(z, |ys| {
                for &y in ys {
                    if !seen.insert(y) {
                        return false;
                    }
                    next.push(y);
                }
                true
            });
            if !fresh {
                return false;
            }
        }
        frontier = next;
    }
    true
}

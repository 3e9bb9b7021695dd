//! Deterministic instance generators and brute-force ground-truth oracles.
//!
//! Randomness comes from SplitMix64 so that instances are identical across
//! platforms and languages:
//!
//! ```text
//! state = state + 0x9E3779B97F4A7C15            (wrapping)
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9      (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB      (wrapping)
//! return z ^ (z >> 31)
//! ```
//!
//! A Bernoulli(p) draw takes the top 53 bits of the next output as a uniform
//! value in `[0, 1)` and succeeds when it is below `p`. Pairs are visited in
//! row-major order (`i` outer, `j` inner), one draw per pair.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::order::{transitive_closure, BitMatrix, ClosureMatrix, Digraph};

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform in `0..bound` (`bound > 0`), by multiply-shift.
    pub fn below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}

/// Family of generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Chain,
    Antichain,
    Grid,
    RandomDag,
    RandomLayered,
    RandomDigraph,
    RandomRelation,
}

impl GenKind {
    pub fn name(self) -> &'static str {
        match self {
            GenKind::Chain => "chain",
            GenKind::Antichain => "antichain",
            GenKind::Grid => "grid",
            GenKind::RandomDag => "random_dag",
            GenKind::RandomLayered => "random_layered",
            GenKind::RandomDigraph => "random_digraph",
            GenKind::RandomRelation => "random_relation",
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GenKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "chain" => GenKind::Chain,
            "antichain" => GenKind::Antichain,
            "grid" => GenKind::Grid,
            "random_dag" => GenKind::RandomDag,
            "random_layered" => GenKind::RandomLayered,
            "random_digraph" => GenKind::RandomDigraph,
            "random_relation" => GenKind::RandomRelation,
            other => return Err(format!("unknown generator kind '{other}'")),
        })
    }
}

/// Full description of a generated instance. Identical specs give identical instances.
///
/// For grids `n` is the row count and `cols` the column count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub cols: usize,
    pub p: f64,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(kind: GenKind, n: usize) -> Self {
        Self { kind, n, cols: 0, p: 0.0, seed: 0 }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_cols(mut self, cols: usize) -> Self {
        self.cols = cols;
        self
    }

    /// One-line header describing the spec.
    pub fn header(&self) -> String {
        format!("kind={} n={} cols={} p={} seed={}", self.kind, self.n, self.cols, self.p, self.seed)
    }
}

/// How the edges of a generated instance are meant to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSemantics {
    Cover,
    Closure,
    Relation,
    Digraph,
}

impl EdgeSemantics {
    pub fn name(self) -> &'static str {
        match self {
            EdgeSemantics::Cover => "cover",
            EdgeSemantics::Closure => "closure",
            EdgeSemantics::Relation => "relation",
            EdgeSemantics::Digraph => "digraph",
        }
    }
}

impl FromStr for EdgeSemantics {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "cover" => EdgeSemantics::Cover,
            "closure" => EdgeSemantics::Closure,
            "relation" => EdgeSemantics::Relation,
            "digraph" => EdgeSemantics::Digraph,
            other => return Err(format!("unknown edge semantics '{other}'")),
        })
    }
}

/// Generated instance: vertex count plus a 0-based edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub semantics: EdgeSemantics,
}

pub fn generate(spec: &GenSpec) -> Result<Instance> {
    let cover = |c: ClosureMatrix| Instance {
        n: c.n(),
        edges: crate::order::transitive_reduction(&c).edge_set(),
        semantics: EdgeSemantics::Cover,
    };
    Ok(match spec.kind {
        GenKind::Chain => cover(chain(spec.n)?),
        GenKind::Antichain => cover(antichain(spec.n)?),
        GenKind::Grid => cover(grid(spec.n, spec.cols)?),
        GenKind::RandomLayered => cover(random_layered_poset(spec.n, spec.seed)?),
        GenKind::RandomDag => {
            let g = random_dag(spec.n, spec.p, spec.seed);
            Instance { n: g.n(), edges: g.edge_set(), semantics: EdgeSemantics::Cover }
        }
        GenKind::RandomDigraph => {
            let g = random_digraph(spec.n, spec.p, spec.seed);
            Instance { n: g.n(), edges: g.edge_set(), semantics: EdgeSemantics::Digraph }
        }
        GenKind::RandomRelation => {
            let m = random_transitive_relation(spec.n, spec.p, spec.seed)?;
            Instance { n: spec.n, edges: m.pairs(), semantics: EdgeSemantics::Relation }
        }
    })
}

pub fn chain(n: usize) -> Result<ClosureMatrix> {
    ClosureMatrix::from_pairs(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
}

pub fn antichain(n: usize) -> Result<ClosureMatrix> {
    ClosureMatrix::from_pairs(n, [])
}

/// Product order on a `rows x cols` grid; element `(r, c)` has label `r * cols + c`.
pub fn grid(rows: usize, cols: usize) -> Result<ClosureMatrix> {
    let n = rows * cols;
    let mut m = BitMatrix::new(n)?;
    for a in 0..n {
        for b in 0..n {
            let (ra, ca, rb, cb) = (a / cols, a % cols, b / cols, b % cols);
            if a != b && ra <= rb && ca <= cb {
                m.set(a, b);
            }
        }
    }
    Ok(ClosureMatrix::new_unchecked(m))
}

/// DAG with edge `i -> j` for each pair `i < j` independently with probability `p`.
pub fn random_dag(n: usize, p: f64, seed: u64) -> Digraph {
    let mut rng = SplitMix64::new(seed);
    let mut g = Digraph::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.bernoulli(p) {
                g.add_edge(i, j).expect("in range");
            }
        }
    }
    g
}

/// Digraph with edge `i -> j` for each ordered pair `i != j` with probability `p`.
pub fn random_digraph(n: usize, p: f64, seed: u64) -> Digraph {
    let mut rng = SplitMix64::new(seed);
    let mut g = Digraph::new(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.bernoulli(p) {
                g.add_edge(i, j).expect("in range");
            }
        }
    }
    g
}

/// Level sizes of the three-layer generator: `(floor(n/4), n - 2 floor(n/4), floor(n/4))`.
pub fn layered_sizes(n: usize) -> (usize, usize, usize) {
    let q = n / 4;
    (q, n - 2 * q, q)
}

/// Three-layer random poset: adjacent layers joined with probability 1/2, then closed.
///
/// A proxy for typical posets, which are dominated by three-layer shapes; it
/// is not a uniform sample over all posets.
pub fn random_layered_poset(n: usize, seed: u64) -> Result<ClosureMatrix> {
    let (s1, s2, _) = layered_sizes(n);
    let mut rng = SplitMix64::new(seed);
    let mut g = Digraph::new(n);
    for a in 0..s1 {
        for b in s1..s1 + s2 {
            if rng.bernoulli(0.5) {
                g.add_edge(a, b)?;
            }
        }
    }
    for a in s1..s1 + s2 {
        for b in s1 + s2..n {
            if rng.bernoulli(0.5) {
                g.add_edge(a, b)?;
            }
        }
    }
    transitive_closure(&g)
}

/// Transitive relation obtained by closing a random relation (self-pairs allowed).
///
/// `(a, a)` ends up in the result exactly when `a` lies on a cycle or had a self-pair.
pub fn random_transitive_relation(n: usize, p: f64, seed: u64) -> Result<BitMatrix> {
    let mut rng = SplitMix64::new(seed);
    let mut g = Digraph::new(n);
    for i in 0..n {
        for j in 0..n {
            if rng.bernoulli(p) {
                g.add_edge(i, j)?;
            }
        }
    }
    reach_matrix(&g)
}

/// Vertices reachable from `a` by paths of length >= 1, by breadth-first search.
pub fn reach_from(adj: &[Vec<usize>], a: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue: VecDeque<usize> = adj[a].iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        if !seen[v] {
            seen[v] = true;
            queue.extend(adj[v].iter().copied());
        }
    }
    seen
}

/// Matrix of paths of length >= 1 for an arbitrary digraph.
pub fn reach_matrix(g: &Digraph) -> Result<BitMatrix> {
    let adj = g.adjacency();
    let mut m = BitMatrix::new(g.n())?;
    for a in 0..g.n() {
        for (b, r) in reach_from(&adj, a).into_iter().enumerate() {
            if r {
                m.set(a, b);
            }
        }
    }
    Ok(m)
}

/// Ground truth for `a <= b`: direct matrix readout, reflexive on the diagonal.
pub fn oracle_precedes(c: &ClosureMatrix, a: usize, b: usize) -> bool {
    a == b || c.less(a, b)
}

/// Ground truth for reachability: breadth-first search, `a` always reaches itself.
pub fn oracle_reachable(g: &Digraph, a: usize, b: usize) -> bool {
    a == b || reach_from(&g.adjacency(), a)[b]
}

/// Checks `n` is usable as a label count.
pub fn check_n(n: usize) -> Result<()> {
    if n > crate::order::MAX_ELEMENTS {
        return Err(Error::TooLarge(format!("n = {n}")));
    }
    Ok(())
}

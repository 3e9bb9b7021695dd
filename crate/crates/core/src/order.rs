//! Poset and DAG foundations.
//!
//! Elements are dense 0-based labels `0..n`. A [`ClosureMatrix`] holds the
//! strict order `a < b` as an `n x n` bit matrix; it is construction-time
//! scratch only and is never part of the succinct structures.

use crate::error::{Error, Result, Violation};

/// Largest element count accepted for the dense construction matrices.
pub const MAX_ELEMENTS: usize = 1 << 16;

/// Directed graph over vertices `0..n`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        for x in [u, v] {
            if x >= self.n {
                return Err(Error::Range { index: x, lo: 0, hi: self.n.saturating_sub(1) });
            }
        }
        self.edges.push((u, v));
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted, deduplicated edge list.
    pub fn edge_set(&self) -> Vec<(usize, usize)> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Out-neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
        }
        adj
    }
}

/// Square bit matrix, one row of `u64` words per element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    stride: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_ELEMENTS {
            return Err(Error::TooLarge(format!("{n} elements exceeds the {MAX_ELEMENTS} limit")));
        }
        let stride = n.div_ceil(64);
        Ok(Self { n, stride, words: vec![0; stride * n] })
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut m = Self::new(n)?;
        for (a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::Range { index: a.max(b), lo: 0, hi: n.saturating_sub(1) });
            }
            m.set(a, b);
        }
        Ok(m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> bool {
        (self.words[a * self.stride + b / 64] >> (b % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize) {
        self.words[a * self.stride + b / 64] |= 1 << (b % 64);
    }

    #[inline]
    pub fn clear(&mut self, a: usize, b: usize) {
        self.words[a * self.stride + b / 64] &= !(1 << (b % 64));
    }

    #[inline]
    pub fn row(&self, a: usize) -> &[u64] {
        &self.words[a * self.stride..(a + 1) * self.stride]
    }

    /// ORs row `src` into row `dst`.
    fn or_row_into(&mut self, dst: usize, src: usize) {
        if dst == src {
            return;
        }
        let s = self.stride;
        let (d, r) = if dst < src {
            let (lo, hi) = self.words.split_at_mut(src * s);
            (&mut lo[dst * s..(dst + 1) * s], &hi[..s])
        } else {
            let (lo, hi) = self.words.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..(src + 1) * s])
        };
        for (x, y) in d.iter_mut().zip(r) {
            *x |= *y;
        }
    }

    /// Set columns of row `a`, ascending.
    pub fn row_iter(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(a).iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n).flat_map(|a| self.row_iter(a).map(move |b| (a, b))).collect()
    }
}

/// Strict order `a < b` of a poset: irreflexive, antisymmetric and transitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureMatrix(BitMatrix);

impl ClosureMatrix {
    /// Validates `m` against the strict-order axioms.
    pub fn new(m: BitMatrix) -> Result<Self> {
        validate_poset(&m).map_err(Error::InvalidPoset)?;
        Ok(Self(m))
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(BitMatrix::from_pairs(n, pairs)?)
    }

    pub(crate) fn new_unchecked(m: BitMatrix) -> Self {
        Self(m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.0.n
    }

    /// `a < b`.
    #[inline]
    pub fn less(&self, a: usize, b: usize) -> bool {
        self.0.get(a, b)
    }

    /// `a <= b`.
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        a == b || self.less(a, b)
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.0
    }

    pub fn successors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.0.row_iter(a)
    }

    /// Number of strict pairs.
    pub fn pair_count(&self) -> usize {
        self.0.count_ones()
    }
}

/// Checks the strict-order axioms and reports the first violation with a witness.
pub fn validate_poset(m: &BitMatrix) -> std::result::Result<(), Violation> {
    let n = m.n();
    for a in 0..n {
        if m.get(a, a) {
            return Err(Violation::Reflexive { a });
        }
    }
    for a in 0..n {
        for b in m.row_iter(a) {
            if b > a && m.get(b, a) {
                return Err(Violation::Antisymmetric { a, b });
            }
        }
    }
    for a in 0..n {
        let ra = m.row(a);
        for b in m.row_iter(a) {
            let rb = m.row(b);
            for (wi, (&x, &y)) in ra.iter().zip(rb).enumerate() {
                let missing = y & !x;
                if missing != 0 {
                    let c = wi * 64 + missing.trailing_zeros() as usize;
                    return Err(Violation::Transitive { a, b, c });
                }
            }
        }
    }
    Ok(())
}

/// Topological order (Kahn). On a cycle, names one vertex lying on it.
pub fn topological_order(g: &Digraph) -> Result<Vec<usize>> {
    let n = g.n();
    let adj = g.adjacency();
    let mut indeg = vec![0usize; n];
    for &(_, v) in g.edges() {
        indeg[v] += 1;
    }
    let mut stack: Vec<usize> = (0..n).rev().filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = stack.pop() {
        order.push(u);
        for &v in &adj[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                stack.push(v);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every vertex left over has an unprocessed predecessor; walking
    // predecessors must revisit a vertex, which then lies on a cycle.
    let mut pred = vec![usize::MAX; n];
    for &(u, v) in g.edges() {
        if indeg[u] > 0 && indeg[v] > 0 {
            pred[v] = u;
        }
    }
    let mut v = (0..n).find(|&v| indeg[v] > 0).expect("leftover vertex");
    let mut seen = vec![false; n];
    while !seen[v] {
        seen[v] = true;
        v = pred[v];
    }
    Err(Error::NotADag { vertex: v })
}

/// Transitive closure of a DAG: bit `(a, b)` iff a path of length >= 1 leads from `a` to `b`.
pub fn transitive_closure(g: &Digraph) -> Result<ClosureMatrix> {
    let order = topological_order(g)?;
    let adj = g.adjacency();
    let mut m = BitMatrix::new(g.n())?;
    for &u in order.iter().rev() {
        for &v in &adj[u] {
            m.set(u, v);
            m.or_row_into(u, v);
        }
    }
    Ok(ClosureMatrix(m))
}

/// Hasse diagram: `(a, b)` kept iff `a < b` with nothing strictly between.
pub fn transitive_reduction(c: &ClosureMatrix) -> Digraph {
    let n = c.n();
    let m = c.matrix();
    let mut edges = Vec::new();
    let mut covered = vec![0u64; n.div_ceil(64)];
    for a in 0..n {
        covered.iter_mut().for_each(|w| *w = 0);
        for mid in m.row_iter(a) {
            for (x, y) in covered.iter_mut().zip(m.row(mid)) {
                *x |= *y;
            }
        }
        for (wi, (&r, &cv)) in m.row(a).iter().zip(&covered).enumerate() {
            let mut w = r & !cv;
            while w != 0 {
                edges.push((a, wi * 64 + w.trailing_zeros() as usize));
                w &= w - 1;
            }
        }
    }
    Digraph { n, edges }
}

/// Validating variant of [`transitive_reduction`] for unchecked matrices.
pub fn transitive_reduction_checked(m: &BitMatrix) -> Result<Digraph> {
    let c = ClosureMatrix::new(m.clone())?;
    Ok(transitive_reduction(&c))
}

/// Elements grouped by height: level 0 holds the sources, and each further
/// element sits one level above its highest predecessor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntichainDecomposition {
    levels: Vec<Vec<usize>>,
    height_of: Vec<usize>,
    rank_of: Vec<usize>,
}

impl AntichainDecomposition {
    /// Builds a decomposition from explicit levels; ranks follow list order.
    pub fn from_levels(n: usize, levels: Vec<Vec<usize>>) -> Result<Self> {
        let mut height_of = vec![usize::MAX; n];
        let mut rank_of = vec![usize::MAX; n];
        for (h, level) in levels.iter().enumerate() {
            for (r, &e) in level.iter().enumerate() {
                if e >= n || height_of[e] != usize::MAX {
                    return Err(Error::Precondition(format!("element {e} missing or repeated in levels")));
                }
                height_of[e] = h;
                rank_of[e] = r;
            }
        }
        if let Some(e) = height_of.iter().position(|&h| h == usize::MAX) {
            return Err(Error::Precondition(format!("element {e} not assigned to a level")));
        }
        Ok(Self { levels, height_of, rank_of })
    }

    pub fn n(&self) -> usize {
        self.height_of.len()
    }

    /// Number of levels (the height of the poset).
    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    pub fn level(&self, h: usize) -> &[usize] {
        &self.levels[h]
    }

    /// 0-based level of `a`.
    pub fn height_of(&self, a: usize) -> usize {
        self.height_of[a]
    }

    /// 0-based rank of `a` inside its level.
    pub fn rank_of(&self, a: usize) -> usize {
        self.rank_of[a]
    }
}

pub fn height_decomposition(c: &ClosureMatrix) -> AntichainDecomposition {
    let n = c.n();
    let m = c.matrix();
    // If a < b then preds(a) is a proper subset of preds(b), so sorting by
    // predecessor count is a topological order.
    let mut preds = vec![0usize; n];
    for a in 0..n {
        for b in m.row_iter(a) {
            preds[b] += 1;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&a| (preds[a], a));
    let mut height = vec![0usize; n];
    for &a in &order {
        let h = height[a] + 1;
        for b in m.row_iter(a) {
            if height[b] < h {
                height[b] = h;
            }
        }
    }
    let levels_n = height.iter().max().map_or(0, |&h| h + 1);
    let mut levels = vec![Vec::new(); levels_n];
    for a in 0..n {
        levels[height[a]].push(a);
    }
    let mut rank_of = vec![0; n];
    for level in &levels {
        for (r, &a) in level.iter().enumerate() {
            rank_of[a] = r;
        }
    }
    AntichainDecomposition { levels, height_of: height, rank_of }
}

/// Level-by-level total order; ties inside a level broken by ascending label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearExtension {
    order: Vec<usize>,
    position_of: Vec<usize>,
}

impl LinearExtension {
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// 0-based position of `a`.
    pub fn position_of(&self, a: usize) -> usize {
        self.position_of[a]
    }

    /// The `x`-th smallest member of `subset` (1-based `x`) under this order.
    pub fn nth_of_subset(&self, subset: &[usize], x: usize) -> Option<usize> {
        let mut s: Vec<usize> = subset.to_vec();
        s.sort_by_key(|&a| self.position_of[a]);
        x.checked_sub(1).and_then(|i| s.get(i).copied())
    }
}

pub fn linear_extension(d: &AntichainDecomposition) -> LinearExtension {
    let mut order = Vec::with_capacity(d.n());
    for level in d.levels() {
        let mut l = level.clone();
        l.sort_unstable();
        order.extend(l);
    }
    let mut position_of = vec![0; order.len()];
    for (p, &a) in order.iter().enumerate() {
        position_of[a] = p;
    }
    LinearExtension { order, position_of }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> ClosureMatrix {
        transitive_closure(&Digraph::from_edges(3, [(0, 1), (1, 2)]).unwrap()).unwrap()
    }

    #[test]
    fn closure_of_chain() {
        let c = chain3();
        let mut p = c.matrix().pairs();
        p.sort();
        assert_eq!(p, vec![(0, 1), (0, 2), (1, 2)]);
        let empty = transitive_closure(&Digraph::new(4)).unwrap();
        assert_eq!(empty.pair_count(), 0);
    }

    #[test]
    fn cycle_is_reported() {
        let g = Digraph::from_edges(4, [(0, 1), (1, 2), (2, 1), (2, 3)]).unwrap();
        match transitive_closure(&g) {
            Err(Error::NotADag { vertex }) => assert!(vertex == 1 || vertex == 2),
            other => panic!("unexpected {other:?}"),
        }
        let g = Digraph::from_edges(2, [(1, 1)]).unwrap();
        assert_eq!(transitive_closure(&g), Err(Error::NotADag { vertex: 1 }));
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(transitive_reduction(&chain3()).edge_set(), vec![(0, 1), (1, 2)]);
        let anti = ClosureMatrix::from_pairs(5, []).unwrap();
        assert!(transitive_reduction(&anti).edges().is_empty());
        let bad = BitMatrix::from_pairs(2, [(0, 1), (1, 0)]).unwrap();
        assert!(transitive_reduction_checked(&bad).is_err());
    }

    #[test]
    fn validation_witnesses() {
        let m = BitMatrix::from_pairs(2, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(validate_poset(&m), Err(Violation::Antisymmetric { a: 0, b: 1 }));
        let m = BitMatrix::from_pairs(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(validate_poset(&m), Err(Violation::Transitive { a: 0, b: 1, c: 2 }));
        let m = BitMatrix::from_pairs(3, [(2, 2)]).unwrap();
        assert_eq!(validate_poset(&m), Err(Violation::Reflexive { a: 2 }));
        assert_eq!(validate_poset(chain3().matrix()), Ok(()));
    }

    #[test]
    fn heights_and_extension() {
        let d = height_decomposition(&chain3());
        assert_eq!(d.levels(), &[vec![0], vec![1], vec![2]]);
        assert_eq!(d.height(), 3);

        let anti = ClosureMatrix::from_pairs(5, []).unwrap();
        let d = height_decomposition(&anti);
        assert_eq!(d.height(), 1);
        assert_eq!(d.level(0), &[0, 1, 2, 3, 4]);

        // levels {1} then {0, 2}
        let c = ClosureMatrix::from_pairs(3, [(1, 0), (1, 2)]).unwrap();
        let d = height_decomposition(&c);
        assert_eq!(linear_extension(&d).order(), &[1, 0, 2]);

        let d = AntichainDecomposition::from_levels(3, vec![vec![2, 0, 1]]).unwrap();
        let l = linear_extension(&d);
        assert_eq!(l.order(), &[0, 1, 2]);
        assert_eq!(l.nth_of_subset(&[2, 0], 2), Some(2));
    }

    #[test]
    fn empty_poset() {
        let c = ClosureMatrix::from_pairs(0, []).unwrap();
        let d = height_decomposition(&c);
        assert_eq!(d.height(), 0);
        assert!(linear_extension(&d).order().is_empty());
    }
}

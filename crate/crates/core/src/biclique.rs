//! Balanced biclique extraction from the bipartite graph between two levels.
//!
//! The search is greedy and deterministic: starting from the whole opposite
//! side, repeatedly add the vertex whose neighbourhood keeps the most common
//! neighbours, from both sides in turn. Vertices whose degree cannot support a
//! larger biclique are pruned first. Graphs below `c_min` vertices are then
//! searched exhaustively for anything larger than the greedy answer.
//! Correctness never depends on the search: every certificate is checked by
//! [`verify_biclique`].

use crate::bits::lg;
use crate::error::{Error, Result};
use crate::order::BitMatrix;

/// Bipartite graph between a lower and an upper vertex list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    lower: Vec<usize>,
    upper: Vec<usize>,
    /// Row per lower vertex: bitset over upper indices.
    adj: Vec<Vec<u64>>,
    edges: usize,
}

fn popcount(s: &[u64]) -> usize {
    s.iter().map(|w| w.count_ones() as usize).sum()
}

fn and_count(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

fn ones(s: &[u64]) -> impl Iterator<Item = usize> + '_ {
    s.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            (w != 0).then(|| {
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                wi * 64 + t
            })
        })
    })
}

impl BipartiteGraph {
    /// Edges `(l, u)` are given as element labels; pairs outside the two lists are ignored.
    pub fn from_edges(lower: &[usize], upper: &[usize], edges: &[(usize, usize)]) -> Self {
        let ui = |u: usize| upper.iter().position(|&x| x == u);
        let li = |l: usize| lower.iter().position(|&x| x == l);
        let stride = upper.len().div_ceil(64);
        let mut adj = vec![vec![0u64; stride]; lower.len()];
        for &(l, u) in edges {
            if let (Some(i), Some(j)) = (li(l), ui(u)) {
                adj[i][j / 64] |= 1 << (j % 64);
            }
        }
        Self::finish(lower.to_vec(), upper.to_vec(), adj)
    }

    /// Cross edges read from a relation matrix (`rel(l, u)`).
    pub fn from_relation(lower: &[usize], upper: &[usize], rel: &BitMatrix) -> Self {
        let stride = upper.len().div_ceil(64);
        let adj = lower
            .iter()
            .map(|&l| {
                let mut row = vec![0u64; stride];
                for (j, &u) in upper.iter().enumerate() {
                    if rel.get(l, u) {
                        row[j / 64] |= 1 << (j % 64);
                    }
                }
                row
            })
            .collect();
        Self::finish(lower.to_vec(), upper.to_vec(), adj)
    }

    fn finish(lower: Vec<usize>, upper: Vec<usize>, adj: Vec<Vec<u64>>) -> Self {
        let edges = adj.iter().map(|r| popcount(r)).sum();
        Self { lower, upper, adj, edges }
    }

    pub fn lower(&self) -> &[usize] {
        &self.lower
    }

    pub fn upper(&self) -> &[usize] {
        &self.upper
    }

    pub fn vertex_count(&self) -> usize {
        self.lower.len() + self.upper.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn has_edge(&self, l: usize, u: usize) -> bool {
        match (self.lower.iter().position(|&x| x == l), self.upper.iter().position(|&x| x == u)) {
            (Some(i), Some(j)) => (self.adj[i][j / 64] >> (j % 64)) & 1 == 1,
            _ => false,
        }
    }

    /// Adjacency with the sides swapped.
    fn transposed(&self) -> Vec<Vec<u64>> {
        let stride = self.lower.len().div_ceil(64);
        let mut t = vec![vec![0u64; stride]; self.upper.len()];
        for (i, row) in self.adj.iter().enumerate() {
            for j in ones(row) {
                t[j][i / 64] |= 1 << (i % 64);
            }
        }
        t
    }
}

/// Complete bipartite subgraph: every `left` member is joined to every `right` member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BicliqueCertificate {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl BicliqueCertificate {
    /// Total size `|left| + |right|`.
    pub fn tau(&self) -> usize {
        self.left.len() + self.right.len()
    }

    /// Side size of a balanced certificate.
    pub fn q(&self) -> usize {
        self.left.len().min(self.right.len())
    }
}

/// Tuning of the biclique search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicliqueConfig {
    /// Vertex count below which an exhaustive search follows the greedy pass.
    pub c_min: usize,
    /// Constant of the guaranteed side size `c_q * lg|V| / lg(|V|^2/|E|)`.
    pub c_q: f64,
    /// Node budget of the exhaustive search.
    pub search_budget: usize,
}

impl Default for BicliqueConfig {
    fn default() -> Self {
        Self { c_min: 64, c_q: 0.25, search_budget: 2_000_000 }
    }
}

/// Whether `|V| >= c_min` and `|E| >= 8 |V|^{3/2}`.
pub fn dense_precondition(vertices: usize, edges: usize, c_min: usize) -> bool {
    vertices >= c_min && edges as f64 >= 8.0 * (vertices as f64).powf(1.5)
}

/// Side size `max(1, floor(c_q * lg|V| / max(1, lg(|V|^2/|E|))))`.
pub fn target_q(vertices: usize, edges: usize, c_q: f64) -> usize {
    if edges == 0 {
        return 0;
    }
    let ratio = (vertices as f64).powi(2) / edges as f64;
    let denom = (ratio.log2().ceil()).max(1.0);
    ((c_q * lg(vertices as u64) as f64 / denom).floor() as usize).max(1)
}

/// One greedy pass: rows are candidate picks, columns the shrinking common neighbourhood.
/// Returns `(picked rows, common columns)` of the best balanced prefix.
fn greedy(rows: &[Vec<u64>], active_rows: &[bool], active_cols: &[u64]) -> (Vec<usize>, Vec<usize>, usize) {
    let mut cand = active_cols.to_vec();
    let mut used = vec![false; rows.len()];
    let mut chosen = Vec::new();
    let mut best = (Vec::new(), Vec::new(), 0usize);
    loop {
        let mut pick = None;
        let mut pick_deg = 0;
        for (i, row) in rows.iter().enumerate() {
            if used[i] || !active_rows[i] {
                continue;
            }
            let d = and_count(row, &cand);
            if d > pick_deg {
                pick_deg = d;
                pick = Some(i);
            }
        }
        let Some(i) = pick else { break };
        used[i] = true;
        chosen.push(i);
        for (c, r) in cand.iter_mut().zip(&rows[i]) {
            *c &= r;
        }
        let size = pick_deg;
        let q = chosen.len().min(size);
        if q > best.2 {
            best = (chosen[..q].to_vec(), ones(&cand).take(q).collect(), q);
        }
        if size <= chosen.len() {
            break;
        }
    }
    best
}

/// Drops vertices whose degree is below `min_deg`, repeatedly, on both sides.
fn prune(adj: &[Vec<u64>], n_upper: usize, min_deg: usize) -> (Vec<bool>, Vec<u64>) {
    let stride = n_upper.div_ceil(64);
    let mut rows = vec![true; adj.len()];
    let mut cols = vec![0u64; stride];
    for j in 0..n_upper {
        cols[j / 64] |= 1 << (j % 64);
    }
    loop {
        let mut changed = false;
        for (i, row) in adj.iter().enumerate() {
            if rows[i] && and_count(row, &cols) < min_deg {
                rows[i] = false;
                changed = true;
            }
        }
        let mut col_deg = vec![0usize; n_upper];
        for (i, row) in adj.iter().enumerate() {
            if rows[i] {
                for j in ones(row) {
                    col_deg[j] += 1;
                }
            }
        }
        for (j, &d) in col_deg.iter().enumerate() {
            let bit = 1u64 << (j % 64);
            if cols[j / 64] & bit != 0 && d < min_deg {
                cols[j / 64] &= !bit;
                changed = true;
            }
        }
        if !changed {
            return (rows, cols);
        }
    }
}

/// Depth-first search for a `K_{q,q}` using rows from `start` on.
fn search(
    rows: &[Vec<u64>],
    q: usize,
    start: usize,
    cand: &[u64],
    chosen: &mut Vec<usize>,
    budget: &mut usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    if chosen.len() == q {
        return Some((chosen.clone(), ones(cand).take(q).collect()));
    }
    for i in start..rows.len() {
        if rows.len() - i < q - chosen.len() || *budget == 0 {
            break;
        }
        *budget -= 1;
        let next: Vec<u64> = cand.iter().zip(&rows[i]).map(|(a, b)| a & b).collect();
        if popcount(&next) < q {
            continue;
        }
        chosen.push(i);
        if let Some(found) = search(rows, q, i + 1, &next, chosen, budget) {
            return Some(found);
        }
        chosen.pop();
    }
    None
}

/// Finds a balanced biclique, aiming for side size `q_target`.
///
/// Always returns a valid certificate (at worst a single edge). On failure to
/// reach `q_target` the largest certificate found is returned.
pub fn find_balanced_biclique(
    g: &BipartiteGraph,
    q_target: usize,
    cfg: &BicliqueConfig,
) -> Result<BicliqueCertificate> {
    if g.edges == 0 {
        return Err(Error::NoBiclique);
    }
    let n_upper = g.upper.len();

    // Smallest certificate: the first edge.
    let (i0, row0) = g.adj.iter().enumerate().find(|(_, r)| popcount(r) > 0).expect("an edge exists");
    let j0 = ones(row0).next().expect("row has an edge");
    let mut best_left = vec![i0];
    let mut best_right = vec![j0];
    let mut best_q = 1;

    let transposed = g.transposed();
    loop {
        let before = best_q;
        let (rows_ok, cols_ok) = prune(&g.adj, n_upper, best_q + 1);
        if !rows_ok.iter().any(|&r| r) {
            break;
        }
        let (l, r, q) = greedy(&g.adj, &rows_ok, &cols_ok);
        if q > best_q {
            (best_left, best_right, best_q) = (l, r, q);
        }
        // Same pass with the upper side picking.
        let mut rows_t = vec![false; n_upper];
        for j in ones(&cols_ok) {
            rows_t[j] = true;
        }
        let mut cols_t = vec![0u64; g.lower.len().div_ceil(64)];
        for (i, &ok) in rows_ok.iter().enumerate() {
            if ok {
                cols_t[i / 64] |= 1 << (i % 64);
            }
        }
        let (r, l, q) = greedy(&transposed, &rows_t, &cols_t);
        if q > best_q {
            (best_left, best_right, best_q) = (l, r, q);
        }
        if best_q == before {
            break;
        }
    }

    if g.vertex_count() < cfg.c_min {
        let mut budget = cfg.search_budget;
        let mut all = vec![0u64; n_upper.div_ceil(64)];
        for j in 0..n_upper {
            all[j / 64] |= 1 << (j % 64);
        }
        loop {
            let q = best_q + 1;
            if q > g.lower.len().min(n_upper) {
                break;
            }
            match search(&g.adj, q, 0, &all, &mut Vec::new(), &mut budget) {
                Some((l, r)) => (best_left, best_right, best_q) = (l, r, q),
                None => break,
            }
        }
    }

    if best_q < q_target {
        log::debug!("biclique: found q={best_q} below target {q_target} on |V|={}", g.vertex_count());
    }
    let mut left: Vec<usize> = best_left.iter().map(|&i| g.lower[i]).collect();
    let mut right: Vec<usize> = best_right.iter().map(|&j| g.upper[j]).collect();
    left.sort_unstable();
    right.sort_unstable();
    let q = left.len().min(right.len());
    left.truncate(q);
    right.truncate(q);
    Ok(BicliqueCertificate { left, right })
}

/// True iff the sides are disjoint, lie on their own sides of `g`, and every
/// cross pair is an edge.
pub fn verify_biclique(cert: &BicliqueCertificate, g: &BipartiteGraph) -> bool {
    if cert.left.iter().any(|l| cert.right.contains(l)) {
        return false;
    }
    cert.left.iter().all(|&l| cert.right.iter().all(|&r| g.has_edge(l, r)))
}

//! End-to-end oracles: posets, reduction edges, digraph reachability and
//! transitive relations.

use crate::bits::PackedInts;
use crate::bitseq::CompressedBitSequence;
use crate::container::{SectionReader, SectionWriter};
use crate::compress::{compress_flat, CompressConfig, CompressOutput, FlatElement};
use crate::error::{corrupt, Error, Result};
use crate::flatten::{default_gamma, flatten, FlattenAnswer, FlattenOutput};
use crate::gen::{EdgeSemantics, Instance};
use crate::order::{
    height_decomposition, transitive_closure, transitive_reduction, BitMatrix, ClosureMatrix, Digraph,
};
use crate::scc::{condensation, strongly_connected_components};

/// Default bound on primitive operations per query.
pub const QUERY_OP_BUDGET: u32 = 32;

/// Bits used by an oracle, by section.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceReport {
    pub n: usize,
    pub total_bits: u64,
    pub sections: Vec<(&'static str, u64)>,
}

impl SpaceReport {
    fn new(n: usize, sections: Vec<(&'static str, u64)>) -> Self {
        Self { n, total_bits: sections.iter().map(|s| s.1).sum(), sections }
    }

    /// `n^2 / 4`.
    pub fn quarter(&self) -> f64 {
        (self.n as f64).powi(2) / 4.0
    }

    /// `n (n - 1) / 2`.
    pub fn triangular(&self) -> f64 {
        let n = self.n as f64;
        n * (n - 1.0).max(0.0) / 2.0
    }

    pub fn quarter_ratio(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.total_bits as f64 / self.quarter()
    }

    pub fn triangular_ratio(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.total_bits as f64 / self.triangular()
    }
}

fn check_range(a: usize, n: usize) -> Result<()> {
    if a >= n {
        return Err(Error::Range { index: a, lo: 0, hi: n.saturating_sub(1) });
    }
    Ok(())
}

/// Poset in about `n^2 / 4` bits with constant-time precedence queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccinctPoset {
    n: usize,
    flat: FlattenOutput,
    dense: CompressOutput,
}

impl SuccinctPoset {
    pub fn build(c: &ClosureMatrix) -> Result<Self> {
        Self::build_with(c, &CompressConfig::default())
    }

    pub fn build_with(c: &ClosureMatrix, cfg: &CompressConfig) -> Result<Self> {
        let n = c.n();
        let d = height_decomposition(c);
        let flat = flatten(&d, c.matrix(), default_gamma(n))?;
        let dense = compress_flat(flat.residual(), c.matrix(), cfg)?;
        log::debug!(
            "poset: n={n} height={} flat levels={} removals={}",
            d.height(),
            flat.residual().height(),
            dense.removal_count()
        );
        Ok(Self { n, flat, dense })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flatten_output(&self) -> &FlattenOutput {
        &self.flat
    }

    /// Every compressed bit sequence the oracle stores.
    pub fn bit_sequences(&self) -> Vec<&CompressedBitSequence> {
        let c = self.compress_output();
        let mut v = vec![self.flatten_output().merged_bits(), c.sparse_bits()];
        v.extend(c.membership());
        v
    }

    pub fn compress_output(&self) -> &CompressOutput {
        &self.dense
    }

    /// `a ⪯ b` (reflexive).
    pub fn precedes(&self, a: usize, b: usize) -> Result<bool> {
        let mut ops = 0;
        self.precedes_counted(a, b, &mut ops)
    }

    /// [`precedes`](Self::precedes), adding table reads and sequence probes to `ops`.
    pub fn precedes_counted(&self, a: usize, b: usize, ops: &mut u32) -> Result<bool> {
        check_range(a, self.n)?;
        check_range(b, self.n)?;
        if a == b {
            return Ok(true);
        }
        *ops += 2;
        let ca = self.flat.coords(a)?;
        let cb = self.flat.coords(b)?;
        if ca.level >= cb.level {
            return Ok(false);
        }
        if ca.res_level == cb.res_level {
            return Ok(self.flat.query_coords(&ca, &cb, ops)? == FlattenAnswer::Yes);
        }
        let fa = FlatElement { label: a, level: ca.res_level, rank: ca.res_rank };
        let fb = FlatElement { label: b, level: cb.res_level, rank: cb.res_rank };
        self.dense.query_counted(fa, fb, ops)
    }

    pub fn space_report(&self) -> SpaceReport {
        let c = self.dense.size_report();
        SpaceReport::new(
            self.n,
            vec![
                ("flatten.merged", self.flat.merged_bits().size_bits()),
                ("flatten.tables", self.flat.aux_bits()),
                ("compress.w", c.w_bits),
                ("compress.y", c.y_bits),
                ("compress.sparse", c.sparse_bits),
                ("compress.membership", c.membership_bits),
                ("compress.tables", c.aux_bits),
            ],
        )
    }

    pub(crate) fn write_sections(&self, w: &mut SectionWriter) {
        w.add(*b"FLAT", |w| self.flat.write_to(w));
        w.add(*b"CMPR", |w| self.dense.write_to(w));
    }

    pub(crate) fn read_sections(r: &mut SectionReader<'_>) -> Result<Self> {
        let flat = r.read(*b"FLAT", FlattenOutput::read_from)?;
        let dense = r.read(*b"CMPR", CompressOutput::read_from)?;
        let n = flat.n();
        if dense.n() != n || dense.levels() != flat.residual().height() {
            return Err(corrupt("poset sections describe different element sets"));
        }
        for h in 0..dense.levels() {
            if dense.level_size(h) != flat.residual().level(h).len() {
                return Err(corrupt("flat level sizes disagree between sections"));
            }
        }
        Ok(Self { n, flat, dense })
    }
}

/// Membership in the transitive reduction (Hasse diagram) of a poset.
///
/// All edge bits go through the merge machinery with a single merge group,
/// so the structure is exact but not succinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionIndex {
    flat: FlattenOutput,
}

impl ReductionIndex {
    /// `r` must already be a transitive reduction.
    pub fn build(r: &Digraph) -> Result<Self> {
        let closure = transitive_closure(r)?;
        let reduced = transitive_reduction(&closure).edge_set();
        if let Some(&(u, v)) = r.edge_set().iter().find(|e| reduced.binary_search(e).is_err()) {
            return Err(Error::NotAReduction { u, v });
        }
        Self::from_closure(&closure)
    }

    /// Index of the reduction of `c`.
    pub fn from_closure(c: &ClosureMatrix) -> Result<Self> {
        let n = c.n();
        let red = BitMatrix::from_pairs(n, transitive_reduction(c).edge_set())?;
        let d = height_decomposition(c);
        Ok(Self { flat: flatten(&d, &red, 1)? })
    }

    pub fn n(&self) -> usize {
        self.flat.n()
    }

    /// Is `(a, b)` a reduction edge?
    pub fn is_edge(&self, a: usize, b: usize) -> Result<bool> {
        let mut ops = 0;
        self.is_edge_counted(a, b, &mut ops)
    }

    pub fn is_edge_counted(&self, a: usize, b: usize, ops: &mut u32) -> Result<bool> {
        check_range(a, self.n())?;
        check_range(b, self.n())?;
        if a == b {
            return Ok(false);
        }
        *ops += 2;
        let ca = self.flat.coords(a)?;
        let cb = self.flat.coords(b)?;
        match self.flat.query_coords(&ca, &cb, ops)? {
            FlattenAnswer::Yes => Ok(true),
            FlattenAnswer::No => Ok(false),
            FlattenAnswer::DifferentAntichains => Err(corrupt("reduction index has more than one merge group")),
        }
    }

    pub fn space_report(&self) -> SpaceReport {
        SpaceReport::new(
            self.n(),
            vec![("flatten.merged", self.flat.merged_bits().size_bits()), ("flatten.tables", self.flat.aux_bits())],
        )
    }

    pub(crate) fn write_sections(&self, w: &mut SectionWriter) {
        w.add(*b"RIDX", |w| self.flat.write_to(w));
    }

    pub(crate) fn read_sections(r: &mut SectionReader<'_>) -> Result<Self> {
        let flat = r.read(*b"RIDX", FlattenOutput::read_from)?;
        if flat.n() > 0 && flat.residual().height() != 1 {
            return Err(corrupt("reduction index has more than one merge group"));
        }
        Ok(Self { flat })
    }
}

/// Reachability in an arbitrary digraph through its condensation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityOracle {
    component_of: PackedInts,
    poset: SuccinctPoset,
}

impl ReachabilityOracle {
    pub fn build(g: &Digraph) -> Result<Self> {
        Self::build_with(g, &CompressConfig::default())
    }

    pub fn build_with(g: &Digraph, cfg: &CompressConfig) -> Result<Self> {
        let comps = strongly_connected_components(g);
        let dag = condensation(g, &comps);
        let closure = transitive_closure(&dag)?;
        let poset = SuccinctPoset::build_with(&closure, cfg)?;
        log::debug!("reachability: n={} components={}", g.n(), comps.count);
        let ids: Vec<u64> = comps.component_of.iter().map(|&c| c as u64).collect();
        Ok(Self { component_of: PackedInts::from_slice(&ids), poset })
    }

    pub fn n(&self) -> usize {
        self.component_of.len()
    }

    pub fn poset(&self) -> &SuccinctPoset {
        &self.poset
    }

    pub fn component_count(&self) -> usize {
        self.poset.n()
    }

    pub fn component_of(&self, a: usize) -> Result<usize> {
        check_range(a, self.n())?;
        Ok(self.component_of.get(a) as usize)
    }

    pub fn reachable(&self, a: usize, b: usize) -> Result<bool> {
        let mut ops = 0;
        self.reachable_counted(a, b, &mut ops)
    }

    pub fn reachable_counted(&self, a: usize, b: usize, ops: &mut u32) -> Result<bool> {
        check_range(a, self.n())?;
        check_range(b, self.n())?;
        *ops += 2;
        let (ca, cb) = (self.component_of.get(a) as usize, self.component_of.get(b) as usize);
        if ca == cb {
            return Ok(true);
        }
        self.poset.precedes_counted(ca, cb, ops)
    }

    pub fn space_report(&self) -> SpaceReport {
        let mut sections = vec![("components", self.component_of.size_bits())];
        sections.extend(self.poset.space_report().sections);
        SpaceReport::new(self.n(), sections)
    }

    pub(crate) fn write_sections(&self, w: &mut SectionWriter) {
        w.add(*b"COMP", |w| self.component_of.write_to(w));
        self.poset.write_sections(w);
    }

    pub(crate) fn read_sections(r: &mut SectionReader<'_>) -> Result<Self> {
        let component_of = r.read(*b"COMP", PackedInts::read_from)?;
        let poset = SuccinctPoset::read_sections(r)?;
        if component_of.iter().any(|c| c as usize >= poset.n()) {
            return Err(corrupt("component id outside the condensation"));
        }
        Ok(Self { component_of, poset })
    }
}

/// First witness of non-transitivity, if any.
pub fn check_transitive(m: &BitMatrix) -> Result<()> {
    for a in 0..m.n() {
        for b in m.row_iter(a) {
            let missing = m.row(b).iter().zip(m.row(a)).enumerate().find(|(_, (rb, ra))| **rb & !**ra != 0);
            if let Some((wi, (rb, ra))) = missing {
                let c = wi * 64 + (rb & !ra).trailing_zeros() as usize;
                return Err(Error::NotTransitive { a, b, c });
            }
        }
    }
    Ok(())
}

/// Arbitrary transitive relation: diagonal bits plus reachability over the
/// distinct pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitiveRelationOracle {
    reflexive: CompressedBitSequence,
    quasi: ReachabilityOracle,
}

impl TransitiveRelationOracle {
    pub fn build(rel: &BitMatrix) -> Result<Self> {
        Self::build_with(rel, &CompressConfig::default())
    }

    pub fn build_with(rel: &BitMatrix, cfg: &CompressConfig) -> Result<Self> {
        check_transitive(rel)?;
        let n = rel.n();
        let reflexive = CompressedBitSequence::from_bools(&(0..n).map(|a| rel.get(a, a)).collect::<Vec<_>>());
        let g = Digraph::from_edges(n, rel.pairs().into_iter().filter(|(a, b)| a != b))?;
        Ok(Self { reflexive, quasi: ReachabilityOracle::build_with(&g, cfg)? })
    }

    pub fn n(&self) -> usize {
        self.reflexive.len()
    }

    /// Is `(a, b)` in the relation?
    pub fn query(&self, a: usize, b: usize) -> Result<bool> {
        let mut ops = 0;
        self.query_counted(a, b, &mut ops)
    }

    pub fn query_counted(&self, a: usize, b: usize, ops: &mut u32) -> Result<bool> {
        check_range(a, self.n())?;
        check_range(b, self.n())?;
        if a == b {
            *ops += 1;
            return self.reflexive.access(a + 1);
        }
        self.quasi.reachable_counted(a, b, ops)
    }

    pub fn space_report(&self) -> SpaceReport {
        let mut sections = vec![("reflexive", self.reflexive.size_bits())];
        sections.extend(self.quasi.space_report().sections);
        SpaceReport::new(self.n(), sections)
    }

    pub(crate) fn write_sections(&self, w: &mut SectionWriter) {
        w.add(*b"REFL", |w| self.reflexive.write_to(w));
        self.quasi.write_sections(w);
    }

    pub(crate) fn read_sections(r: &mut SectionReader<'_>) -> Result<Self> {
        let reflexive = r.read(*b"REFL", CompressedBitSequence::read_from)?;
        let quasi = ReachabilityOracle::read_sections(r)?;
        if quasi.n() != reflexive.len() {
            return Err(corrupt("relation sections disagree on the element count"));
        }
        Ok(Self { reflexive, quasi })
    }
}

/// What a built oracle answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Poset,
    Reduction,
    Digraph,
    Relation,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Poset, Mode::Reduction, Mode::Digraph, Mode::Relation];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Poset => "poset",
            Mode::Reduction => "reduction",
            Mode::Digraph => "digraph",
            Mode::Relation => "relation",
        }
    }

    pub fn code(self) -> u16 {
        match self {
            Mode::Poset => 1,
            Mode::Reduction => 2,
            Mode::Digraph => 3,
            Mode::Relation => 4,
        }
    }

    pub fn from_code(code: u16) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.code() == code)
    }

    /// Mode used when only the edge semantics are given.
    pub fn for_semantics(s: EdgeSemantics) -> Self {
        match s {
            EdgeSemantics::Cover | EdgeSemantics::Closure => Mode::Poset,
            EdgeSemantics::Digraph => Mode::Digraph,
            EdgeSemantics::Relation => Mode::Relation,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| format!("unknown mode '{s}'"))
    }
}

/// Any of the four oracles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Oracle {
    Poset(SuccinctPoset),
    Reduction(ReductionIndex),
    Digraph(ReachabilityOracle),
    Relation(TransitiveRelationOracle),
}

fn closure_of(inst: &Instance) -> Result<ClosureMatrix> {
    match inst.semantics {
        EdgeSemantics::Cover | EdgeSemantics::Digraph => {
            transitive_closure(&Digraph::from_edges(inst.n, inst.edges.iter().copied())?)
        }
        EdgeSemantics::Closure => ClosureMatrix::from_pairs(inst.n, inst.edges.iter().copied()),
        EdgeSemantics::Relation => {
            let m = BitMatrix::from_pairs(inst.n, inst.edges.iter().copied())?;
            check_transitive(&m)?;
            ClosureMatrix::new(m)
        }
    }
}

impl Oracle {
    /// Builds the oracle for `mode` from an instance read under its edge semantics.
    pub fn build(inst: &Instance, mode: Mode) -> Result<Self> {
        Self::build_with(inst, mode, &CompressConfig::default())
    }

    pub fn build_with(inst: &Instance, mode: Mode, cfg: &CompressConfig) -> Result<Self> {
        Ok(match mode {
            Mode::Poset => Oracle::Poset(SuccinctPoset::build_with(&closure_of(inst)?, cfg)?),
            Mode::Reduction => Oracle::Reduction(match inst.semantics {
                EdgeSemantics::Cover => ReductionIndex::build(&Digraph::from_edges(inst.n, inst.edges.iter().copied())?)?,
                _ => ReductionIndex::from_closure(&closure_of(inst)?)?,
            }),
            Mode::Digraph => {
                Oracle::Digraph(ReachabilityOracle::build_with(&Digraph::from_edges(inst.n, inst.edges.iter().copied())?, cfg)?)
            }
            Mode::Relation => Oracle::Relation(TransitiveRelationOracle::build_with(
                &BitMatrix::from_pairs(inst.n, inst.edges.iter().copied())?,
                cfg,
            )?),
        })
    }

    pub fn mode(&self) -> Mode {
        match self {
            Oracle::Poset(_) => Mode::Poset,
            Oracle::Reduction(_) => Mode::Reduction,
            Oracle::Digraph(_) => Mode::Digraph,
            Oracle::Relation(_) => Mode::Relation,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Oracle::Poset(o) => o.n(),
            Oracle::Reduction(o) => o.n(),
            Oracle::Digraph(o) => o.n(),
            Oracle::Relation(o) => o.n(),
        }
    }

    /// The mode's question for `(a, b)`: precedes, reduction edge, reachable, or related.
    pub fn query(&self, a: usize, b: usize) -> Result<bool> {
        let mut ops = 0;
        self.query_counted(a, b, &mut ops)
    }

    pub fn query_counted(&self, a: usize, b: usize, ops: &mut u32) -> Result<bool> {
        match self {
            Oracle::Poset(o) => o.precedes_counted(a, b, ops),
            Oracle::Reduction(o) => o.is_edge_counted(a, b, ops),
            Oracle::Digraph(o) => o.reachable_counted(a, b, ops),
            Oracle::Relation(o) => o.query_counted(a, b, ops),
        }
    }

    pub fn bit_sequences(&self) -> Vec<&CompressedBitSequence> {
        match self {
            Oracle::Poset(o) => o.bit_sequences(),
            Oracle::Reduction(o) => vec![o.flat.merged_bits()],
            Oracle::Digraph(o) => o.poset.bit_sequences(),
            Oracle::Relation(o) => {
                let mut v = vec![&o.reflexive];
                v.extend(o.quasi.poset.bit_sequences());
                v
            }
        }
    }

    pub fn space_report(&self) -> SpaceReport {
        match self {
            Oracle::Poset(o) => o.space_report(),
            Oracle::Reduction(o) => o.space_report(),
            Oracle::Digraph(o) => o.space_report(),
            Oracle::Relation(o) => o.space_report(),
        }
    }

    pub(crate) fn write_sections(&self, w: &mut SectionWriter) {
        match self {
            Oracle::Poset(o) => o.write_sections(w),
            Oracle::Reduction(o) => o.write_sections(w),
            Oracle::Digraph(o) => o.write_sections(w),
            Oracle::Relation(o) => o.write_sections(w),
        }
    }

    pub(crate) fn read_sections(mode: Mode, r: &mut SectionReader<'_>) -> Result<Self> {
        Ok(match mode {
            Mode::Poset => Oracle::Poset(SuccinctPoset::read_sections(r)?),
            Mode::Reduction => Oracle::Reduction(ReductionIndex::read_sections(r)?),
            Mode::Digraph => Oracle::Digraph(ReachabilityOracle::read_sections(r)?),
            Mode::Relation => Oracle::Relation(TransitiveRelationOracle::read_sections(r)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_element() {
        let p = SuccinctPoset::build(&ClosureMatrix::from_pairs(1, []).unwrap()).unwrap();
        assert!(p.precedes(0, 0).unwrap());
        assert!(matches!(p.precedes(0, 1), Err(Error::Range { .. })));
    }

    #[test]
    fn chain_of_three() {
        let c = transitive_closure(&Digraph::from_edges(3, [(0, 1), (1, 2)]).unwrap()).unwrap();
        let p = SuccinctPoset::build(&c).unwrap();
        assert!(p.precedes(0, 2).unwrap());
        assert!(!p.precedes(2, 0).unwrap());
        let r = ReductionIndex::from_closure(&c).unwrap();
        assert!(r.is_edge(0, 1).unwrap());
        assert!(!r.is_edge(0, 2).unwrap());
    }

    #[test]
    fn two_element_antichain() {
        let p = SuccinctPoset::build(&ClosureMatrix::from_pairs(2, []).unwrap()).unwrap();
        assert!(!p.precedes(0, 1).unwrap());
        assert!(!p.precedes(1, 0).unwrap());
    }

    #[test]
    fn reduction_rejects_implied_edge() {
        let g = Digraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(ReductionIndex::build(&g), Err(Error::NotAReduction { u: 0, v: 2 }));
    }

    #[test]
    fn two_cycle_reachable_both_ways() {
        let o = ReachabilityOracle::build(&Digraph::from_edges(2, [(0, 1), (1, 0)]).unwrap()).unwrap();
        assert!(o.reachable(0, 1).unwrap() && o.reachable(1, 0).unwrap());
        assert_eq!(o.component_count(), 1);
    }

    #[test]
    fn relation_diagonal() {
        let m = BitMatrix::from_pairs(2, [(0, 0)]).unwrap();
        let o = TransitiveRelationOracle::build(&m).unwrap();
        assert!(o.query(0, 0).unwrap());
        assert!(!o.query(1, 1).unwrap());
        assert!(!o.query(0, 1).unwrap());
        let bad = BitMatrix::from_pairs(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(TransitiveRelationOracle::build(&bad), Err(Error::NotTransitive { a: 0, b: 1, c: 2 }));
        let full = BitMatrix::from_pairs(3, (0..3).flat_map(|a| (0..3).map(move |b| (a, b)))).unwrap();
        let o = TransitiveRelationOracle::build(&full).unwrap();
        assert!((0..3).all(|a| (0..3).all(|b| o.query(a, b).unwrap())));
    }
}

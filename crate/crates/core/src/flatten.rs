//! Flattening: merge thin consecutive levels until at most `gamma` remain.
//!
//! Levels are scanned left to right. Whenever the current level and the next
//! one together hold at most `2n / gamma` elements they are merged: the
//! `|lower| * |upper|` relation bits between them are emitted (one section per
//! lower element, each as long as the upper level) and the upper level is
//! appended to the lower one. Otherwise the scan advances. All emitted
//! sections are concatenated into one compressed sequence.
//!
//! The upper side of a merge is always an untouched original level, so the
//! per-level record `A[k]` (start of the merge output, size of the lower side
//! at merge time) is keyed by original level index. An element of original
//! level `k` with rank `x` ends up at rank `x + A[k].len` in its residual level.

use crate::bits::{lg, BitBuf, PackedInts};
use crate::bitseq::CompressedBitSequence;
use crate::codec::{ByteReader, ByteWriter};
use crate::error::{corrupt, Error, Result};
use crate::order::{AntichainDecomposition, BitMatrix};

/// Answer of a query restricted to the residual levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlattenAnswer {
    Yes,
    No,
    DifferentAntichains,
}

/// Where an element sits before and after flattening (all 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coords {
    pub level: usize,
    pub rank: usize,
    pub res_level: usize,
    pub res_rank: usize,
}

/// Record of an original level that was the upper side of a merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeRecord {
    /// 1-based start of the merge output inside the concatenated sequence.
    pub seq_offset: usize,
    /// Size of the lower side at merge time.
    pub len: usize,
    /// Size of the upper side (section length).
    pub upper_len: usize,
}

/// Bits of one merge step: section `x` holds `rel(lower[x], upper[y])` for every `y`.
pub fn merge_bits(lower: &[usize], upper: &[usize], rel: &BitMatrix) -> BitBuf {
    let mut out = BitBuf::with_capacity(lower.len() * upper.len());
    for &l in lower {
        for &u in upper {
            out.push(rel.get(l, u));
        }
    }
    out
}

/// Working state of the merge schedule; exposed for step-by-step inspection.
#[derive(Debug, Clone)]
pub struct Flattener<'a> {
    rel: &'a BitMatrix,
    groups: Vec<Vec<usize>>,
    group_levels: Vec<Vec<usize>>,
    parts: Vec<BitBuf>,
    records: Vec<Option<(usize, usize, usize)>>,
    next_part_start: usize,
}

impl<'a> Flattener<'a> {
    pub fn new(d: &AntichainDecomposition, rel: &'a BitMatrix) -> Self {
        Self {
            rel,
            groups: d.levels().to_vec(),
            group_levels: (0..d.height()).map(|h| vec![h]).collect(),
            parts: Vec::new(),
            records: vec![None; d.height()],
            next_part_start: 1,
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Merges working levels `i` and `i + 1`, returning the emitted bits.
    pub fn merge_step(&mut self, i: usize) -> Result<&BitBuf> {
        if i + 1 >= self.groups.len() {
            return Err(Error::Precondition(format!(
                "merge of levels {i} and {} but only {} levels remain",
                i + 1,
                self.groups.len()
            )));
        }
        let upper_levels = self.group_levels.remove(i + 1);
        if upper_levels.len() != 1 {
            return Err(Error::Precondition("upper side of a merge must be an original level".into()));
        }
        let upper = self.groups.remove(i + 1);
        let lower = &mut self.groups[i];
        let bits = merge_bits(lower, &upper, self.rel);
        self.records[upper_levels[0]] = Some((self.next_part_start, lower.len(), upper.len()));
        self.next_part_start += bits.len();
        lower.extend_from_slice(&upper);
        self.group_levels[i].extend(upper_levels);
        self.parts.push(bits);
        Ok(self.parts.last().expect("just pushed"))
    }
}

/// Result of flattening: residual levels, merge output and lookup tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlattenOutput {
    n: usize,
    gamma: usize,
    raw_bits: usize,
    residual: AntichainDecomposition,
    merged_bits: CompressedBitSequence,
    level_sizes: PackedInts,
    group_first_level: PackedInts,
    a_offset: PackedInts,
    a_len: PackedInts,
    a_upper_len: PackedInts,
    orig_level: PackedInts,
    orig_rank: PackedInts,
    res_level: PackedInts,
    res_rank: PackedInts,
}

/// `lg n`, at least 1: the default level budget.
pub fn default_gamma(n: usize) -> usize {
    (lg(n as u64) as usize).max(1)
}

/// Runs the merge schedule with level budget `gamma` on relation bits `rel`.
///
/// `rel` is normally the closure; any relation whose pairs only go from lower
/// to higher levels can be indexed the same way.
pub fn flatten(d: &AntichainDecomposition, rel: &BitMatrix, gamma: usize) -> Result<FlattenOutput> {
    if gamma == 0 {
        return Err(Error::Precondition("gamma must be at least 1".into()));
    }
    let n = d.n();
    let mut f = Flattener::new(d, rel);
    let mut i = 0;
    while i < f.groups.len() {
        if i + 1 < f.groups.len() && (f.groups[i].len() + f.groups[i + 1].len()) * gamma <= 2 * n {
            f.merge_step(i)?;
        } else {
            i += 1;
        }
    }
    log::debug!("flatten: n={n} gamma={gamma} levels {} -> {}", d.height(), f.groups.len());

    let (merged_bits, _) = CompressedBitSequence::concat_build(&f.parts);
    let raw_bits = merged_bits.len();
    let residual = AntichainDecomposition::from_levels(n, f.groups.clone())?;

    let h = d.height();
    let mut a_offset = vec![0u64; h];
    let mut a_len = vec![0u64; h];
    let mut a_upper = vec![0u64; h];
    for (k, r) in f.records.iter().enumerate() {
        if let Some((off, len, up)) = *r {
            a_offset[k] = off as u64;
            a_len[k] = len as u64;
            a_upper[k] = up as u64;
        }
    }
    let coords = |e: usize| {
        (d.height_of(e) as u64, d.rank_of(e) as u64, residual.height_of(e) as u64, residual.rank_of(e) as u64)
    };
    let all: Vec<_> = (0..n).map(coords).collect();

    Ok(FlattenOutput {
        n,
        gamma,
        raw_bits,
        merged_bits,
        level_sizes: PackedInts::from_slice(&d.levels().iter().map(|l| l.len() as u64).collect::<Vec<_>>()),
        group_first_level: PackedInts::from_slice(
            &f.group_levels.iter().map(|g| g[0] as u64).collect::<Vec<_>>(),
        ),
        a_offset: PackedInts::from_slice(&a_offset),
        a_len: PackedInts::from_slice(&a_len),
        a_upper_len: PackedInts::from_slice(&a_upper),
        orig_level: PackedInts::from_slice(&all.iter().map(|c| c.0).collect::<Vec<_>>()),
        orig_rank: PackedInts::from_slice(&all.iter().map(|c| c.1).collect::<Vec<_>>()),
        res_level: PackedInts::from_slice(&all.iter().map(|c| c.2).collect::<Vec<_>>()),
        res_rank: PackedInts::from_slice(&all.iter().map(|c| c.3).collect::<Vec<_>>()),
        residual,
    })
}

/// Sizes of one flatten run, against the `c * n^2 / gamma` budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlattenSizeReport {
    pub raw_bits: usize,
    pub compressed_bits: u64,
    pub aux_bits: u64,
    pub budget_bits: f64,
    pub within_budget: bool,
}

/// Budget constant `c` in `c * n^2 / gamma`.
pub const FLATTEN_BUDGET_C: f64 = 4.0;

impl FlattenOutput {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn residual(&self) -> &AntichainDecomposition {
        &self.residual
    }

    pub fn merged_bits(&self) -> &CompressedBitSequence {
        &self.merged_bits
    }

    /// Uncompressed number of emitted bits.
    pub fn raw_bits(&self) -> usize {
        self.raw_bits
    }

    pub fn original_height(&self) -> usize {
        self.level_sizes.len()
    }

    pub fn record(&self, level: usize) -> Option<MergeRecord> {
        let off = self.a_offset.get(level) as usize;
        (off != 0).then(|| MergeRecord {
            seq_offset: off,
            len: self.a_len.get(level) as usize,
            upper_len: self.a_upper_len.get(level) as usize,
        })
    }

    /// Original level sizes of each residual level, bottom to top.
    pub fn merge_groups(&self) -> Vec<Vec<usize>> {
        let h = self.level_sizes.len();
        let firsts: Vec<usize> = self.group_first_level.iter().map(|x| x as usize).collect();
        firsts
            .iter()
            .enumerate()
            .map(|(g, &first)| {
                let end = firsts.get(g + 1).copied().unwrap_or(h);
                (first..end).map(|k| self.level_sizes.get(k) as usize).collect()
            })
            .collect()
    }

    #[inline]
    pub fn coords(&self, a: usize) -> Result<Coords> {
        if a >= self.n {
            return Err(Error::Range { index: a, lo: 0, hi: self.n.saturating_sub(1) });
        }
        Ok(Coords {
            level: self.orig_level.get(a) as usize,
            rank: self.orig_rank.get(a) as usize,
            res_level: self.res_level.get(a) as usize,
            res_rank: self.res_rank.get(a) as usize,
        })
    }

    /// Does `a` strictly precede `b`, for `a` and `b` in the same residual level?
    pub fn query(&self, a: usize, b: usize) -> Result<FlattenAnswer> {
        if a == b {
            return Err(Error::Precondition("flatten query needs two distinct elements".into()));
        }
        let mut ops = 0;
        let ca = self.coords(a)?;
        let cb = self.coords(b)?;
        self.query_coords(&ca, &cb, &mut ops)
    }

    /// Query on looked-up coordinates; `ops` counts table reads and sequence probes.
    pub(crate) fn query_coords(&self, a: &Coords, b: &Coords, ops: &mut u32) -> Result<FlattenAnswer> {
        if a.res_level != b.res_level {
            return Ok(FlattenAnswer::DifferentAntichains);
        }
        if a.level >= b.level {
            return Ok(FlattenAnswer::No);
        }
        // `b` sits in the upper side of the merge that absorbed its level;
        // `a` was already part of the lower side then.
        *ops += 2;
        let off = self.a_offset.try_get(b.level)? as usize;
        let upper_len = self.a_upper_len.try_get(b.level)? as usize;
        let lower_rank = a.rank + self.a_len.try_get(a.level)? as usize;
        if off == 0 {
            return Err(corrupt("merged level without a merge record"));
        }
        let pos = off + lower_rank * upper_len + b.rank;
        *ops += 1;
        Ok(if self.merged_bits.access(pos)? { FlattenAnswer::Yes } else { FlattenAnswer::No })
    }

    pub fn size_report(&self) -> FlattenSizeReport {
        let budget = FLATTEN_BUDGET_C * (self.n as f64).powi(2) / self.gamma as f64;
        FlattenSizeReport {
            raw_bits: self.raw_bits,
            compressed_bits: self.merged_bits.size_bits(),
            aux_bits: self.aux_bits(),
            budget_bits: budget,
            within_budget: self.raw_bits as f64 <= budget,
        }
    }

    /// Bits of the `A` records, the lookup table and the level tables.
    pub fn aux_bits(&self) -> u64 {
        [
            &self.level_sizes,
            &self.group_first_level,
            &self.a_offset,
            &self.a_len,
            &self.a_upper_len,
            &self.orig_level,
            &self.orig_rank,
            &self.res_level,
            &self.res_rank,
        ]
        .iter()
        .map(|p| p.size_bits())
        .sum()
    }

    pub fn size_bits(&self) -> u64 {
        self.merged_bits.size_bits() + self.aux_bits()
    }

    pub fn write_to(&self, w: &mut ByteWriter) {
        w.put_usize(self.n);
        w.put_usize(self.gamma);
        for p in [
            &self.level_sizes,
            &self.group_first_level,
            &self.a_offset,
            &self.a_len,
            &self.a_upper_len,
            &self.orig_level,
            &self.orig_rank,
            &self.res_level,
            &self.res_rank,
        ] {
            p.write_to(w);
        }
        self.merged_bits.write_to(w);
    }

    pub fn read_from(r: &mut ByteReader<'_>) -> Result<Self> {
        let n = r.get_usize()?;
        let gamma = r.get_usize()?;
        let mut tables = Vec::with_capacity(9);
        for _ in 0..9 {
            tables.push(PackedInts::read_from(r)?);
        }
        let merged_bits = CompressedBitSequence::read_from(r)?;
        let mut it = tables.into_iter();
        let mut next = || it.next().expect("nine tables");
        let (level_sizes, group_first_level, a_offset, a_len, a_upper_len) = (next(), next(), next(), next(), next());
        let (orig_level, orig_rank, res_level, res_rank) = (next(), next(), next(), next());

        if gamma == 0 {
            return Err(corrupt("flatten gamma is zero"));
        }
        let h = level_sizes.len();
        if [&a_offset, &a_len, &a_upper_len].iter().any(|t| t.len() != h)
            || [&orig_level, &orig_rank, &res_level, &res_rank].iter().any(|t| t.len() != n)
        {
            return Err(corrupt("flatten table lengths disagree"));
        }
        let groups = group_first_level.len();
        let mut levels = vec![Vec::new(); groups];
        for e in 0..n {
            let (l, x, g, y) = (orig_level.get(e), orig_rank.get(e), res_level.get(e) as usize, res_rank.get(e));
            if l as usize >= h || x >= level_sizes.get(l as usize) || g >= groups {
                return Err(corrupt("flatten lookup entry out of range"));
            }
            if y != x + a_len.get(l as usize) {
                return Err(corrupt("residual rank disagrees with merge offset"));
            }
            levels[g].push((y, e));
        }
        let levels: Vec<Vec<usize>> = levels
            .into_iter()
            .map(|mut l| {
                l.sort_unstable();
                l.into_iter().map(|(_, e)| e).collect()
            })
            .collect();
        for l in &levels {
            for (i, &e) in l.iter().enumerate() {
                if res_rank.get(e) as usize != i {
                    return Err(corrupt("residual ranks are not a permutation"));
                }
            }
        }
        for k in 0..h {
            let off = a_offset.get(k) as usize;
            if off != 0 {
                let end = (off - 1).checked_add(a_len.get(k) as usize * a_upper_len.get(k) as usize);
                if end.is_none_or(|e| e > merged_bits.len()) {
                    return Err(corrupt("merge record points past the merged bits"));
                }
            }
        }
        let residual = AntichainDecomposition::from_levels(n, levels).map_err(|e| corrupt(e.to_string()))?;
        Ok(Self {
            n,
            gamma,
            raw_bits: merged_bits.len(),
            residual,
            merged_bits,
            level_sizes,
            group_first_level,
            a_offset,
            a_len,
            a_upper_len,
            orig_level,
            orig_rank,
            res_level,
            res_rank,
        })
    }
}

/// `sum_{i=s}^{t-1} (sum_{j=s}^{i} n_j) * n_{i+1}` for one merge group.
pub fn merge_group_bits(sizes: &[usize]) -> usize {
    let mut prefix = 0;
    let mut total = 0;
    for w in sizes.windows(2) {
        prefix += w[0];
        total += prefix * w[1];
    }
    total
}

/// `n_{s,t} (n_{s,t} - 1) / 2` for one merge group.
pub fn merge_group_bound(sizes: &[usize]) -> usize {
    let s: usize = sizes.iter().sum();
    s * s.saturating_sub(1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::order::{height_decomposition, ClosureMatrix};

    fn flat(c: &ClosureMatrix, gamma: usize) -> FlattenOutput {
        flatten(&height_decomposition(c), c.matrix(), gamma).unwrap()
    }

    #[test]
    fn merge_step_single_pairs() {
        let c = gen::chain(2).unwrap();
        assert_eq!(merge_bits(&[0], &[1], c.matrix()), BitBuf::from_bools([true]));
        let a = gen::antichain(2).unwrap();
        assert_eq!(merge_bits(&[0], &[1], a.matrix()), BitBuf::from_bools([false]));
    }

    #[test]
    fn merge_step_reads_matrix_cells() {
        let c = gen::random_layered_poset(5, 3).unwrap();
        let (lower, upper) = ([0usize, 1], [2usize, 3, 4]);
        let bits = merge_bits(&lower, &upper, c.matrix());
        assert_eq!(bits.len(), 6);
        for (x, &l) in lower.iter().enumerate() {
            for (y, &u) in upper.iter().enumerate() {
                assert_eq!(bits.get(x * 3 + y), c.less(l, u));
            }
        }
    }

    #[test]
    fn merge_step_rejects_missing_upper() {
        let c = gen::chain(2).unwrap();
        let d = height_decomposition(&c);
        let mut f = Flattener::new(&d, c.matrix());
        assert!(f.merge_step(1).is_err());
        assert!(f.merge_step(0).is_ok());
        assert!(f.merge_step(0).is_err());
    }

    #[test]
    fn chain_of_four_collapses() {
        let c = gen::chain(4).unwrap();
        let f = flat(&c, 2);
        assert_eq!(f.residual().height(), 1);
        assert_eq!(f.raw_bits(), 6);
        assert_eq!(f.merge_groups(), vec![vec![1, 1, 1, 1]]);
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    let want = if a < b { FlattenAnswer::Yes } else { FlattenAnswer::No };
                    assert_eq!(f.query(a, b).unwrap(), want);
                }
            }
        }
        assert_eq!(f.record(3), Some(MergeRecord { seq_offset: 4, len: 3, upper_len: 1 }));
        assert_eq!(f.record(0), None);
    }

    #[test]
    fn antichain_emits_nothing() {
        let f = flat(&gen::antichain(6).unwrap(), 3);
        assert_eq!(f.raw_bits(), 0);
        assert_eq!(f.size_report().raw_bits, 0);
        assert_eq!(f.query(0, 1).unwrap(), FlattenAnswer::No);
    }

    #[test]
    fn different_residual_levels() {
        // Two big levels never merge at gamma = 8.
        let c = gen::random_layered_poset(16, 1).unwrap();
        let f = flat(&c, 8);
        let d = f.residual();
        let a = d.level(0)[0];
        let b = d.level(1)[0];
        assert_eq!(f.query(a, b).unwrap(), FlattenAnswer::DifferentAntichains);
    }

    #[test]
    fn rejects_zero_gamma_and_bad_elements() {
        let c = gen::chain(3).unwrap();
        assert!(flatten(&height_decomposition(&c), c.matrix(), 0).is_err());
        let f = flat(&c, 1);
        assert!(matches!(f.query(0, 3), Err(Error::Range { .. })));
        assert!(f.query(1, 1).is_err());
    }

    #[test]
    fn group_formula() {
        assert_eq!(merge_group_bits(&[1, 1, 1, 1]), 6);
        assert_eq!(merge_group_bound(&[1, 1, 1, 1]), 6);
        assert_eq!(merge_group_bits(&[2, 3]), 6);
        assert_eq!(merge_group_bits(&[5]), 0);
    }
}

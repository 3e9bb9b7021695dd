//! Compression of a flat poset and its constant-time precedence index.
//!
//! The working decomposition starts as the flat levels. Each round either
//! removes a balanced biclique `D` from a dense consecutive pair (emitting
//! `W-`, `W+` and one connectivity code per remaining outside element) or
//! merges the two lowest working levels (emitting their relation bits).
//! It stops when one working level is left.
//!
//! Elements are addressed by their position `p` in the level-by-level order
//! (1-based, `p = F[level] + rank + 1`). The membership sequence `M'_l` marks
//! positions still present before the `l`-th removal, so `rank(M'_l, p)`
//! locates an element inside any output produced at that time.
//!
//! Only the lowest working level ever absorbs others, so the upper side of a
//! merge, and the upper side of a dense pair, is always one flat level.

use crate::biclique::{find_balanced_biclique, target_q, verify_biclique, BicliqueConfig, BipartiteGraph};
use crate::bits::{lg, BitBuf, PackedInts};
use crate::bitseq::CompressedBitSequence;
use crate::codec::{ByteReader, ByteWriter};
use crate::error::{corrupt, Error, Result};
use crate::flatten::merge_bits;
use crate::order::{AntichainDecomposition, BitMatrix};

/// Largest side size kept from a biclique; codes stay within one word.
pub const MAX_Q: usize = 31;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressConfig {
    pub biclique: BicliqueConfig,
    pub max_q: usize,
}

impl Default for CompressConfig {
    fn default() -> Self {
        Self { biclique: BicliqueConfig::default(), max_q: MAX_Q }
    }
}

/// An element of the flat poset with its level and rank (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatElement {
    pub label: usize,
    pub level: usize,
    pub rank: usize,
}

/// Per-element record: which removal took the element, and where.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementRecord {
    /// Removal ordinal (1-based), `None` if never removed.
    pub id: Option<usize>,
    /// Position in `D` (1-based; lower side first).
    pub rank: usize,
    pub top: bool,
    /// Pair members before / after the element in level order at removal.
    pub ds: usize,
    pub dt: usize,
}

/// Merge step that absorbed a flat level as its upper side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatMergeRecord {
    /// 1-based start inside the concatenated merge output.
    pub seq_offset: usize,
    /// Number of removals before the merge, plus one.
    pub delta: usize,
    /// Lower side size at merge time.
    pub len: usize,
    pub upper_len: usize,
}

/// Fixed part of one removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RemovalHeader {
    pub lower_first_level: usize,
    pub upper_level: usize,
    pub q: usize,
    pub lower_size: usize,
    pub upper_size: usize,
    /// Bit offset of `W-` inside the dense payload; `W+` and `Y` follow.
    pub offset: usize,
    pub y_len: usize,
}

impl RemovalHeader {
    fn w_plus_start(&self) -> usize {
        self.offset + self.q * self.upper_size
    }

    fn y_start(&self) -> usize {
        self.w_plus_start() + self.q * self.lower_size
    }

    fn end(&self) -> usize {
        self.y_start() + self.y_len * (self.q + 1)
    }
}

/// Expanded view of one removal, for inspection and tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseRemoval {
    pub ell: usize,
    pub header: RemovalHeader,
    /// `D` in rank order: lower side then upper side.
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    /// The two working levels at removal time, in level order.
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    /// Remaining elements outside the pair, in level order.
    pub h: Vec<usize>,
    /// How many of `h` lie below the pair.
    pub h_below: usize,
    pub w_minus: Vec<BitBuf>,
    pub w_plus: Vec<BitBuf>,
    pub y: Vec<u64>,
}

/// Largest legal connectivity code for side size `q`.
pub fn max_code(q: usize) -> u64 {
    (1u64 << (q + 1)) - 2
}

/// Code of an outside element `v` against `D = left ∪ right`.
///
/// Above the pair, an edge to any upper member forces edges to every lower
/// member, so only the upper mask is stored; without upper edges the lower
/// mask is stored past `2^q - 1`. Below the pair the roles swap.
pub(crate) fn code_for(v: usize, left: &[usize], right: &[usize], above: bool, rel: &BitMatrix) -> Result<u64> {
    let q = left.len();
    let edge = |d: usize| if above { rel.get(d, v) } else { rel.get(v, d) };
    let mask = |side: &[usize]| side.iter().enumerate().fold(0u64, |m, (k, &d)| m | (edge(d) as u64) << k);
    let (primary, secondary) = if above { (right, left) } else { (left, right) };
    let pm = mask(primary);
    let sm = mask(secondary);
    if pm != 0 {
        let full = (1u64 << q) - 1;
        if sm != full {
            let k = (!sm & full).trailing_zeros() as usize;
            let hit = primary[pm.trailing_zeros() as usize];
            return Err(if above {
                Error::NotTransitive { a: left[k], b: hit, c: v }
            } else {
                Error::NotTransitive { a: v, b: hit, c: right[k] }
            });
        }
        return Ok(pm);
    }
    Ok(if sm == 0 { 0 } else { (1u64 << q) - 1 + sm })
}

/// Code of `v` against a removal; `v` must be one of its outside elements.
pub fn connectivity_code(v: usize, removal: &DenseRemoval, rel: &BitMatrix) -> Result<u64> {
    let idx = removal.h.iter().position(|&x| x == v).ok_or(Error::Domain(v))?;
    code_for(v, &removal.left, &removal.right, idx >= removal.h_below, rel)
}

/// Does the code record an edge between the outside element and the member
/// of `D` with rank `a_rank` (1-based) and side `a_top`?
pub fn decode_edge(code: u64, q: usize, a_rank: usize, a_top: bool, v_above: bool) -> Result<bool> {
    if code > max_code(q) {
        return Err(corrupt(format!("connectivity code {code} exceeds {}", max_code(q))));
    }
    if a_rank == 0 || a_rank > 2 * q {
        return Err(corrupt(format!("biclique rank {a_rank} outside 1..={}", 2 * q)));
    }
    if code == 0 {
        return Ok(false);
    }
    let primary_top = v_above;
    let bit = |mask: u64| (mask >> (if a_top { a_rank - q - 1 } else { a_rank - 1 })) & 1 == 1;
    let split = (1u64 << q) - 1;
    Ok(if code <= split {
        if a_top == primary_top {
            bit(code)
        } else {
            true
        }
    } else if a_top == primary_top {
        false
    } else {
        bit(code - split)
    })
}

/// `M'_1 .. M'_{r+1}` over positions `1..=n`; `removed[l]` lists the 1-based
/// positions taken by removal `l + 1`.
pub fn build_membership(n: usize, removed: &[Vec<usize>]) -> Vec<CompressedBitSequence> {
    let mut alive = BitBuf::from_bools(std::iter::repeat_n(true, n));
    let mut out = Vec::with_capacity(removed.len() + 1);
    out.push(CompressedBitSequence::build(&alive));
    for set in removed {
        let mut next = BitBuf::with_capacity(n);
        for (i, b) in alive.iter().enumerate() {
            next.push(b && !set.contains(&(i + 1)));
        }
        alive = next;
        out.push(CompressedBitSequence::build(&alive));
    }
    out
}

struct Group {
    first_level: usize,
    elems: Vec<usize>,
}

fn cross_edges(lower: &[usize], upper: &[usize], rel: &BitMatrix) -> usize {
    let n = rel.n();
    let mut mask = vec![0u64; n.div_ceil(64)];
    for &u in upper {
        mask[u / 64] |= 1 << (u % 64);
    }
    lower
        .iter()
        .map(|&l| rel.row(l).iter().zip(&mask).map(|(a, b)| (a & b).count_ones() as usize).sum::<usize>())
        .sum()
}

/// Output of the compression together with its query tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressOutput {
    n: usize,
    f: PackedInts,
    a_offset: PackedInts,
    a_delta: PackedInts,
    a_len: PackedInts,
    a_upper_len: PackedInts,
    c_id: PackedInts,
    c_rank: PackedInts,
    c_top: PackedInts,
    c_ds: PackedInts,
    c_dt: PackedInts,
    h_lower_first: PackedInts,
    h_upper_level: PackedInts,
    h_q: PackedInts,
    h_lower_size: PackedInts,
    h_upper_size: PackedInts,
    h_offset: PackedInts,
    h_y_len: PackedInts,
    payload: BitBuf,
    sparse: CompressedBitSequence,
    membership: Vec<CompressedBitSequence>,
}

/// Itemized size of a compression output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressSizeReport {
    pub n: usize,
    pub removals: usize,
    pub w_bits: u64,
    pub y_bits: u64,
    pub sparse_raw_bits: u64,
    pub sparse_bits: u64,
    pub membership_bits: u64,
    pub aux_bits: u64,
    pub total_bits: u64,
    /// `n^2 / 4`.
    pub quarter: f64,
    /// `n (n - 1) / 2`.
    pub triangular: f64,
}

/// Runs the compression on a flat decomposition `d` of the relation `rel`.
///
/// `d` may have at most `max(2, lg n)` levels.
pub fn compress_flat(d: &AntichainDecomposition, rel: &BitMatrix, cfg: &CompressConfig) -> Result<CompressOutput> {
    let n = d.n();
    let m = d.height();
    let limit = (lg(n as u64) as usize).max(2);
    if m > limit {
        return Err(Error::Precondition(format!("{m} levels exceed the flat limit {limit}")));
    }
    let max_q = cfg.max_q.clamp(1, MAX_Q);

    let mut f = vec![0u64; m + 1];
    for h in 0..m {
        f[h + 1] = f[h] + d.level(h).len() as u64;
    }
    let pos = |e: usize| f[d.height_of(e)] as usize + d.rank_of(e) + 1;

    let mut groups: Vec<Group> =
        (0..m).map(|h| Group { first_level: h, elems: d.level(h).to_vec() }).collect();
    let mut n_hat = n;

    let mut a_offset = vec![0u64; m];
    let mut a_delta = vec![0u64; m];
    let mut a_len = vec![0u64; m];
    let mut a_upper = vec![0u64; m];
    let mut c_id = vec![0u64; n];
    let mut c_rank = vec![0u64; n];
    let mut c_top = vec![0u64; n];
    let mut c_ds = vec![0u64; n];
    let mut c_dt = vec![0u64; n];
    let mut headers: Vec<RemovalHeader> = Vec::new();
    let mut removed: Vec<Vec<usize>> = Vec::new();
    let mut payload = BitBuf::new();
    let mut parts: Vec<BitBuf> = Vec::new();
    let mut sparse_next = 1usize;

    while groups.len() > 1 {
        let lgn = (lg(n_hat as u64) as f64).max(1.0);
        let threshold = (n_hat as f64 / lgn).powi(2);
        let dense = (0..groups.len() - 1).find_map(|i| {
            let size = groups[i].elems.len() + groups[i + 1].elems.len();
            if size < cfg.biclique.c_min {
                return None;
            }
            let e = cross_edges(&groups[i].elems, &groups[i + 1].elems, rel);
            (e > 0 && e as f64 >= threshold).then_some((i, e))
        });

        if let Some((i, edges)) = dense {
            let ell = removed.len() + 1;
            let lower = &groups[i].elems;
            let upper = &groups[i + 1].elems;
            let g = BipartiteGraph::from_relation(lower, upper, rel);
            let qt = target_q(g.vertex_count(), edges, cfg.biclique.c_q).min(max_q);
            let cert = find_balanced_biclique(&g, qt, &cfg.biclique)?;
            if !verify_biclique(&cert, &g) {
                return Err(Error::Precondition("biclique search returned an invalid certificate".into()));
            }
            let mut left = cert.left.clone();
            let mut right = cert.right.clone();
            left.sort_by_key(|&e| pos(e));
            right.sort_by_key(|&e| pos(e));
            let q = left.len().min(right.len()).min(max_q);
            left.truncate(q);
            right.truncate(q);
            log::trace!("compress: removal {ell} on pair {i} q={q} (target {qt}) n_hat={n_hat}");

            let pair_len = lower.len() + upper.len();
            for (k, &e) in lower.iter().chain(upper.iter()).enumerate() {
                let in_d = left.iter().position(|&x| x == e).map(|r| (r + 1, false)).or_else(|| {
                    right.iter().position(|&x| x == e).map(|r| (q + r + 1, true))
                });
                if let Some((rank, top)) = in_d {
                    c_id[e] = ell as u64;
                    c_rank[e] = rank as u64;
                    c_top[e] = top as u64;
                    c_ds[e] = k as u64;
                    c_dt[e] = (pair_len - 1 - k) as u64;
                }
            }

            let offset = payload.len();
            for &b in &left {
                for &u in upper {
                    payload.push(rel.get(b, u));
                }
            }
            for &a in &right {
                for &l in lower {
                    payload.push(rel.get(l, a));
                }
            }
            let mut y_len = 0;
            for (gi, grp) in groups.iter().enumerate() {
                if gi == i || gi == i + 1 {
                    continue;
                }
                for &v in &grp.elems {
                    payload.push_bits(code_for(v, &left, &right, gi > i + 1, rel)?, q as u32 + 1);
                    y_len += 1;
                }
            }
            headers.push(RemovalHeader {
                lower_first_level: groups[i].first_level,
                upper_level: groups[i + 1].first_level,
                q,
                lower_size: lower.len(),
                upper_size: upper.len(),
                offset,
                y_len,
            });

            let mut set: Vec<usize> = left.iter().chain(&right).map(|&e| pos(e)).collect();
            set.sort_unstable();
            removed.push(set);
            groups[i].elems.retain(|e| !left.contains(e));
            groups[i + 1].elems.retain(|e| !right.contains(e));
            n_hat -= 2 * q;
        } else {
            let upper = groups.remove(1);
            let lower = &mut groups[0];
            let bits = merge_bits(&lower.elems, &upper.elems, rel);
            let j = upper.first_level;
            a_offset[j] = sparse_next as u64;
            a_delta[j] = removed.len() as u64 + 1;
            a_len[j] = lower.elems.len() as u64;
            a_upper[j] = upper.elems.len() as u64;
            sparse_next += bits.len();
            parts.push(bits);
            lower.elems.extend(upper.elems);
        }
    }
    log::debug!("compress: n={n} levels={m} removals={} merges={}", removed.len(), parts.len());

    let (sparse, _) = CompressedBitSequence::concat_build(&parts);
    let col = |f: fn(&RemovalHeader) -> usize| PackedInts::from_slice(&headers.iter().map(|h| f(h) as u64).collect::<Vec<_>>());
    Ok(CompressOutput {
        n,
        f: PackedInts::from_slice(&f),
        a_offset: PackedInts::from_slice(&a_offset),
        a_delta: PackedInts::from_slice(&a_delta),
        a_len: PackedInts::from_slice(&a_len),
        a_upper_len: PackedInts::from_slice(&a_upper),
        c_id: PackedInts::from_slice(&c_id),
        c_rank: PackedInts::from_slice(&c_rank),
        c_top: PackedInts::from_slice(&c_top),
        c_ds: PackedInts::from_slice(&c_ds),
        c_dt: PackedInts::from_slice(&c_dt),
        h_lower_first: col(|h| h.lower_first_level),
        h_upper_level: col(|h| h.upper_level),
        h_q: col(|h| h.q),
        h_lower_size: col(|h| h.lower_size),
        h_upper_size: col(|h| h.upper_size),
        h_offset: col(|h| h.offset),
        h_y_len: col(|h| h.y_len),
        payload,
        sparse,
        membership: build_membership(n, &removed),
    })
}

impl CompressOutput {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of flat levels.
    pub fn levels(&self) -> usize {
        self.a_delta.len()
    }

    pub fn level_size(&self, h: usize) -> usize {
        (self.f.get(h + 1) - self.f.get(h)) as usize
    }

    /// Number of biclique removals `r`.
    pub fn removal_count(&self) -> usize {
        self.h_q.len()
    }

    pub fn membership(&self) -> &[CompressedBitSequence] {
        &self.membership
    }

    pub fn sparse_bits(&self) -> &CompressedBitSequence {
        &self.sparse
    }

    pub fn element_record(&self, a: usize) -> Result<ElementRecord> {
        if a >= self.n {
            return Err(Error::Domain(a));
        }
        let id = self.c_id.get(a) as usize;
        Ok(ElementRecord {
            id: (id != 0).then_some(id),
            rank: self.c_rank.get(a) as usize,
            top: self.c_top.get(a) == 1,
            ds: self.c_ds.get(a) as usize,
            dt: self.c_dt.get(a) as usize,
        })
    }

    pub fn merge_record(&self, level: usize) -> Option<FlatMergeRecord> {
        let delta = self.a_delta.get(level) as usize;
        (delta != 0).then(|| FlatMergeRecord {
            seq_offset: self.a_offset.get(level) as usize,
            delta,
            len: self.a_len.get(level) as usize,
            upper_len: self.a_upper_len.get(level) as usize,
        })
    }

    pub fn header(&self, ell: usize) -> Result<RemovalHeader> {
        if ell == 0 || ell > self.removal_count() {
            return Err(corrupt(format!("removal {ell} does not exist")));
        }
        let k = ell - 1;
        Ok(RemovalHeader {
            lower_first_level: self.h_lower_first.get(k) as usize,
            upper_level: self.h_upper_level.get(k) as usize,
            q: self.h_q.get(k) as usize,
            lower_size: self.h_lower_size.get(k) as usize,
            upper_size: self.h_upper_size.get(k) as usize,
            offset: self.h_offset.get(k) as usize,
            y_len: self.h_y_len.get(k) as usize,
        })
    }

    /// Expands removal `ell`; `d` must be the decomposition the output was built from.
    pub fn removal(&self, ell: usize, d: &AntichainDecomposition) -> Result<DenseRemoval> {
        let header = self.header(ell)?;
        let order: Vec<usize> = d.levels().iter().flatten().copied().collect();
        let alive = self.membership[ell - 1].to_bits();
        let f = |h: usize| self.f.get(h) as usize;
        let lo_range = f(header.lower_first_level)..f(header.upper_level);
        let up_range = f(header.upper_level)..f(header.upper_level + 1);
        let (mut lower, mut upper, mut h) = (Vec::new(), Vec::new(), Vec::new());
        let mut h_below = 0;
        for (p, &e) in order.iter().enumerate() {
            if !alive.get(p) {
                continue;
            }
            if lo_range.contains(&p) {
                lower.push(e);
            } else if up_range.contains(&p) {
                upper.push(e);
            } else {
                if p < lo_range.start {
                    h_below += 1;
                }
                h.push(e);
            }
        }
        let mut members: Vec<(usize, usize)> =
            (0..self.n).filter(|&e| self.c_id.get(e) as usize == ell).map(|e| (self.c_rank.get(e) as usize, e)).collect();
        members.sort_unstable();
        let q = header.q;
        let left = members.iter().take(q).map(|&(_, e)| e).collect();
        let right = members.iter().skip(q).map(|&(_, e)| e).collect();
        let slice = |start: usize, len: usize| BitBuf::from_bools((start..start + len).map(|i| self.payload.get(i)));
        let w_minus = (0..q).map(|k| slice(header.offset + k * header.upper_size, header.upper_size)).collect();
        let w_plus = (0..q).map(|k| slice(header.w_plus_start() + k * header.lower_size, header.lower_size)).collect();
        let y = (0..header.y_len)
            .map(|k| self.payload.get_bits(header.y_start() + k * (q + 1), q as u32 + 1))
            .collect();
        Ok(DenseRemoval { ell, header, left, right, lower, upper, h, h_below, w_minus, w_plus, y })
    }

    #[inline]
    fn m_rank(&self, ell: usize, x: usize, ops: &mut u32) -> Result<usize> {
        *ops += 1;
        self.membership.get(ell - 1).ok_or_else(|| corrupt("membership sequence missing"))?.rank(x)
    }

    fn merge_bit(&self, level: usize, p_lo: usize, p_hi: usize, ops: &mut u32) -> Result<bool> {
        let delta = self.a_delta.get(level) as usize;
        if delta == 0 {
            return Err(corrupt(format!("level {level} has no merge record")));
        }
        let len = self.a_len.get(level) as usize;
        let upper_len = self.a_upper_len.get(level) as usize;
        let r_lo = self.m_rank(delta, p_lo, ops)?;
        let r_hi = self.m_rank(delta, p_hi, ops)?;
        if r_lo == 0 || r_lo > len || r_hi <= len || r_hi - len > upper_len {
            return Err(corrupt("merge coordinates outside the merge record"));
        }
        *ops += 1;
        self.sparse.access(self.a_offset.get(level) as usize + (r_lo - 1) * upper_len + (r_hi - len - 1))
    }

    fn y_edge(&self, h: &RemovalHeader, idx: usize, member: &ElementRecord, v_above: bool, ops: &mut u32) -> Result<bool> {
        if idx >= h.y_len {
            return Err(corrupt("connectivity index past the code array"));
        }
        *ops += 1;
        let code = self.payload.get_bits(h.y_start() + idx * (h.q + 1), h.q as u32 + 1);
        decode_edge(code, h.q, member.rank, member.top, v_above)
    }

    fn payload_bit(&self, i: usize, ops: &mut u32) -> bool {
        *ops += 1;
        self.payload.get(i)
    }

    /// Does `a` strictly precede `b` in the flat poset?
    pub fn query_flat(&self, a: FlatElement, b: FlatElement) -> Result<bool> {
        let mut ops = 0;
        self.query_counted(a, b, &mut ops)
    }

    /// `query_flat` that adds its table reads and sequence probes to `ops`.
    pub fn query_counted(&self, a: FlatElement, b: FlatElement, ops: &mut u32) -> Result<bool> {
        let m = self.levels();
        for e in [a, b] {
            if e.label >= self.n || e.level >= m {
                return Err(Error::Domain(e.label));
            }
        }
        if a.label == b.label {
            return Err(Error::Precondition("flat query needs two distinct elements".into()));
        }
        if a.level >= b.level {
            return Ok(false);
        }
        let (lo, hi) = (a, b);
        *ops += 2;
        let (cl, ch) = (self.record_unchecked(lo.label), self.record_unchecked(hi.label));
        *ops += 2;
        let (f_lo, f_hi) = (self.f.get(lo.level) as usize, self.f.get(hi.level) as usize);
        for (e, f_e) in [(lo, f_lo), (hi, f_hi)] {
            if e.rank >= self.f.get(e.level + 1) as usize - f_e {
                return Err(Error::Domain(e.label));
            }
        }
        let (p_lo, p_hi) = (f_lo + lo.rank + 1, f_hi + hi.rank + 1);
        let j = hi.level;
        *ops += 1;
        let delta_j = self.a_delta.get(j) as usize;
        let merged_by = |ell: usize| delta_j != 0 && delta_j <= ell;

        match (cl.id, ch.id) {
            (None, None) => self.merge_bit(j, p_lo, p_hi, ops),
            (Some(x), Some(y)) if x == y => {
                if cl.top != ch.top {
                    Ok(true)
                } else {
                    self.merge_bit(j, p_lo, p_hi, ops)
                }
            }
            (Some(ell), y) if y.is_none_or(|y| ell < y) => {
                if merged_by(ell) {
                    return self.merge_bit(j, p_lo, p_hi, ops);
                }
                *ops += 1;
                let h = self.header(ell)?;
                let r_hi = self.m_rank(ell, p_hi, ops)?;
                if !cl.top && j == h.upper_level {
                    let base = self.m_rank(ell, f_hi, ops)?;
                    let idx = r_hi.checked_sub(base + 1).filter(|&i| i < h.upper_size);
                    let idx = idx.ok_or_else(|| corrupt("upper index outside the removal pair"))?;
                    Ok(self.payload_bit(h.offset + (cl.rank - 1) * h.upper_size + idx, ops))
                } else {
                    let idx = r_hi.checked_sub(cl.ds + cl.dt + 2).ok_or_else(|| corrupt("negative code index"))?;
                    self.y_edge(&h, idx, &cl, true, ops)
                }
            }
            (_, Some(ell)) => {
                if merged_by(ell) {
                    return self.merge_bit(j, p_lo, p_hi, ops);
                }
                *ops += 1;
                let h = self.header(ell)?;
                let r_lo = self.m_rank(ell, p_lo, ops)?;
                if ch.top && lo.level >= h.lower_first_level {
                    *ops += 1;
                    let f_first = self.f.get(h.lower_first_level) as usize;
                    let base = self.m_rank(ell, f_first, ops)?;
                    let idx = r_lo.checked_sub(base + 1).filter(|&i| i < h.lower_size);
                    let idx = idx.ok_or_else(|| corrupt("lower index outside the removal pair"))?;
                    let w = ch.rank.checked_sub(h.q + 1).ok_or_else(|| corrupt("upper member with lower rank"))?;
                    Ok(self.payload_bit(h.w_plus_start() + w * h.lower_size + idx, ops))
                } else {
                    let idx = r_lo.checked_sub(1).ok_or_else(|| corrupt("negative code index"))?;
                    self.y_edge(&h, idx, &ch, false, ops)
                }
            }
            (Some(_), None) => unreachable!("covered by the lower-removed arm"),
        }
    }

    fn record_unchecked(&self, a: usize) -> ElementRecord {
        let id = self.c_id.get(a) as usize;
        ElementRecord {
            id: (id != 0).then_some(id),
            rank: self.c_rank.get(a) as usize,
            top: self.c_top.get(a) == 1,
            ds: self.c_ds.get(a) as usize,
            dt: self.c_dt.get(a) as usize,
        }
    }

    fn tables(&self) -> [&PackedInts; 17] {
        [
            &self.f,
            &self.a_offset,
            &self.a_delta,
            &self.a_len,
            &self.a_upper_len,
            &self.c_id,
            &self.c_rank,
            &self.c_top,
            &self.c_ds,
            &self.c_dt,
            &self.h_lower_first,
            &self.h_upper_level,
            &self.h_q,
            &self.h_lower_size,
            &self.h_upper_size,
            &self.h_offset,
            &self.h_y_len,
        ]
    }

    pub fn size_report(&self) -> CompressSizeReport {
        let mut w_bits = 0u64;
        let mut y_bits = 0u64;
        for ell in 1..=self.removal_count() {
            let h = self.header(ell).expect("header exists");
            w_bits += (h.q * (h.lower_size + h.upper_size)) as u64;
            y_bits += (h.y_len * (h.q + 1)) as u64;
        }
        let membership_bits = self.membership.iter().map(|s| s.size_bits()).sum();
        let aux_bits = self.tables().iter().map(|t| t.size_bits()).sum();
        let sparse_bits = self.sparse.size_bits();
        let n = self.n as f64;
        CompressSizeReport {
            n: self.n,
            removals: self.removal_count(),
            w_bits,
            y_bits,
            sparse_raw_bits: self.sparse.len() as u64,
            sparse_bits,
            membership_bits,
            aux_bits,
            total_bits: w_bits + y_bits + sparse_bits + membership_bits + aux_bits,
            quarter: n * n / 4.0,
            triangular: n * (n - 1.0).max(0.0) / 2.0,
        }
    }

    pub fn size_bits(&self) -> u64 {
        self.size_report().total_bits
    }

    pub fn write_to(&self, w: &mut ByteWriter) {
        w.put_usize(self.n);
        for t in self.tables() {
            t.write_to(w);
        }
        self.payload.write_to(w);
        self.sparse.write_to(w);
        w.put_usize(self.membership.len());
        for s in &self.membership {
            s.write_to(w);
        }
    }

    pub fn read_from(r: &mut ByteReader<'_>) -> Result<Self> {
        let n = r.get_usize()?;
        let mut t = Vec::with_capacity(17);
        for _ in 0..17 {
            t.push(PackedInts::read_from(r)?);
        }
        let payload = BitBuf::read_from(r)?;
        let sparse = CompressedBitSequence::read_from(r)?;
        let count = r.get_usize()?;
        if count > n + 1 {
            return Err(corrupt("too many membership sequences"));
        }
        let mut membership = Vec::with_capacity(count);
        for _ in 0..count {
            membership.push(CompressedBitSequence::read_from(r)?);
        }
        let mut it = t.into_iter();
        let mut next = || it.next().expect("seventeen tables");
        let out = Self {
            n,
            f: next(),
            a_offset: next(),
            a_delta: next(),
            a_len: next(),
            a_upper_len: next(),
            c_id: next(),
            c_rank: next(),
            c_top: next(),
            c_ds: next(),
            c_dt: next(),
            h_lower_first: next(),
            h_upper_level: next(),
            h_q: next(),
            h_lower_size: next(),
            h_upper_size: next(),
            h_offset: next(),
            h_y_len: next(),
            payload,
            sparse,
            membership,
        };
        out.validate()?;
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        let m = self.a_delta.len();
        let r = self.h_q.len();
        if self.f.len() != m + 1 || (m > 0 && self.f.get(0) != 0) || self.f.get(m) as usize != n {
            return Err(corrupt("level offsets do not cover the elements"));
        }
        if (1..=m).any(|h| self.f.get(h) < self.f.get(h - 1)) {
            return Err(corrupt("level offsets decrease"));
        }
        if [&self.a_offset, &self.a_len, &self.a_upper_len].iter().any(|t| t.len() != m) {
            return Err(corrupt("merge table lengths disagree"));
        }
        if [&self.c_id, &self.c_rank, &self.c_top, &self.c_ds, &self.c_dt].iter().any(|t| t.len() != n) {
            return Err(corrupt("element table lengths disagree"));
        }
        let header_tables =
            [&self.h_lower_first, &self.h_upper_level, &self.h_lower_size, &self.h_upper_size, &self.h_offset, &self.h_y_len];
        if header_tables.iter().any(|t| t.len() != r) {
            return Err(corrupt("removal table lengths disagree"));
        }
        if self.membership.len() != r + 1 || self.membership.iter().any(|s| s.len() != n) {
            return Err(corrupt("membership sequences do not match the removals"));
        }
        for h in 0..m {
            let delta = self.a_delta.get(h) as usize;
            if delta == 0 {
                continue;
            }
            let off = self.a_offset.get(h) as usize;
            let end = (self.a_len.get(h) as usize)
                .checked_mul(self.a_upper_len.get(h) as usize)
                .and_then(|x| x.checked_add(off.saturating_sub(1)));
            if delta > r + 1 || off == 0 || end.is_none_or(|e| e > self.sparse.len()) {
                return Err(corrupt(format!("merge record of level {h} is out of range")));
            }
        }
        for ell in 1..=r {
            let h = self.header(ell)?;
            if h.q == 0 || h.q > MAX_Q || h.lower_first_level >= h.upper_level || h.upper_level >= m {
                return Err(corrupt(format!("removal {ell} header is malformed")));
            }
            let end = h
                .q
                .checked_mul(h.lower_size + h.upper_size)
                .and_then(|w| h.y_len.checked_mul(h.q + 1).and_then(|y| y.checked_add(w)))
                .and_then(|x| x.checked_add(h.offset));
            if end.is_none_or(|e| e > self.payload.len()) || h.end() > self.payload.len() {
                return Err(corrupt(format!("removal {ell} points past the payload")));
            }
        }
        for a in 0..n {
            let id = self.c_id.get(a) as usize;
            if id == 0 {
                continue;
            }
            if id > r {
                return Err(corrupt(format!("element {a} names removal {id} of {r}")));
            }
            let q = self.h_q.get(id - 1) as usize;
            let rank = self.c_rank.get(a) as usize;
            if rank == 0 || rank > 2 * q || (self.c_top.get(a) == 1) != (rank > q) {
                return Err(corrupt(format!("element {a} has an inconsistent biclique rank")));
            }
        }
        Ok(())
    }
}

//! Entropy-compressed bit sequences with constant-time `access` and `rank`.
//!
//! The sequence is cut into blocks of `b = clamp(lg n, 1, 32)` bits. Each
//! block is stored as its popcount class (fixed width) plus its offset within
//! the class under the combinatorial number system (variable width,
//! `ceil(lg C(b, class))` bits). Every `lg n` blocks a superblock sample
//! records the absolute rank and the bit position in the offset stream, so a
//! query touches one sample, at most `lg n` class fields and one block decode.
//!
//! Positions are 1-based: `access(i)` reads bit `i` for `1 <= i <= len`, and
//! `rank(i)` counts the ones in bits `1..=i` (so `rank(0) == 0`).

use crate::bits::{lg, width_for, BitBuf, PackedInts};
use crate::codec::{ByteReader, ByteWriter};
use crate::error::{corrupt, Error, Result};

const MAX_BLOCK: usize = 32;

const fn binomial_table() -> [[u64; MAX_BLOCK + 1]; MAX_BLOCK + 1] {
    let mut t = [[0u64; MAX_BLOCK + 1]; MAX_BLOCK + 1];
    let mut n = 0;
    while n <= MAX_BLOCK {
        t[n][0] = 1;
        let mut k = 1;
        while k <= n {
            t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0 };
            k += 1;
        }
        n += 1;
    }
    t
}

static BINOM: [[u64; MAX_BLOCK + 1]; MAX_BLOCK + 1] = binomial_table();

#[inline]
fn binom(n: usize, k: usize) -> u64 {
    if k > n {
        0
    } else {
        BINOM[n][k]
    }
}

fn encode_block(v: u64) -> (u32, u64) {
    let class = v.count_ones();
    let mut offset = 0;
    let mut rest = v;
    let mut j = 1;
    while rest != 0 {
        let p = rest.trailing_zeros() as usize;
        offset += binom(p, j);
        j += 1;
        rest &= rest - 1;
    }
    (class, offset)
}

fn decode_block(block: usize, class: usize, mut offset: u64) -> u64 {
    let mut v = 0u64;
    let mut p = block;
    for j in (1..=class).rev() {
        p -= 1;
        while binom(p, j) > offset {
            p -= 1;
        }
        v |= 1 << p;
        offset -= binom(p, j);
    }
    v
}

/// Constants of the space budget `overhead(n) = c1 * n * lglg n / lg n + c2 * lg n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeBudget {
    pub c1: f64,
    pub c2: f64,
}

impl Default for SizeBudget {
    fn default() -> Self {
        Self { c1: 2.0, c2: 64.0 }
    }
}

impl SizeBudget {
    /// Allowed redundancy above the zeroth-order entropy for an `n`-bit input.
    pub fn overhead(&self, n: usize) -> f64 {
        let lgn = lg(n as u64).max(1) as f64;
        let lglgn = lg(lg(n as u64).max(1) as u64) as f64;
        self.c1 * n as f64 * lglgn / lgn + self.c2 * lgn
    }

    /// Entropy term plus overhead: the size no build of this shape may exceed.
    pub fn bound(&self, n: usize, ones: usize) -> f64 {
        log2_binomial(n, ones).ceil() + self.overhead(n)
    }
}

/// `log2 C(n, k)` evaluated in floating point.
pub fn log2_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).log2()).sum()
}

/// Compressed, immutable bit string supporting `access` and `rank`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedBitSequence {
    len: usize,
    ones: usize,
    block: usize,
    sb_blocks: usize,
    classes: PackedInts,
    offsets: BitBuf,
    sample_rank: PackedInts,
    sample_pos: PackedInts,
}

/// Offset width of each class for a given block size.
fn offset_widths(block: usize) -> [u32; MAX_BLOCK + 1] {
    let mut w = [0u32; MAX_BLOCK + 1];
    for (k, slot) in w.iter_mut().enumerate().take(block + 1) {
        *slot = lg(binom(block, k));
    }
    w
}

fn geometry(len: usize) -> (usize, usize) {
    let lgn = lg(len as u64) as usize;
    let block = lgn.clamp(1, MAX_BLOCK);
    (block, lgn.max(1))
}

impl CompressedBitSequence {
    pub fn from_bools(bits: &[bool]) -> Self {
        Self::build(&BitBuf::from_bools(bits.iter().copied()))
    }

    /// Compresses a plain bit buffer.
    pub fn build(bits: &BitBuf) -> Self {
        let len = bits.len();
        let (block, sb_blocks) = geometry(len);
        let widths = offset_widths(block);
        let n_blocks = len.div_ceil(block);

        let mut classes = Vec::with_capacity(n_blocks);
        let mut offsets = BitBuf::new();
        let mut s_rank = Vec::with_capacity(n_blocks / sb_blocks + 1);
        let mut s_pos = Vec::with_capacity(n_blocks / sb_blocks + 1);
        let mut ones = 0usize;
        for k in 0..n_blocks {
            if k % sb_blocks == 0 {
                s_rank.push(ones as u64);
                s_pos.push(offsets.len() as u64);
            }
            let start = k * block;
            let w = block.min(len - start) as u32;
            let v = bits.get_bits(start, w);
            let (class, offset) = encode_block(v);
            classes.push(class as u64);
            offsets.push_bits(offset, widths[class as usize]);
            ones += class as usize;
        }
        if n_blocks % sb_blocks == 0 {
            s_rank.push(ones as u64);
            s_pos.push(offsets.len() as u64);
        }

        Self {
            len,
            ones,
            block,
            sb_blocks,
            classes: PackedInts::with_width(&classes, width_for(block as u64)),
            offsets,
            sample_rank: PackedInts::from_slice(&s_rank),
            sample_pos: PackedInts::from_slice(&s_pos),
        }
    }

    /// Compresses the concatenation of `parts` as one sequence.
    ///
    /// Returns the 1-based start position of every part in the result.
    pub fn concat_build(parts: &[BitBuf]) -> (Self, Vec<usize>) {
        let mut all = BitBuf::with_capacity(parts.iter().map(BitBuf::len).sum());
        let mut starts = Vec::with_capacity(parts.len());
        for p in parts {
            starts.push(all.len() + 1);
            all.extend_from(p);
        }
        (Self::build(&all), starts)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn ones(&self) -> usize {
        self.ones
    }

    /// Locates block `k`: rank before it and its position in the offset stream.
    #[inline]
    fn seek(&self, k: usize) -> (usize, usize) {
        let sb = k / self.sb_blocks;
        let mut rank = self.sample_rank.get(sb) as usize;
        let mut pos = self.sample_pos.get(sb) as usize;
        let widths = offset_widths_cached(self.block);
        for j in sb * self.sb_blocks..k {
            let c = self.classes.get(j) as usize;
            rank += c;
            pos += widths[c] as usize;
        }
        (rank, pos)
    }

    #[inline]
    fn block_bits(&self, k: usize, pos: usize) -> u64 {
        let class = self.classes.get(k) as usize;
        let w = offset_widths_cached(self.block)[class];
        decode_block(self.block, class, self.offsets.get_bits(pos, w))
    }

    /// Bit at 1-based position `i`.
    pub fn access(&self, i: usize) -> Result<bool> {
        if i == 0 || i > self.len {
            return Err(Error::Range { index: i, lo: 1, hi: self.len });
        }
        let idx = i - 1;
        let k = idx / self.block;
        let (_, pos) = self.seek(k);
        Ok((self.block_bits(k, pos) >> (idx % self.block)) & 1 == 1)
    }

    /// Number of ones among positions `1..=i`.
    pub fn rank(&self, i: usize) -> Result<usize> {
        if i > self.len {
            return Err(Error::Range { index: i, lo: 0, hi: self.len });
        }
        let k = i / self.block;
        let rem = i % self.block;
        let (rank, pos) = self.seek(k);
        if rem == 0 {
            return Ok(rank);
        }
        let v = self.block_bits(k, pos);
        Ok(rank + (v & ((1u64 << rem) - 1)).count_ones() as usize)
    }

    /// Ones among positions `x1..=x2`.
    pub fn rank_range(&self, x1: usize, x2: usize) -> Result<usize> {
        if x1 == 0 || x1 > x2 || x2 > self.len {
            return Err(Error::Range { index: if x1 == 0 || x1 > x2 { x1 } else { x2 }, lo: 1, hi: self.len });
        }
        Ok(self.rank(x2)? - self.rank(x1 - 1)?)
    }

    /// Decodes the whole sequence.
    pub fn to_bits(&self) -> BitBuf {
        let mut out = BitBuf::with_capacity(self.len);
        let widths = offset_widths_cached(self.block);
        let mut pos = 0usize;
        for k in 0..self.classes.len() {
            let c = self.classes.get(k) as usize;
            let v = decode_block(self.block, c, self.offsets.get_bits(pos, widths[c]));
            pos += widths[c] as usize;
            out.push_bits(v, self.block.min(self.len - k * self.block) as u32);
        }
        out
    }

    /// Encoded size: class fields, offset stream and samples.
    pub fn size_bits(&self) -> u64 {
        self.classes.size_bits()
            + self.offsets.len() as u64
            + self.sample_rank.size_bits()
            + self.sample_pos.size_bits()
    }

    pub fn write_to(&self, w: &mut ByteWriter) {
        w.put_usize(self.len);
        w.put_usize(self.ones);
        let mut payload = ByteWriter::new();
        self.classes.write_to(&mut payload);
        self.offsets.write_to(&mut payload);
        let payload = payload.into_inner();
        w.put_usize(payload.len());
        w.put_bytes(&payload);
        self.sample_rank.write_to(w);
        self.sample_pos.write_to(w);
    }

    pub fn read_from(r: &mut ByteReader<'_>) -> Result<Self> {
        let len = r.get_usize()?;
        let ones = r.get_usize()?;
        let payload_len = r.get_usize()?;
        let payload = r.take(payload_len)?;
        let mut pr = ByteReader::new(payload);
        let classes = PackedInts::read_from(&mut pr)?;
        let offsets = BitBuf::read_from(&mut pr)?;
        pr.finish()?;
        let sample_rank = PackedInts::read_from(r)?;
        let sample_pos = PackedInts::read_from(r)?;

        let (block, sb_blocks) = geometry(len);
        let n_blocks = len.div_ceil(block);
        let n_samples = n_blocks / sb_blocks + 1;
        if classes.len() != n_blocks || sample_rank.len() != n_samples || sample_pos.len() != n_samples {
            return Err(corrupt("bit sequence tables do not match its length"));
        }
        let widths = offset_widths(block);
        let mut count = 0usize;
        let mut pos = 0usize;
        for k in 0..n_blocks {
            if k % sb_blocks == 0
                && (sample_rank.get(k / sb_blocks) as usize != count
                    || sample_pos.get(k / sb_blocks) as usize != pos)
            {
                return Err(corrupt("bit sequence sample mismatch"));
            }
            let c = classes.get(k) as usize;
            let real = block.min(len - k * block);
            if c > real {
                return Err(corrupt("block class exceeds block width"));
            }
            let w = widths[c] as usize;
            if pos + w > offsets.len() {
                return Err(corrupt("offset stream truncated"));
            }
            if w > 0 && offsets.get_bits(pos, w as u32) >= binom(block, c) {
                return Err(corrupt("block offset outside its class"));
            }
            count += c;
            pos += w;
        }
        if count != ones || pos != offsets.len() {
            return Err(corrupt("bit sequence population mismatch"));
        }
        let seq = Self { len, ones, block, sb_blocks, classes, offsets, sample_rank, sample_pos };
        // Padding bits in the final block must decode to zero.
        if len % block != 0 && n_blocks > 0 {
            let (_, p) = seq.seek(n_blocks - 1);
            if seq.block_bits(n_blocks - 1, p) >> (len % block) != 0 {
                return Err(corrupt("set bits past the end of the sequence"));
            }
        }
        Ok(seq)
    }
}

fn offset_widths_cached(block: usize) -> &'static [u32; MAX_BLOCK + 1] {
    static TABLES: std::sync::OnceLock<Vec<[u32; MAX_BLOCK + 1]>> = std::sync::OnceLock::new();
    &TABLES.get_or_init(|| (0..=MAX_BLOCK).map(offset_widths).collect())[block]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.bytes().map(|c| c == b'1').collect()
    }

    #[test]
    fn block_codec_is_bijective_for_small_widths() {
        for b in 1..=10usize {
            for v in 0u64..(1 << b) {
                let (c, o) = encode_block(v);
                assert!(o < binom(b, c as usize));
                assert_eq!(decode_block(b, c as usize, o), v);
            }
        }
    }

    #[test]
    fn full_width_block() {
        for v in [0u64, 1, u32::MAX as u64, 0xdead_beef, 1 << 31] {
            let (c, o) = encode_block(v);
            assert_eq!(decode_block(32, c as usize, o), v);
        }
    }

    #[test]
    fn empty_sequence() {
        let s = CompressedBitSequence::from_bools(&[]);
        assert_eq!(s.len(), 0);
        assert_eq!(s.ones(), 0);
        assert_eq!(s.rank(0).unwrap(), 0);
        assert!(s.access(1).is_err());
    }

    #[test]
    fn small_example() {
        let s = CompressedBitSequence::from_bools(&bits("10110"));
        assert_eq!((s.len(), s.ones()), (5, 3));
        assert!(s.access(1).unwrap());
        assert!(!s.access(2).unwrap());
        assert_eq!(s.rank(3).unwrap(), 2);
        assert_eq!(s.rank(0).unwrap(), 0);
        assert_eq!(s.rank_range(1, 5).unwrap(), 3);
        assert_eq!(s.rank_range(2, 2).unwrap(), 0);
    }

    #[test]
    fn range_errors() {
        let s = CompressedBitSequence::from_bools(&bits("10110"));
        assert!(matches!(s.access(0), Err(Error::Range { .. })));
        assert!(matches!(s.access(6), Err(Error::Range { .. })));
        assert!(matches!(s.rank(6), Err(Error::Range { .. })));
        assert!(s.rank_range(3, 2).is_err());
        assert!(s.rank_range(0, 2).is_err());
        assert!(s.rank_range(1, 6).is_err());
    }

    #[test]
    fn concat_small() {
        let parts = [BitBuf::from_bools(bits("101")), BitBuf::from_bools(bits("01"))];
        let (s, starts) = CompressedBitSequence::concat_build(&parts);
        assert_eq!(starts, vec![1, 4]);
        assert_eq!(s.to_bits(), BitBuf::from_bools(bits("10101")));

        let (e, starts) = CompressedBitSequence::concat_build(&[]);
        assert!(e.is_empty());
        assert!(starts.is_empty());
    }

    #[test]
    fn degenerate_all_zero_and_all_one() {
        for len in [1usize, 7, 64, 65, 1000] {
            for fill in [false, true] {
                let v = vec![fill; len];
                let s = CompressedBitSequence::from_bools(&v);
                for i in 1..=len {
                    assert_eq!(s.access(i).unwrap(), fill);
                    assert_eq!(s.rank(i).unwrap(), if fill { i } else { 0 });
                }
            }
        }
    }

    #[test]
    fn serialization_round_trip_and_corruption() {
        let v: Vec<bool> = (0..777).map(|i| (i * 31) % 7 < 2).collect();
        let s = CompressedBitSequence::from_bools(&v);
        let mut w = ByteWriter::new();
        s.write_to(&mut w);
        let bytes = w.into_inner();
        assert_eq!(&bytes[0..8], &777u64.to_le_bytes());
        let back = CompressedBitSequence::read_from(&mut ByteReader::new(&bytes)).unwrap();
        assert_eq!(back, s);

        let mut bad = bytes.clone();
        bad[8] ^= 1;
        assert!(CompressedBitSequence::read_from(&mut ByteReader::new(&bad)).is_err());
        assert!(CompressedBitSequence::read_from(&mut ByteReader::new(&bytes[..bytes.len() - 3])).is_err());
    }
}

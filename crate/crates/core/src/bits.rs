//! Plain bit buffers and fixed-width integer arrays.
//!
//! These are uncompressed building blocks: [`BitBuf`] is an append-only bit
//! string addressed by 0-based bit offsets, [`PackedInts`] stores integers at a
//! fixed bit width. Both back the compressed sequences and the auxiliary tables
//! of the oracle, and both report their footprint in bits.

use crate::codec::{ByteReader, ByteWriter};
use crate::error::{corrupt, Result};

/// `ceil(log2(x))` for `x >= 1`, and 0 for `x <= 1`.
pub fn lg(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Number of bits needed to write any value in `0..=max`.
pub fn width_for(max: u64) -> u32 {
    64 - max.leading_zeros()
}

#[inline]
fn low_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Append-only bit string.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitBuf {
    words: Vec<u64>,
    len: usize,
}

impl BitBuf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self { words: Vec::with_capacity(bits.div_ceil(64)), len: 0 }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut buf = Self::new();
        for b in bits {
            buf.push(b);
        }
        buf
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
    pub fn push(&mut self, bit: bool) {
        let w = self.len / 64;
        if w == self.words.len() {
            self.words.push(0);
        }
        if bit {
            self.words[w] |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    /// Appends the low `width` bits of `value`, least significant first.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        if width == 0 {
            return;
        }
        let value = value & low_mask(width);
        let off = (self.len % 64) as u32;
        if off == 0 {
            self.words.push(value);
        } else {
            let last = self.words.len() - 1;
            self.words[last] |= value << off;
            if off + width > 64 {
                self.words.push(value >> (64 - off));
            }
        }
        self.len += width as usize;
    }

    pub fn extend_from(&mut self, other: &BitBuf) {
        let full = other.len / 64;
        for &w in &other.words[..full] {
            self.push_bits(w, 64);
        }
        let rest = (other.len % 64) as u32;
        if rest > 0 {
            self.push_bits(other.words[full], rest);
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    /// Reads `width <= 64` bits starting at bit `pos`.
    #[inline]
    pub fn get_bits(&self, pos: usize, width: u32) -> u64 {
        if width == 0 {
            return 0;
        }
        debug_assert!(pos + width as usize <= self.len);
        let w = pos / 64;
        let off = (pos % 64) as u32;
        let mut v = self.words[w] >> off;
        if off + width > 64 {
            v |= self.words[w + 1] << (64 - off);
        }
        v & low_mask(width)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn write_to(&self, w: &mut ByteWriter) {
        w.put_usize(self.len);
        for &word in &self.words {
            w.put_u64(word);
        }
    }

    pub fn read_from(r: &mut ByteReader<'_>) -> Result<Self> {
        let len = r.get_usize()?;
        let n_words = len.div_ceil(64);
        if n_words > r.remaining() / 8 {
            return Err(corrupt("bit buffer longer than input"));
        }
        let mut words = Vec::with_capacity(n_words);
        for _ in 0..n_words {
            words.push(r.get_u64()?);
        }
        if len % 64 != 0 && words[n_words - 1] >> (len % 64) != 0 {
            return Err(corrupt("bit buffer has stray bits past its length"));
        }
        Ok(Self { words, len })
    }
}

/// Fixed-width unsigned integer array.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PackedInts {
    bits: BitBuf,
    width: u32,
    len: usize,
}

impl PackedInts {
    /// Packs `values` at the smallest width that holds the maximum.
    pub fn from_slice(values: &[u64]) -> Self {
        let max = values.iter().copied().max().unwrap_or(0);
        Self::with_width(values, width_for(max))
    }

    pub fn with_width(values: &[u64], width: u32) -> Self {
        let mut bits = BitBuf::with_capacity(values.len() * width as usize);
        for &v in values {
            debug_assert!(width == 64 || v >> width == 0);
            bits.push_bits(v, width);
        }
        Self { bits, width, len: values.len() }
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
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        self.bits.get_bits(i * self.width as usize, self.width)
    }

    pub fn try_get(&self, i: usize) -> Result<u64> {
        if i >= self.len {
            return Err(corrupt(format!("table index {i} beyond length {}", self.len)));
        }
        Ok(self.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Payload bits (`len * width`).
    pub fn size_bits(&self) -> u64 {
        self.len as u64 * self.width as u64
    }

    pub fn write_to(&self, w: &mut ByteWriter) {
        w.put_u64(self.width as u64);
        w.put_usize(self.len);
        self.bits.write_to(w);
    }

    pub fn read_from(r: &mut ByteReader<'_>) -> Result<Self> {
        let width = r.get_u64()?;
        if width > 64 {
            return Err(corrupt("packed width above 64"));
        }
        let width = width as u32;
        let len = r.get_usize()?;
        let bits = BitBuf::read_from(r)?;
        if len.checked_mul(width as usize) != Some(bits.len()) {
            return Err(corrupt("packed array length mismatch"));
        }
        Ok(Self { bits, width, len })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lg_is_ceiling_log() {
        assert_eq!(lg(0), 0);
        assert_eq!(lg(1), 0);
        assert_eq!(lg(2), 1);
        assert_eq!(lg(3), 2);
        assert_eq!(lg(4), 2);
        assert_eq!(lg(5), 3);
        assert_eq!(lg(1 << 40), 40);
        assert_eq!(lg((1 << 40) + 1), 41);
    }

    #[test]
    fn push_bits_straddles_words() {
        let mut b = BitBuf::new();
        b.push_bits(0b101, 3);
        b.push_bits(u64::MAX, 64);
        b.push_bits(0x1234, 13);
        assert_eq!(b.len(), 80);
        assert_eq!(b.get_bits(0, 3), 0b101);
        assert_eq!(b.get_bits(3, 64), u64::MAX);
        assert_eq!(b.get_bits(67, 13), 0x1234 & 0x1fff);
    }

    #[test]
    fn packed_round_trip() {
        let vals: Vec<u64> = (0..300).map(|i| (i * 7919) % 1000).collect();
        let p = PackedInts::from_slice(&vals);
        assert_eq!(p.width(), 10);
        assert!(p.iter().eq(vals.iter().copied()));
        let mut w = ByteWriter::new();
        p.write_to(&mut w);
        let bytes = w.into_inner();
        let q = PackedInts::read_from(&mut ByteReader::new(&bytes)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn zero_width_array() {
        let p = PackedInts::from_slice(&[0, 0, 0]);
        assert_eq!(p.width(), 0);
        assert_eq!(p.get(2), 0);
        assert_eq!(p.size_bits(), 0);
    }
}

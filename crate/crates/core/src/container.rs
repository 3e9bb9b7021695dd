//! Versioned binary container for built oracles.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "SPOS"  version:u16  mode:u16  sections:u64  crc32:u64
//! directory: sections x (tag:4 bytes, 4 zero bytes, offset:u64, len:u64)
//! section bodies
//! ```
//!
//! Offsets are absolute. The checksum covers everything after the header,
//! directory included.

use crate::codec::{ByteReader, ByteWriter};
use crate::error::{corrupt, Result};
use crate::oracle::{Mode, Oracle};

pub const MAGIC: [u8; 4] = *b"SPOS";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 2 + 8 + 8;
const ENTRY_LEN: usize = 24;

#[derive(Debug, Default)]
pub(crate) struct SectionWriter {
    sections: Vec<([u8; 4], Vec<u8>)>,
}

impl SectionWriter {
    pub(crate) fn add(&mut self, tag: [u8; 4], f: impl FnOnce(&mut ByteWriter)) {
        let mut w = ByteWriter::new();
        f(&mut w);
        self.sections.push((tag, w.into_inner()));
    }
}

pub(crate) struct SectionReader<'a> {
    sections: Vec<RawSection<'a>>,
}

impl<'a> SectionReader<'a> {
    /// Decodes section `tag` with `f`, which must consume it exactly.
    pub(crate) fn read<T>(&mut self, tag: [u8; 4], f: impl FnOnce(&mut ByteReader<'a>) -> Result<T>) -> Result<T> {
        let entry = self
            .sections
            .iter_mut()
            .find(|s| s.0 == tag && !s.2)
            .ok_or_else(|| corrupt(format!("missing section {}", String::from_utf8_lossy(&tag))))?;
        entry.2 = true;
        let mut r = ByteReader::new(entry.1);
        let value = f(&mut r)?;
        r.finish()?;
        Ok(value)
    }

    fn finish(self) -> Result<()> {
        match self.sections.iter().find(|s| !s.2) {
            Some(s) => Err(corrupt(format!("unexpected section {}", String::from_utf8_lossy(&s.0)))),
            None => Ok(()),
        }
    }
}

/// Directory entry of a stored container.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionInfo {
    pub tag: String,
    pub offset: u64,
    pub len: u64,
}

/// Header and directory of a container.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainerInfo {
    pub version: u16,
    pub mode: Mode,
    pub sections: Vec<SectionInfo>,
}

pub fn save(oracle: &Oracle) -> Vec<u8> {
    let mut sw = SectionWriter::default();
    oracle.write_sections(&mut sw);
    let count = sw.sections.len();
    let mut body = ByteWriter::new();
    let mut offset = (HEADER_LEN + count * ENTRY_LEN) as u64;
    for (tag, bytes) in &sw.sections {
        body.put_bytes(tag);
        body.put_bytes(&[0; 4]);
        body.put_u64(offset);
        body.put_u64(bytes.len() as u64);
        offset += bytes.len() as u64;
    }
    for (_, bytes) in &sw.sections {
        body.put_bytes(bytes);
    }
    let body = body.into_inner();
    let mut w = ByteWriter::new();
    w.put_bytes(&MAGIC);
    w.put_u16(VERSION);
    w.put_u16(oracle.mode().code());
    w.put_u64(count as u64);
    w.put_u64(crc32fast::hash(&body) as u64);
    w.put_bytes(&body);
    w.into_inner()
}

/// Validates the header, checksum and directory.
pub fn inspect(bytes: &[u8]) -> Result<ContainerInfo> {
    Ok(parse(bytes)?.0)
}

/// Section tag, body, and whether a reader consumed it.
type RawSection<'a> = ([u8; 4], &'a [u8], bool);

fn parse(bytes: &[u8]) -> Result<(ContainerInfo, Vec<RawSection<'_>>)> {
    let mut r = ByteReader::new(bytes);
    if r.take(4).map_err(|_| corrupt("file too short for a container header"))? != MAGIC {
        return Err(corrupt("bad magic, not a container"));
    }
    let version = r.get_u16()?;
    if version != VERSION {
        return Err(corrupt(format!("unsupported container version {version}")));
    }
    let mode_code = r.get_u16()?;
    let mode = Mode::from_code(mode_code).ok_or_else(|| corrupt(format!("unknown mode {mode_code}")))?;
    let count = r.get_u64()?;
    let crc = r.get_u64()?;
    if crc32fast::hash(&bytes[HEADER_LEN..]) as u64 != crc {
        return Err(corrupt("checksum mismatch"));
    }
    if count > 16 || count as usize * ENTRY_LEN > r.remaining() {
        return Err(corrupt("section directory is malformed"));
    }
    let mut infos = Vec::new();
    let mut raw = Vec::new();
    let mut expect = (HEADER_LEN + count as usize * ENTRY_LEN) as u64;
    for _ in 0..count {
        let tag: [u8; 4] = r.take(4)?.try_into().expect("four bytes");
        if r.take(4)? != [0; 4] || !tag.iter().all(|b| b.is_ascii_uppercase()) {
            return Err(corrupt("bad section tag"));
        }
        let offset = r.get_u64()?;
        let len = r.get_u64()?;
        if offset != expect || offset.checked_add(len).is_none_or(|end| end > bytes.len() as u64) {
            return Err(corrupt("section outside the file"));
        }
        expect = offset + len;
        raw.push((tag, &bytes[offset as usize..(offset + len) as usize], false));
        infos.push(SectionInfo { tag: String::from_utf8_lossy(&tag).into_owned(), offset, len });
    }
    if expect != bytes.len() as u64 {
        return Err(corrupt("trailing bytes after the last section"));
    }
    Ok((ContainerInfo { version, mode, sections: infos }, raw))
}

pub fn load(bytes: &[u8]) -> Result<Oracle> {
    let (info, raw) = parse(bytes)?;
    let mut sr = SectionReader { sections: raw };
    let oracle = Oracle::read_sections(info.mode, &mut sr)?;
    sr.finish()?;
    Ok(oracle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::ClosureMatrix;
    use crate::SuccinctPoset;

    fn chain3() -> Oracle {
        Oracle::Poset(SuccinctPoset::build(&ClosureMatrix::from_pairs(3, [(0, 1), (1, 2), (0, 2)]).unwrap()).unwrap())
    }

    #[test]
    fn round_trip() {
        let o = chain3();
        let bytes = save(&o);
        assert_eq!(&bytes[..4], b"SPOS");
        let back = load(&bytes).unwrap();
        assert_eq!(back, o);
        let info = inspect(&bytes).unwrap();
        assert_eq!(info.mode, Mode::Poset);
        let tags: Vec<_> = info.sections.iter().map(|s| s.tag.as_str()).collect();
        assert_eq!(tags, ["FLAT", "CMPR"]);
    }

    #[test]
    fn rejects_damage() {
        let bytes = save(&chain3());
        let mut v = bytes.clone();
        v[4] = 9;
        assert!(load(&v).unwrap_err().to_string().contains("version"));
        let mut v = bytes.clone();
        let last = v.len() - 1;
        v[last] ^= 1;
        assert!(load(&v).unwrap_err().to_string().contains("checksum"));
        assert!(load(&bytes[..10]).is_err());
        assert!(load(b"nope").is_err());
    }
}

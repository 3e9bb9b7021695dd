//! Plain-text instance format.
//!
//! ```text
//! # optional comment lines (a generator header, for example)
//! n m
//! u v      <- m lines, labels 1..=n
//! ```
//!
//! Labels are 1-based in text and 0-based in memory. Blank lines and lines
//! starting with `#` are ignored anywhere.

use crate::error::{Error, Result};
use crate::gen::{EdgeSemantics, Instance};
use crate::order::MAX_ELEMENTS;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn two_numbers(line_no: usize, line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        let tok = it.next().ok_or_else(|| parse_err(line_no, "expected two integers"))?;
        tok.parse().map_err(|_| parse_err(line_no, format!("'{tok}' is not a non-negative integer")))
    };
    let pair = (next()?, next()?);
    if it.next().is_some() {
        return Err(parse_err(line_no, "expected two integers"));
    }
    Ok(pair)
}

pub fn parse_instance(text: &str, semantics: EdgeSemantics) -> Result<Instance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line_no, first) = lines.next().ok_or_else(|| parse_err(1, "empty input, expected 'n m'"))?;
    let (n, m) = two_numbers(line_no, first)?;
    if n > MAX_ELEMENTS {
        return Err(Error::TooLarge(format!("{n} elements exceed the limit of {MAX_ELEMENTS}")));
    }
    let mut edges = Vec::with_capacity(m.min(1 << 20));
    for (line_no, line) in lines {
        if edges.len() == m {
            return Err(parse_err(line_no, format!("more than the declared {m} edges")));
        }
        let (u, v) = two_numbers(line_no, line)?;
        for x in [u, v] {
            if x == 0 || x > n {
                return Err(parse_err(line_no, format!("label {x} outside 1..={n}")));
            }
        }
        edges.push((u - 1, v - 1));
    }
    if edges.len() != m {
        return Err(parse_err(text.lines().count().max(1), format!("declared {m} edges, found {}", edges.len())));
    }
    Ok(Instance { n, edges, semantics })
}

/// Renders an instance; `header` (if any) becomes a leading `#` line.
pub fn write_instance(inst: &Instance, header: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str("# ");
        out.push_str(h);
        out.push('\n');
    }
    out.push_str(&format!("{} {}\n", inst.n, inst.edges.len()));
    for &(u, v) in &inst.edges {
        out.push_str(&format!("{} {}\n", u + 1, v + 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_text() {
        let inst = Instance { n: 3, edges: vec![(0, 1), (1, 2)], semantics: EdgeSemantics::Cover };
        let text = write_instance(&inst, None);
        assert_eq!(text, "3 2\n1 2\n2 3\n");
        assert_eq!(parse_instance(&text, EdgeSemantics::Cover).unwrap(), inst);
    }

    #[test]
    fn header_and_blank_lines_are_skipped() {
        let inst = parse_instance("# kind=chain n=2\n\n2 1\n1 2\n", EdgeSemantics::Closure).unwrap();
        assert_eq!(inst.edges, vec![(0, 1)]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_instance("2 1\n1 3\n", EdgeSemantics::Cover).unwrap_err();
        assert_eq!(e, Error::Parse { line: 2, msg: "label 3 outside 1..=2".into() });
        assert!(matches!(parse_instance("2 2\n1 2\n", EdgeSemantics::Cover), Err(Error::Parse { .. })));
        assert!(matches!(parse_instance("x 1\n", EdgeSemantics::Cover), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_instance("", EdgeSemantics::Cover), Err(Error::Parse { .. })));
        assert!(matches!(parse_instance("1 0\n1 1\n", EdgeSemantics::Cover), Err(Error::Parse { line: 2, .. })));
    }
}

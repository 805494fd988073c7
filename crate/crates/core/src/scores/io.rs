//! Plain-text local score files.
//!
//! ```text
//! 2
//! A 2
//! 0 0
//! 1 1 B
//! B 2
//! 0 0
//! 1 1 A
//! ```
//!
//! The first line holds the number of variables; each block starts with
//! `name count` and lists `score k parent_1 .. parent_k`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::ScoreProvider;
use crate::error::{Error, Result};
use crate::nodeset::NodeSet;

struct RawEntry {
    line: usize,
    score: f64,
    parents: Vec<String>,
}

struct RawBlock {
    name: String,
    entries: Vec<RawEntry>,
}

pub fn parse_score_text(text: &str) -> Result<ScoreProvider> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line_no, first) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty score file"))?;
    let p: usize = first
        .parse()
        .map_err(|_| Error::parse(line_no, format!("expected variable count, got {first:?}")))?;

    let mut blocks: Vec<RawBlock> = Vec::with_capacity(p);
    for _ in 0..p {
        let (line_no, header) = lines
            .next()
            .ok_or_else(|| Error::parse(line_no_end(text), "missing variable block"))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::parse(line_no, format!("expected \"name count\", got {header:?}")));
        }
        let count: usize = toks[1]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad parent-set count {:?}", toks[1])))?;
        if blocks.iter().any(|b| b.name == toks[0]) {
            return Err(Error::parse(line_no, format!("variable {:?} listed twice", toks[0])));
        }
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            let (line_no, l) = lines
                .next()
                .ok_or_else(|| Error::parse(line_no_end(text), "missing score line"))?;
            entries.push(parse_entry(line_no, l)?);
        }
        blocks.push(RawBlock {
            name: toks[0].to_string(),
            entries,
        });
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(Error::parse(line_no, "unexpected content after last block"));
    }

    let names: Vec<String> = blocks.iter().map(|b| b.name.clone()).collect();
    let mut lists = Vec::with_capacity(p);
    for (i, b) in blocks.iter().enumerate() {
        let mut seen = HashSet::new();
        let mut list = Vec::with_capacity(b.entries.len());
        for e in &b.entries {
            let mut set = NodeSet::EMPTY;
            for name in &e.parents {
                let j = names.iter().position(|n| n == name).ok_or_else(|| {
                    Error::parse(e.line, format!("unknown variable {name:?}"))
                })?;
                if j == i {
                    return Err(Error::parse(e.line, format!("{name:?} listed as its own parent")));
                }
                if set.contains(j) {
                    return Err(Error::parse(e.line, format!("parent {name:?} repeated")));
                }
                set.insert(j);
            }
            if !seen.insert(set) {
                return Err(Error::parse(e.line, "duplicate parent set"));
            }
            list.push((set, e.score));
        }
        lists.push(list);
    }
    ScoreProvider::from_lists(names, lists)
}

fn line_no_end(text: &str) -> usize {
    text.lines().count() + 1
}

fn parse_entry(line: usize, l: &str) -> Result<RawEntry> {
    let toks: Vec<&str> = l.split_whitespace().collect();
    if toks.len() < 2 {
        return Err(Error::parse(line, format!("expected \"score k parents..\", got {l:?}")));
    }
    let score: f64 = toks[0]
        .parse()
        .map_err(|_| Error::parse(line, format!("bad score {:?}", toks[0])))?;
    if score.is_nan() {
        return Err(Error::parse(line, "score is NaN"));
    }
    let k: usize = toks[1]
        .parse()
        .map_err(|_| Error::parse(line, format!("bad parent count {:?}", toks[1])))?;
    if toks.len() != k + 2 {
        return Err(Error::parse(
            line,
            format!("declared {k} parents but found {}", toks.len() - 2),
        ));
    }
    Ok(RawEntry {
        line,
        score,
        parents: toks[2..].iter().map(|s| s.to_string()).collect(),
    })
}

pub fn load_score_file(path: &Path) -> Result<ScoreProvider> {
    parse_score_text(&std::fs::read_to_string(path)?)
}

/// Finite entries only, parent sets ordered by size then lexicographically.
pub fn format_score_text(provider: &ScoreProvider) -> String {
    let names = provider.names();
    let mut out = String::new();
    writeln!(out, "{}", provider.p()).unwrap();
    for (i, name) in names.iter().enumerate() {
        let sets = provider.parent_sets(i);
        writeln!(out, "{name} {}", sets.len()).unwrap();
        for (s, x) in sets {
            write!(out, "{x} {}", s.len()).unwrap();
            for j in s {
                write!(out, " {}", names[j]).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_score_file(provider: &ScoreProvider, path: &Path) -> Result<()> {
    std::fs::write(path, format_score_text(provider))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "2\nX1 2\n0 0\n1 1 X2\nX2 2\n0 0\n1 1 X1\n";

    #[test]
    fn single_variable() {
        let sp = parse_score_text("1\nv 1\n0.0 0\n").unwrap();
        assert_eq!(sp.local_score(0, NodeSet::EMPTY), 0.0);
        assert_eq!(format_score_text(&sp).lines().count(), 3);
    }

    #[test]
    fn two_node_file() {
        let sp = parse_score_text(TWO).unwrap();
        assert_eq!(sp.max_node_score(0, NodeSet::singleton(1)), (1.0, NodeSet::singleton(1)));
        assert_eq!(format_score_text(&sp), TWO);
    }

    #[test]
    fn missing_sets_are_disallowed() {
        let sp = parse_score_text("2\nA 1\n-3 1 B\nB 1\n0 0\n").unwrap();
        assert_eq!(sp.best_score(0, NodeSet::EMPTY), f64::NEG_INFINITY);
        assert_eq!(sp.best_score(0, NodeSet::singleton(1)), -3.0);
    }

    fn err_line(text: &str) -> usize {
        match parse_score_text(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(err_line("2\nA 1\n0 0\nB 1\n0 1 C\n"), 5);
        assert_eq!(err_line("2\nA 2\n0 0\n1 0\nB 1\n0 0\n"), 4);
        assert_eq!(err_line("2\nA 1\n0 2 B\nB 1\n0 0\n"), 3);
        assert_eq!(err_line("x\n"), 1);
        assert_eq!(err_line("1\nA 1\nfoo 0\n"), 3);
        assert_eq!(err_line("1\nA 1\n0 0\n0 0\n"), 4);
    }

    #[test]
    fn round_trip_preserves_entries() {
        let text = "3\nc 3\n-1.25 2 a b\n0.1 0\n-7 1 b\nb 1\n2.5e-3 0\na 2\n0 0\n3 1 c\n";
        let sp = parse_score_text(text).unwrap();
        let again = parse_score_text(&format_score_text(&sp)).unwrap();
        for i in 0..3 {
            assert_eq!(sp.parent_sets(i), again.parent_sets(i));
        }
        assert_eq!(format_score_text(&again), format_score_text(&sp));
    }
}

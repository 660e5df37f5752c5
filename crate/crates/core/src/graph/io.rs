//! Edge-list text format.
//!
//! ```text
//! p=4 pdag
//! 1 -> 2
//! 2 -- 3
//! ```
//!
//! Ids are one-based. A bare `i j` line takes its meaning from the header
//! (`directed` or `undirected`); in a `pdag` file every edge needs an
//! explicit arrow. Blank lines and `#` comments are skipped.

use std::fmt::Write as _;

use super::{Dag, NodeId, Pdag, UndirectedGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphFile {
    Directed(Dag),
    Undirected(UndirectedGraph),
    Pdag(Pdag),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Directed,
    Undirected,
    Pdag,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_id(tok: &str, p: usize, line: usize) -> Result<NodeId> {
    let v: usize = tok.parse().map_err(|_| perr(line, format!("bad node id `{tok}`")))?;
    if v == 0 || v > p {
        return Err(perr(line, format!("node id {v} outside 1..={p}")));
    }
    Ok(v - 1)
}

pub fn parse(text: &str) -> Result<GraphFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "missing header"))?;
    let mut parts = header.split_whitespace();
    let p: usize = parts
        .next()
        .and_then(|t| t.strip_prefix("p="))
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| perr(hl, "header must start with p=<n>"))?;
    let kind = match parts.next() {
        Some("directed") => Kind::Directed,
        Some("undirected") => Kind::Undirected,
        Some("pdag") => Kind::Pdag,
        other => return Err(perr(hl, format!("unknown graph kind {other:?}"))),
    };
    if parts.next().is_some() {
        return Err(perr(hl, "trailing tokens in header"));
    }

    let mut directed = Vec::new();
    let mut undirected = Vec::new();
    for (ln, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        let (a, arrow, b) = match toks.as_slice() {
            [a, b] => (*a, None, *b),
            [a, op, b] => (*a, Some(*op), *b),
            _ => return Err(perr(ln, "expected `i j`, `i -> j` or `i -- j`")),
        };
        let (a, b) = (parse_id(a, p, ln)?, parse_id(b, p, ln)?);
        let is_directed = match (arrow, kind) {
            (Some("->"), Kind::Directed | Kind::Pdag) => true,
            (Some("--"), Kind::Undirected | Kind::Pdag) => false,
            (None, Kind::Directed) => true,
            (None, Kind::Undirected) => false,
            (None, Kind::Pdag) => return Err(perr(ln, "pdag edges need `->` or `--`")),
            (Some(op), _) => return Err(perr(ln, format!("edge marker `{op}` not allowed here"))),
        };
        if is_directed {
            directed.push((a, b));
        } else {
            undirected.push((a, b));
        }
    }
    let wrap = |e: Error| match e {
        Error::Parse { .. } => e,
        other => perr(0, other.to_string()),
    };
    Ok(match kind {
        Kind::Directed => GraphFile::Directed(Dag::from_edges(p, &directed).map_err(wrap)?),
        Kind::Undirected => GraphFile::Undirected(UndirectedGraph::from_edges(p, &undirected).map_err(wrap)?),
        Kind::Pdag => GraphFile::Pdag(Pdag::from_edges(p, &directed, &undirected).map_err(wrap)?),
    })
}

pub fn write_dag(g: &Dag) -> String {
    let mut s = format!("p={} directed\n", g.p());
    for (a, b) in g.edges() {
        let _ = writeln!(s, "{} -> {}", a + 1, b + 1);
    }
    s
}

pub fn write_undirected(g: &UndirectedGraph) -> String {
    let mut s = format!("p={} undirected\n", g.p());
    for (a, b) in g.edges() {
        let _ = writeln!(s, "{} -- {}", a + 1, b + 1);
    }
    s
}

pub fn write_pdag(g: &Pdag) -> String {
    let mut edges: Vec<(NodeId, NodeId, &str)> = g
        .directed_edges()
        .into_iter()
        .map(|(a, b)| (a, b, "->"))
        .chain(g.undirected_edges().into_iter().map(|(a, b)| (a, b, "--")))
        .collect();
    edges.sort_unstable();
    let mut s = format!("p={} pdag\n", g.p());
    for (a, b, op) in edges {
        let _ = writeln!(s, "{} {op} {}", a + 1, b + 1);
    }
    s
}

pub fn write(g: &GraphFile) -> String {
    match g {
        GraphFile::Directed(d) => write_dag(d),
        GraphFile::Undirected(u) => write_undirected(u),
        GraphFile::Pdag(p) => write_pdag(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        let text = "p=4 pdag\n1 -> 2\n2 -- 3\n3 -> 4\n";
        let g = parse(text).unwrap();
        assert_eq!(write(&g), text);
    }

    #[test]
    fn bare_pairs_follow_header() {
        let g = parse("p=3 directed\n2 1\n# comment\n\n3 2\n").unwrap();
        assert_eq!(write(&g), "p=3 directed\n2 -> 1\n3 -> 2\n");
        let g = parse("p=3 undirected\n2 1\n").unwrap();
        assert_eq!(write(&g), "p=3 undirected\n1 -- 2\n");
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(parse("p=3 directed\n1 -> 4\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("p=3 pdag\n1 2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("p=3 undirected\n1 -> 2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("q=3 directed\n"), Err(Error::Parse { line: 1, .. })));
        assert!(parse("p=2 directed\n1 2\n2 1\n").is_err());
    }
}

//! Plain-text graph files:
//!
//! ```text
//! vertices 3
//! edge 0 1 1.0
//! edge 1 2 0.5
//! kill 0 1.0
//! ```
//!
//! Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::{GraphError, Vertex, WeightedGraph};

fn parse_err(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, what: &str, line: usize) -> Result<T, GraphError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph, GraphError> {
    let mut count: Option<usize> = None;
    let mut edges: Vec<(Vertex, Vertex, f64)> = Vec::new();
    let mut killing: Vec<f64> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let keyword = toks.next().unwrap();
        match keyword {
            "vertices" => {
                if count.is_some() {
                    return Err(parse_err(line, "repeated `vertices` header"));
                }
                let n: usize = field(toks.next(), "vertex count", line)?;
                if n == 0 {
                    return Err(parse_err(line, "vertex count must be positive"));
                }
                count = Some(n);
                killing = vec![0.0; n];
            }
            "edge" | "kill" => {
                let n = count.ok_or_else(|| parse_err(line, "`vertices` header must come first"))?;
                let check = |v: Vertex| {
                    if v < n {
                        Ok(v)
                    } else {
                        Err(parse_err(line, format!("vertex {v} out of range for {n} vertices")))
                    }
                };
                if keyword == "edge" {
                    let u = check(field(toks.next(), "vertex", line)?)?;
                    let v = check(field(toks.next(), "vertex", line)?)?;
                    let w: f64 = field(toks.next(), "weight", line)?;
                    if !(w > 0.0 && w.is_finite()) {
                        return Err(parse_err(line, format!("edge weight {w} is not positive")));
                    }
                    if u == v {
                        return Err(parse_err(line, format!("self loop at {u}")));
                    }
                    edges.push((u, v, w));
                } else {
                    let u = check(field(toks.next(), "vertex", line)?)?;
                    let k: f64 = field(toks.next(), "killing", line)?;
                    if !(k >= 0.0 && k.is_finite()) {
                        return Err(parse_err(line, format!("killing {k} is negative")));
                    }
                    killing[u] += k;
                }
            }
            other => return Err(parse_err(line, format!("unknown keyword `{other}`"))),
        }
        if let Some(extra) = toks.next() {
            return Err(parse_err(line, format!("trailing token `{extra}`")));
        }
    }
    let n = count.ok_or_else(|| parse_err(0, "missing `vertices` header"))?;
    WeightedGraph::new(n, edges, killing)
}

pub fn read_graph_file(path: &Path) -> Result<WeightedGraph, GraphError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GraphError::Io(format!("{}: {e}", path.display())))?;
    parse_graph(&text)
}

/// Serializes in the format read by [`parse_graph`]; round-trips exactly.
pub fn write_graph(g: &WeightedGraph) -> String {
    let mut out = String::new();
    writeln!(out, "vertices {}", g.vertex_count()).unwrap();
    for e in g.edges() {
        writeln!(out, "edge {} {} {:?}", e.u, e.v, e.weight).unwrap();
    }
    for (x, &k) in g.killing_measure().iter().enumerate() {
        if k > 0.0 {
            writeln!(out, "kill {x} {k:?}").unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_test_graph, RandomGraphParams};

    #[test]
    fn parses_p2() {
        let g = parse_graph("# two vertices\nvertices 2\n\nedge 0 1 1\nkill 0 1\nkill 1 1.0\n")
            .unwrap();
        assert_eq!(g.fingerprint(), crate::graph::p2_killed().fingerprint());
    }

    #[test]
    fn negative_weight_reports_line() {
        let err = parse_graph("vertices 2\nkill 0 1\nedge 0 1 -2\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn malformed_lines() {
        for (text, line) in [
            ("edge 0 1 1\n", 1),
            ("vertices 2\nedge 0 x 1\n", 2),
            ("vertices 2\nedge 0 5 1\n", 2),
            ("vertices 2\nkill 0 1 2\n", 2),
            ("vertices 2\nloop 0\n", 2),
        ] {
            match parse_graph(text) {
                Err(GraphError::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn round_trip() {
        for i in 0..10 {
            let g = random_test_graph(9, i, &RandomGraphParams::default());
            let back = parse_graph(&write_graph(&g)).unwrap();
            assert_eq!(back.fingerprint(), g.fingerprint());
        }
    }
}

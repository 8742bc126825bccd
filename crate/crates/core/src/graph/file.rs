// SPDX-License-Identifier: Apache-2.0

//! Graph cache files.
//!
//! ```text
//! {"entity_kind":"journals","year_span":[2000,2004],"v":3,"n":3,"edges":2,"docs":5}
//! "a"                      <- v lines, JSON-encoded node names in index order
//! "b"
//! "c"
//! 0 1 2                    <- edges: i j w with i < j
//! 0 2 1
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CoocGraph, EntityKind};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Header {
    entity_kind: EntityKind,
    year_span: Option<(i32, i32)>,
    v: usize,
    n: u64,
    edges: usize,
    docs: usize,
}

pub fn write_graph(graph: &CoocGraph, path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let header = Header {
        entity_kind: graph.entity_kind(),
        year_span: graph.year_span(),
        v: graph.node_count(),
        n: graph.total_weight(),
        edges: graph.edge_count(),
        docs: graph.doc_count(),
    };
    serde_json::to_writer(&mut w, &header).map_err(|e| io(e.into()))?;
    writeln!(w).map_err(io)?;
    for name in graph.nodes() {
        serde_json::to_writer(&mut w, name).map_err(|e| io(e.into()))?;
        writeln!(w).map_err(io)?;
    }
    for (i, j, wt) in graph.edges() {
        writeln!(w, "{i} {j} {wt}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_graph(path: &Path) -> Result<CoocGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let bad = |line: usize, reason: String| Error::Malformed {
        path: path.to_path_buf(),
        line: line + 1,
        reason,
    };
    let mut next = || -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i, l)),
            Some((_, Err(e))) => Err(Error::io(path, e)),
            None => Err(bad(usize::MAX - 1, "unexpected end of file".into())),
        }
    };
    let (i, line) = next()?;
    let header: Header = serde_json::from_str(&line).map_err(|e| bad(i, e.to_string()))?;
    let mut nodes = Vec::with_capacity(header.v);
    for _ in 0..header.v {
        let (i, line) = next()?;
        nodes.push(serde_json::from_str::<String>(&line).map_err(|e| bad(i, e.to_string()))?);
    }
    if nodes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad(0, "node names are not strictly ascending".into()));
    }
    let mut edges = Vec::with_capacity(header.edges);
    for _ in 0..header.edges {
        let (i, line) = next()?;
        let parts: Vec<u64> = line
            .split_whitespace()
            .map(|p| p.parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(i, e.to_string()))?;
        let &[a, b, w] = parts.as_slice() else {
            return Err(bad(i, "expected `i j w`".into()));
        };
        if a >= b || b as usize >= header.v || w == 0 || w > u32::MAX as u64 {
            return Err(bad(i, format!("invalid edge {a} {b} {w}")));
        }
        if let Some(&(pa, pb, _)) = edges.last() {
            if (pa as u64, pb as u64) >= (a, b) {
                return Err(bad(i, "edges are not sorted".into()));
            }
        }
        edges.push((a as u32, b as u32, w as u32));
    }
    let graph = CoocGraph::from_edges(
        header.entity_kind,
        header.year_span,
        header.docs,
        nodes,
        edges,
    );
    if graph.total_weight() != header.n {
        return Err(bad(0, "header total weight disagrees with edges".into()));
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_cooc_graph;
    use crate::graph::tests::journal_doc;

    #[test]
    fn graph_file_round_trip() {
        let docs = [
            journal_doc("P1", 2000, &["A", "B", "C"]),
            journal_doc("P2", 2001, &["B", "C", "x y"]),
        ];
        let refs: Vec<_> = docs.iter().collect();
        let g = build_cooc_graph(&refs, EntityKind::Journals);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.graph");
        write_graph(&g, &path).unwrap();
        assert_eq!(read_graph(&path).unwrap(), g);
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Entity co-occurrence graphs and the document citation graph.
//!
//! Every document contributes at most 1 to each entity pair: entities are
//! deduplicated before pairing and self-pairs are never formed. The edge
//! weight is therefore the number of documents combining the two entities.

mod citation;
mod file;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusStore, DocumentRecord};

pub use citation::CitationGraph;
pub use file::{read_graph, write_graph};

/// Knowledge unit used as graph nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    /// Sources (venues) of the cited references.
    Journals,
    /// Document keywords.
    Keywords,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Journals => "journals",
            EntityKind::Keywords => "keywords",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "journals" | "journal" => Ok(EntityKind::Journals),
            "keywords" | "keyword" => Ok(EntityKind::Keywords),
            other => Err(format!("unknown entity kind `{other}` (journals|keywords)")),
        }
    }
}

/// Entity labels of a document, with repeats, in input order.
pub fn document_entities(doc: &DocumentRecord, kind: EntityKind) -> Vec<&str> {
    match kind {
        EntityKind::Journals => doc
            .references
            .iter()
            .filter_map(|r| r.source.as_deref())
            .collect(),
        EntityKind::Keywords => doc.keywords.iter().map(String::as_str).collect(),
    }
}

/// Distinct unordered entity pairs of one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentCombinations {
    pub doc_id: String,
    /// Each pair is `(a, b)` with `a < b`, sorted ascending.
    pub pairs: Vec<(String, String)>,
}

pub fn extract_combinations(doc: &DocumentRecord, kind: EntityKind) -> DocumentCombinations {
    let mut entities = document_entities(doc, kind);
    entities.sort_unstable();
    entities.dedup();
    let mut pairs = Vec::with_capacity(entities.len() * entities.len().saturating_sub(1) / 2);
    for (i, a) in entities.iter().enumerate() {
        for b in &entities[i + 1..] {
            pairs.push((a.to_string(), b.to_string()));
        }
    }
    DocumentCombinations {
        doc_id: doc.id.clone(),
        pairs,
    }
}

#[inline]
pub(crate) fn pair_key(i: u32, j: u32) -> u64 {
    debug_assert!(i < j);
    ((i as u64) << 32) | j as u64
}

#[inline]
pub(crate) fn unpack_key(key: u64) -> (u32, u32) {
    ((key >> 32) as u32, key as u32)
}

/// Appends the keys of all pairs over `sorted_unique` node indices.
#[inline]
pub(crate) fn push_pair_keys(sorted_unique: &[u32], out: &mut Vec<u64>) {
    for (a, &i) in sorted_unique.iter().enumerate() {
        for &j in &sorted_unique[a + 1..] {
            out.push(pair_key(i, j));
        }
    }
}

/// Symmetric weighted co-occurrence graph over dense entity indices.
///
/// Node indices follow the lexicographic order of entity names, so a graph
/// does not depend on the order in which documents were supplied.
/// Adjacency is stored in CSR form with neighbours sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct CoocGraph {
    entity_kind: EntityKind,
    year_span: Option<(i32, i32)>,
    doc_count: usize,
    nodes: Vec<String>,
    index: HashMap<String, u32>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<u32>,
    degrees: Vec<u64>,
    total_weight: u64,
}

impl CoocGraph {
    pub fn empty(entity_kind: EntityKind) -> Self {
        Self::from_edges(entity_kind, None, 0, Vec::new(), Vec::new())
    }

    /// Assembles a graph from sorted node names and an edge list of
    /// `(i, j, w)` with `i < j`, sorted by `(i, j)`, `w > 0`.
    pub(crate) fn from_edges(
        entity_kind: EntityKind,
        year_span: Option<(i32, i32)>,
        doc_count: usize,
        nodes: Vec<String>,
        edges: Vec<(u32, u32, u32)>,
    ) -> Self {
        let v = nodes.len();
        let mut counts = vec![0usize; v];
        for &(i, j, _) in &edges {
            counts[i as usize] += 1;
            counts[j as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(v + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let mut cursor = offsets[..v].to_vec();
        let mut neighbors = vec![0u32; offsets[v]];
        let mut weights = vec![0u32; offsets[v]];
        let mut degrees = vec![0u64; v];
        let mut total_weight = 0u64;
        // Edges sorted by (i, j) fill each row in ascending neighbour order:
        // row x first receives every (k, x) with k < x, then (x, j) with j > x.
        for &(i, j, w) in &edges {
            let (iu, ju) = (i as usize, j as usize);
            neighbors[cursor[iu]] = j;
            weights[cursor[iu]] = w;
            cursor[iu] += 1;
            neighbors[cursor[ju]] = i;
            weights[cursor[ju]] = w;
            cursor[ju] += 1;
            degrees[iu] += w as u64;
            degrees[ju] += w as u64;
            total_weight += w as u64;
        }
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        Self {
            entity_kind,
            year_span,
            doc_count,
            nodes,
            index,
            offsets,
            neighbors,
            weights,
            degrees,
            total_weight,
        }
    }

    pub fn entity_kind(&self) -> EntityKind {
        self.entity_kind
    }

    /// Publication-year span of the contributing documents.
    pub fn year_span(&self) -> Option<(i32, i32)> {
        self.year_span
    }

    /// Number of documents the graph was built from.
    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_name(&self, i: u32) -> &str {
        &self.nodes[i as usize]
    }

    pub fn node_index(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    /// Weighted degree `k_i`.
    pub fn degree(&self, i: u32) -> u64 {
        self.degrees[i as usize]
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    /// `N`, the sum of edge weights without self-loops.
    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    /// Neighbour indices and weights of `i`, ascending by neighbour.
    pub fn neighbors(&self, i: u32) -> (&[u32], &[u32]) {
        let r = self.offsets[i as usize]..self.offsets[i as usize + 1];
        (&self.neighbors[r.clone()], &self.weights[r])
    }

    /// `w(i, j)`, zero when absent or `i == j`.
    pub fn weight(&self, i: u32, j: u32) -> u32 {
        let (nbrs, ws) = self.neighbors(i);
        nbrs.binary_search(&j).map(|p| ws[p]).unwrap_or(0)
    }

    pub fn weight_by_name(&self, a: &str, b: &str) -> u32 {
        match (self.node_index(a), self.node_index(b)) {
            (Some(i), Some(j)) => self.weight(i, j),
            _ => 0,
        }
    }

    /// Upper-triangle edges `(i, j, w)` with `i < j`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        (0..self.nodes.len() as u32).flat_map(move |i| {
            let (nbrs, ws) = self.neighbors(i);
            let start = nbrs.partition_point(|&j| j <= i);
            nbrs[start..]
                .iter()
                .zip(&ws[start..])
                .map(move |(&j, &w)| (i, j, w))
        })
    }
}

/// Builds the co-occurrence graph of `docs`.
///
/// Every entity occurring in a document becomes a node, including entities
/// of documents too small to form a pair.
pub fn build_cooc_graph(docs: &[&DocumentRecord], kind: EntityKind) -> CoocGraph {
    let mut names: Vec<&str> = docs
        .iter()
        .flat_map(|d| document_entities(d, kind))
        .collect();
    names.par_sort_unstable();
    names.dedup();
    let index: HashMap<&str, u32> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (*n, i as u32))
        .collect();

    let mut keys: Vec<u64> = docs
        .par_iter()
        .fold(
            || (Vec::new(), Vec::new()),
            |(mut keys, mut scratch): (Vec<u64>, Vec<u32>), d| {
                scratch.clear();
                scratch.extend(document_entities(d, kind).into_iter().map(|e| index[e]));
                scratch.sort_unstable();
                scratch.dedup();
                push_pair_keys(&scratch, &mut keys);
                (keys, scratch)
            },
        )
        .map(|(k, _)| k)
        .reduce(Vec::new, |mut a, mut b| {
            if a.len() < b.len() {
                std::mem::swap(&mut a, &mut b);
            }
            a.extend_from_slice(&b);
            a
        });
    keys.par_sort_unstable();

    let mut edges = Vec::new();
    let mut start = 0;
    while start < keys.len() {
        let mut end = start + 1;
        while end < keys.len() && keys[end] == keys[start] {
            end += 1;
        }
        let (i, j) = unpack_key(keys[start]);
        edges.push((i, j, (end - start) as u32));
        start = end;
    }

    let year_span = docs
        .iter()
        .map(|d| d.year)
        .min()
        .zip(docs.iter().map(|d| d.year).max());
    CoocGraph::from_edges(
        kind,
        year_span,
        docs.len(),
        names.into_iter().map(str::to_string).collect(),
        edges,
    )
}

/// Graph over every document with `lo <= year <= hi`.
pub fn window_graph(store: &CorpusStore, kind: EntityKind, lo: i32, hi: i32) -> CoocGraph {
    build_cooc_graph(&store.docs_in_years(lo, hi), kind)
}

/// Graph over documents published up to `up_to` (inclusive or exclusive).
pub fn cumulative_graph(
    store: &CorpusStore,
    kind: EntityKind,
    up_to: i32,
    inclusive: bool,
) -> CoocGraph {
    let hi = if inclusive {
        up_to
    } else {
        up_to.saturating_sub(1)
    };
    window_graph(store, kind, i32::MIN, hi)
}

/// Graph of a single publication year.
pub fn year_graph(store: &CorpusStore, kind: EntityKind, year: i32) -> CoocGraph {
    build_cooc_graph(&store.docs_in_year(year), kind)
}

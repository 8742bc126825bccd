// SPDX-License-Identifier: Apache-2.0

//! Commonness: observed pair frequency over its degree-based expectation.

use serde::Serialize;

use super::{doc_pairs, score_docs};
use crate::corpus::CorpusStore;
use crate::error::{Error, Result};
use crate::graph::{build_cooc_graph, CoocGraph, EntityKind};
use crate::score::ScoreRecord;
use crate::stats::percentile_sorted;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeeParams {
    pub entity: EntityKind,
    pub year: i32,
}

/// `w_t(i,j) * N_t / (k_i * k_j)` for every edge of the year graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommonnessTable {
    pub focal_year: i32,
    /// `(i, j, commonness)` sorted by `(i, j)`.
    pub entries: Vec<(u32, u32, f64)>,
}

impl CommonnessTable {
    pub fn from_graph(graph: &CoocGraph, focal_year: i32) -> Self {
        let n = graph.total_weight() as f64;
        let entries = graph
            .edges()
            .map(|(i, j, w)| {
                let expected = graph.degree(i) as f64 * graph.degree(j) as f64;
                (i, j, w as f64 * n / expected)
            })
            .collect();
        Self {
            focal_year,
            entries,
        }
    }

    pub fn get(&self, i: u32, j: u32) -> Option<f64> {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(i, j)))
            .ok()
            .map(|p| self.entries[p].2)
    }
}

#[derive(Debug, Clone)]
pub struct LeeOutput {
    pub graph: CoocGraph,
    pub table: CommonnessTable,
    pub records: Vec<ScoreRecord>,
}

pub fn lee_commonness(store: &CorpusStore, params: &LeeParams) -> Result<LeeOutput> {
    let docs = store.docs_in_year(params.year);
    if docs.is_empty() {
        return Err(Error::NoDocuments(format!("year {}", params.year)));
    }
    let graph = build_cooc_graph(&docs, params.entity);
    let table = CommonnessTable::from_graph(&graph, params.year);
    let entity = params.entity.as_str();
    let records = score_docs(&docs, |doc| {
        let pairs = doc_pairs(doc, &graph, params.entity);
        if pairs.is_empty() {
            return None;
        }
        let mut values: Vec<f64> = pairs
            .iter()
            .map(|&(i, j)| table.get(i, j).expect("document pairs are graph edges"))
            .collect();
        values.sort_by(f64::total_cmp);
        let score = -percentile_sorted(&values, 10.0).ln();
        Some(
            ScoreRecord::new(&doc.id, doc.year, "lee", entity, "")
                .score("commonness", Some(score))
                .count("pairs", pairs.len() as u64)
                .with_distribution(values),
        )
    });
    Ok(LeeOutput {
        graph,
        table,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::novelty::test_support::{journal_doc, store};

    fn five_docs() -> CorpusStore {
        store(vec![
            journal_doc("P1", 2004, &["A", "B"]),
            journal_doc("P2", 2004, &["A", "B"]),
            journal_doc("P3", 2004, &["A", "C"]),
            journal_doc("P4", 2004, &["A", "B"]),
            journal_doc("P5", 2004, &["B", "C"]),
        ])
    }

    #[test]
    fn five_document_example() {
        let out = lee_commonness(
            &five_docs(),
            &LeeParams {
                entity: EntityKind::Journals,
                year: 2004,
            },
        )
        .unwrap();
        let g = &out.graph;
        let c = |a, b| {
            let (i, j) = (g.node_index(a).unwrap(), g.node_index(b).unwrap());
            out.table.get(i.min(j), i.max(j)).unwrap()
        };
        assert_eq!(g.total_weight(), 5);
        assert!((c("A", "B") - 0.9375).abs() < 1e-12);
        assert!((c("A", "C") - 0.625).abs() < 1e-12);
        assert!((c("B", "C") - 0.625).abs() < 1e-12);
        let p3 = out.records.iter().find(|r| r.doc_id == "P3").unwrap();
        let score = p3.get("commonness").unwrap();
        assert!((score - (-(0.625f64).ln())).abs() < 1e-12);
        assert!((score - 0.4700).abs() < 1e-4);
    }

    #[test]
    fn lone_document_scores_zero() {
        let s = store(vec![journal_doc("P", 2004, &["A", "B"])]);
        let out = lee_commonness(
            &s,
            &LeeParams {
                entity: EntityKind::Journals,
                year: 2004,
            },
        )
        .unwrap();
        assert_eq!(out.table.entries, vec![(0, 1, 1.0)]);
        assert_eq!(out.records[0].get("commonness"), Some(0.0));
    }

    #[test]
    fn empty_year_is_an_error() {
        let err = lee_commonness(
            &five_docs(),
            &LeeParams {
                entity: EntityKind::Journals,
                year: 1990,
            },
        );
        assert!(matches!(err, Err(Error::NoDocuments(_))));
    }

    #[test]
    fn ranking_matches_raw_ratio() {
        let out = lee_commonness(
            &five_docs(),
            &LeeParams {
                entity: EntityKind::Journals,
                year: 2004,
            },
        )
        .unwrap();
        for (i, j, c) in &out.table.entries {
            assert!(*c > 0.0);
            let (i, j) = (*i, *j);
            let g = &out.graph;
            let raw = g.weight(i, j) as f64 * g.total_weight() as f64
                / (g.degree(i) * g.degree(j)) as f64;
            assert_eq!(*c, raw);
        }
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Atypicality: z-scores of observed pair frequencies against
//! year-stratified shuffled networks.

use rustc_hash::FxHashMap;
use serde::Serialize;

use super::{doc_pairs, score_docs};
use crate::corpus::CorpusStore;
use crate::error::{Error, Result};
use crate::graph::{build_cooc_graph, pair_key, CoocGraph, EntityKind};
use crate::resampling::{build_plan, resample_stats, EdgeStats, DEFAULT_SAMPLES};
use crate::score::{fingerprint, ScoreRecord};
use crate::stats::percentile_sorted;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UzziParams {
    pub entity: EntityKind,
    pub year: i32,
    pub samples: usize,
    pub seed: u64,
}

impl UzziParams {
    pub fn new(entity: EntityKind, year: i32) -> Self {
        Self {
            entity,
            year,
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(&[
            ("samples", self.samples.to_string()),
            ("seed", self.seed.to_string()),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZEntry {
    pub i: u32,
    pub j: u32,
    pub z: f64,
}

/// Z-scores of the focal year's observed edges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZScoreTable {
    pub focal_year: i32,
    pub sample_count: usize,
    pub seed: u64,
    /// Finite z-scores, sorted by `(i, j)`.
    pub entries: Vec<ZEntry>,
    /// Edges with zero resample spread whose observed weight differs from
    /// the resample mean; they carry no z-score.
    pub excluded: Vec<(u32, u32)>,
}

impl ZScoreTable {
    pub fn get(&self, i: u32, j: u32) -> Option<f64> {
        self.entries
            .binary_search_by(|e| (e.i, e.j).cmp(&(i, j)))
            .ok()
            .map(|p| self.entries[p].z)
    }
}

/// `(obs - mean) / std`, with the zero-spread conventions: `0` when the
/// observation equals the mean, `None` otherwise.
pub fn z_score(observed: f64, mean: f64, std: f64) -> Option<f64> {
    if std > 0.0 {
        Some((observed - mean) / std)
    } else if observed == mean {
        Some(0.0)
    } else {
        None
    }
}

#[derive(Debug, Clone)]
pub struct UzziOutput {
    pub graph: CoocGraph,
    pub stats: EdgeStats,
    pub table: ZScoreTable,
    pub records: Vec<ScoreRecord>,
    /// Documents whose every pair was excluded as degenerate.
    pub skipped: Vec<String>,
}

pub fn uzzi_scores(store: &CorpusStore, params: &UzziParams) -> Result<UzziOutput> {
    let docs = store.docs_in_year(params.year);
    let graph = build_cooc_graph(&docs, params.entity);
    if graph.total_weight() == 0 {
        return Err(Error::NoDocuments(format!(
            "{} with two distinct {}",
            params.year, params.entity
        )));
    }
    let plan = build_plan(&docs, params.entity, params.samples, params.seed)?;
    let stats = resample_stats(&plan, &graph)?;

    let mut entries = Vec::with_capacity(graph.edge_count());
    let mut excluded = Vec::new();
    for (i, j, w) in graph.edges() {
        let s = stats.get(i, j).expect("observed edges are in the stats");
        match z_score(w as f64, s.mean, s.std) {
            Some(z) => entries.push(ZEntry { i, j, z }),
            None => excluded.push((i, j)),
        }
    }
    let table = ZScoreTable {
        focal_year: params.year,
        sample_count: params.samples,
        seed: params.seed,
        entries,
        excluded,
    };

    let lookup: FxHashMap<u64, f64> = table
        .entries
        .iter()
        .map(|e| (pair_key(e.i, e.j), e.z))
        .collect();
    let fp = params.fingerprint();
    let entity = params.entity.as_str();
    let scored = score_docs(&docs, |doc| {
        let pairs = doc_pairs(doc, &graph, params.entity);
        if pairs.is_empty() {
            return None;
        }
        let mut zs: Vec<f64> = pairs
            .iter()
            .filter_map(|&(i, j)| lookup.get(&pair_key(i, j)).copied())
            .collect();
        let degenerate = (pairs.len() - zs.len()) as u64;
        zs.sort_by(f64::total_cmp);
        let (novelty, conventionality) = if zs.is_empty() {
            (None, None)
        } else {
            (
                Some(percentile_sorted(&zs, 10.0)),
                Some(percentile_sorted(&zs, 50.0)),
            )
        };
        Some(
            ScoreRecord::new(&doc.id, doc.year, "uzzi", entity, &fp)
                .score("novelty", novelty)
                .score("conventionality", conventionality)
                .count("pairs", pairs.len() as u64)
                .count("degenerate", degenerate)
                .with_distribution(zs),
        )
    });
    let (records, skipped): (Vec<_>, Vec<_>) =
        scored.into_iter().partition(|r| r.get("novelty").is_some());
    let skipped = skipped.into_iter().map(|r| r.doc_id).collect::<Vec<_>>();
    for id in &skipped {
        log::warn!("uzzi: every pair of {id} is degenerate; no score");
    }
    Ok(UzziOutput {
        graph,
        stats,
        table,
        records,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::novelty::test_support::{journal_doc, store};

    #[test]
    fn zero_spread_conventions() {
        assert_eq!(z_score(3.0, 3.0, 0.0), Some(0.0));
        assert_eq!(z_score(3.0, 2.0, 0.0), None);
        assert_eq!(z_score(3.0, 2.0, 0.5), Some(2.0));
        assert_eq!(z_score(2.0, 2.0, 0.5), Some(0.0));
    }

    #[test]
    fn invariant_shuffles_score_zero() {
        // A is always cited from 1998 and B from 1999, so every shuffle
        // reproduces the observed network.
        let s = store(
            (0..5)
                .map(|i| {
                    let mut d = journal_doc(&format!("d{i}"), 2000, &["A", "B"]);
                    d.references[0].year = Some(1998);
                    d
                })
                .collect(),
        );
        let out = uzzi_scores(&s, &UzziParams::new(EntityKind::Journals, 2000)).unwrap();
        assert_eq!(out.records.len(), 5);
        for r in &out.records {
            assert_eq!(r.get("novelty"), Some(0.0));
            assert_eq!(r.get("conventionality"), Some(0.0));
        }
    }

    #[test]
    fn year_without_pairs_is_an_error() {
        let s = store(vec![journal_doc("d", 2000, &["A"])]);
        let err = uzzi_scores(&s, &UzziParams::new(EntityKind::Journals, 2000));
        assert!(matches!(err, Err(Error::NoDocuments(_))));
        let err = uzzi_scores(&s, &UzziParams::new(EntityKind::Journals, 1990));
        assert!(matches!(err, Err(Error::NoDocuments(_))));
    }

    #[test]
    fn single_pair_documents_get_records() {
        let s = store(vec![
            journal_doc("a", 2000, &["A", "B"]),
            journal_doc("b", 2000, &["C", "D"]),
            journal_doc("c", 2000, &["A"]),
        ]);
        let out = uzzi_scores(&s, &UzziParams::new(EntityKind::Journals, 2000)).unwrap();
        let ids: Vec<_> = out.records.iter().map(|r| r.doc_id.as_str()).collect();
        let mut all: Vec<&str> = ids
            .into_iter()
            .chain(out.skipped.iter().map(|s| s.as_str()))
            .collect();
        all.sort();
        assert_eq!(all, vec!["a", "b"]);
    }
}

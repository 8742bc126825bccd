// SPDX-License-Identifier: Apache-2.0

//! Reuse-conditioned novelty: pairs that are new in the focal year and
//! reused in the following years, weighted by how dissimilar the two
//! entities' recent co-citation profiles are.

use serde::Serialize;

use super::{doc_pairs, score_docs};
use crate::corpus::CorpusStore;
use crate::error::{Error, Result};
use crate::graph::{build_cooc_graph, cumulative_graph, window_graph, CoocGraph, EntityKind};
use crate::score::{fingerprint, ScoreRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WangParams {
    pub entity: EntityKind,
    pub year: i32,
    /// Backward window length for co-citation profiles.
    pub backward: u32,
    /// Forward window length for reuse.
    pub forward: u32,
    /// Minimum number of forward-window documents reusing a pair.
    pub reuse_threshold: u32,
}

impl WangParams {
    pub fn new(entity: EntityKind, year: i32) -> Self {
        Self {
            entity,
            year,
            backward: 3,
            forward: 3,
            reuse_threshold: 1,
        }
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(&[
            ("b", self.backward.to_string()),
            ("f", self.forward.to_string()),
            ("r", self.reuse_threshold.to_string()),
        ])
    }
}

/// The graphs involved in one focal-year computation.
#[derive(Debug, Clone)]
pub struct WangWindows {
    pub focal_year: i32,
    /// `G_t`: the focal year.
    pub current: CoocGraph,
    /// `G_P`: every year before the focal year.
    pub past: CoocGraph,
    /// `G_B`: the backward window, source of the co-citation profiles.
    pub backward: CoocGraph,
    /// `G_F`: the forward window.
    pub future: CoocGraph,
    pub reuse_threshold: u32,
}

impl WangWindows {
    pub fn build(store: &CorpusStore, params: &WangParams) -> Result<(Self, Vec<String>)> {
        if params.backward == 0 || params.forward == 0 {
            return Err(Error::InvalidParams(
                "wang windows must be at least one year".into(),
            ));
        }
        let t = params.year;
        let (span_lo, span_hi) = store
            .year_span()
            .ok_or_else(|| Error::NoDocuments("empty corpus".into()))?;
        let b_lo = t - params.backward as i32;
        let f_hi = t + params.forward as i32;
        let mut warnings = Vec::new();
        for (lo, hi) in [(b_lo, t - 1), (t + 1, f_hi)] {
            if hi < span_lo || lo > span_hi {
                return Err(Error::WindowOutOfRange {
                    lo,
                    hi,
                    span_lo,
                    span_hi,
                });
            }
            if lo < span_lo || hi > span_hi {
                warnings.push(format!(
                    "window [{lo}, {hi}] truncated by corpus span [{span_lo}, {span_hi}]"
                ));
            }
        }
        let windows = Self {
            focal_year: t,
            current: build_cooc_graph(&store.docs_in_year(t), params.entity),
            past: cumulative_graph(store, params.entity, t, false),
            backward: window_graph(store, params.entity, b_lo, t - 1),
            future: window_graph(store, params.entity, t + 1, f_hi),
            reuse_threshold: params.reuse_threshold,
        };
        Ok((windows, warnings))
    }

    /// Whether the pair of names belongs to `E_N`.
    pub fn is_new_and_reused(&self, a: &str, b: &str) -> bool {
        self.current.weight_by_name(a, b) > 0
            && self.past.weight_by_name(a, b) == 0
            && self.future.weight_by_name(a, b) >= self.reuse_threshold.max(1)
    }

    /// Cosine similarity of the two entities' backward-window adjacency rows;
    /// 0 when either row is empty.
    pub fn profile_cosine(&self, a: &str, b: &str) -> f64 {
        let g = &self.backward;
        let (Some(i), Some(j)) = (g.node_index(a), g.node_index(b)) else {
            return 0.0;
        };
        let (ni, wi) = g.neighbors(i);
        let (nj, wj) = g.neighbors(j);
        let norm = |w: &[u32]| {
            w.iter()
                .map(|&x| (x as f64) * (x as f64))
                .sum::<f64>()
                .sqrt()
        };
        let (norm_i, norm_j) = (norm(wi), norm(wj));
        if norm_i == 0.0 || norm_j == 0.0 {
            return 0.0;
        }
        let (mut p, mut q, mut dot) = (0, 0, 0.0);
        while p < ni.len() && q < nj.len() {
            match ni[p].cmp(&nj[q]) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    dot += wi[p] as f64 * wj[q] as f64;
                    p += 1;
                    q += 1;
                }
            }
        }
        dot / (norm_i * norm_j)
    }
}

#[derive(Debug, Clone)]
pub struct WangOutput {
    pub windows: WangWindows,
    pub records: Vec<ScoreRecord>,
    pub warnings: Vec<String>,
}

pub fn wang_novelty(store: &CorpusStore, params: &WangParams) -> Result<WangOutput> {
    let docs = store.docs_in_year(params.year);
    if docs.is_empty() {
        return Err(Error::NoDocuments(format!("year {}", params.year)));
    }
    let (windows, warnings) = WangWindows::build(store, params)?;
    for w in &warnings {
        log::warn!("wang: {w}");
    }
    let fp = params.fingerprint();
    let entity = params.entity.as_str();
    let g = &windows.current;
    let records = score_docs(&docs, |doc| {
        let pairs = doc_pairs(doc, g, params.entity);
        if pairs.is_empty() {
            return None;
        }
        let contributions: Vec<f64> = pairs
            .iter()
            .map(|&(i, j)| (g.node_name(i), g.node_name(j)))
            .filter(|(a, b)| windows.is_new_and_reused(a, b))
            .map(|(a, b)| 1.0 - windows.profile_cosine(a, b))
            .collect();
        let score: f64 = contributions.iter().sum();
        Some(
            ScoreRecord::new(&doc.id, doc.year, "wang", entity, &fp)
                .score("novelty", Some(score))
                .count("pairs", pairs.len() as u64)
                .count("new_reused_pairs", contributions.len() as u64)
                .with_distribution(contributions),
        )
    });
    Ok(WangOutput {
        windows,
        records,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::novelty::test_support::{journal_doc, store};

    fn params(year: i32) -> WangParams {
        WangParams::new(EntityKind::Journals, year)
    }

    fn score(out: &WangOutput, id: &str) -> f64 {
        out.records
            .iter()
            .find(|r| r.doc_id == id)
            .and_then(|r| r.get("novelty"))
            .unwrap()
    }

    #[test]
    fn profile_cosine_hand_example() {
        // Backward profiles over {A,B,C,D}: A = (0,2,0,1), C = (0,0,0,1).
        let s = store(vec![
            journal_doc("b1", 1999, &["A", "B"]),
            journal_doc("b2", 1999, &["A", "B"]),
            journal_doc("b3", 1999, &["A", "D"]),
            journal_doc("b4", 1999, &["C", "D"]),
            journal_doc("fp", 2000, &["A", "C"]),
            journal_doc("f1", 2001, &["A", "C"]),
        ]);
        let out = wang_novelty(&s, &params(2000)).unwrap();
        let expected = 1.0 - 1.0 / 5f64.sqrt();
        assert!((score(&out, "fp") - expected).abs() < 1e-12);
        assert!((expected - 0.5528).abs() < 1e-4);
    }

    #[test]
    fn previously_made_pairs_contribute_nothing() {
        let s = store(vec![
            journal_doc("old", 1990, &["A", "C"]),
            journal_doc("b", 1999, &["A", "B"]),
            journal_doc("fp", 2000, &["A", "C"]),
            journal_doc("f1", 2001, &["A", "C"]),
        ]);
        let out = wang_novelty(&s, &params(2000)).unwrap();
        assert_eq!(score(&out, "fp"), 0.0);
    }

    #[test]
    fn unreused_pairs_contribute_nothing() {
        let s = store(vec![
            journal_doc("b", 1999, &["A", "B"]),
            journal_doc("fp", 2000, &["A", "C"]),
            journal_doc("f1", 2001, &["B", "C"]),
        ]);
        let out = wang_novelty(&s, &params(2000)).unwrap();
        assert_eq!(score(&out, "fp"), 0.0);
    }

    #[test]
    fn unseen_entities_are_maximally_unfamiliar() {
        let s = store(vec![
            journal_doc("b", 1999, &["A", "B"]),
            journal_doc("fp", 2000, &["Q", "R"]),
            journal_doc("f1", 2001, &["Q", "R"]),
        ]);
        let out = wang_novelty(&s, &params(2000)).unwrap();
        assert_eq!(score(&out, "fp"), 1.0);
    }

    #[test]
    fn reuse_threshold_filters() {
        let s = store(vec![
            journal_doc("b", 1999, &["A", "B"]),
            journal_doc("fp", 2000, &["Q", "R"]),
            journal_doc("f1", 2001, &["Q", "R"]),
        ]);
        let p = WangParams {
            reuse_threshold: 2,
            ..params(2000)
        };
        assert_eq!(score(&wang_novelty(&s, &p).unwrap(), "fp"), 0.0);
    }

    #[test]
    fn windows_outside_corpus_are_errors() {
        let s = store(vec![
            journal_doc("fp", 2000, &["A", "B"]),
            journal_doc("f1", 2001, &["A", "B"]),
        ]);
        assert!(matches!(
            wang_novelty(&s, &params(2000)),
            Err(Error::WindowOutOfRange { .. })
        ));
        let s = store(vec![
            journal_doc("b", 1999, &["A", "B"]),
            journal_doc("fp", 2000, &["A", "B"]),
        ]);
        assert!(matches!(
            wang_novelty(&s, &params(2000)),
            Err(Error::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn truncated_windows_warn() {
        let s = store(vec![
            journal_doc("b", 1999, &["A", "B"]),
            journal_doc("fp", 2000, &["A", "C"]),
            journal_doc("f", 2001, &["A", "C"]),
        ]);
        let out = wang_novelty(&s, &params(2000)).unwrap();
        assert_eq!(out.warnings.len(), 2);
    }
}

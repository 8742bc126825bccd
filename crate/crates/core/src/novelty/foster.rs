// SPDX-License-Identifier: Apache-2.0

//! Bridging: share of a document's pairs spanning two communities of the
//! cumulative co-occurrence graph.

use serde::Serialize;

use super::louvain::{detect_communities, CommunityPartition};
use super::{doc_pairs, score_docs};
use crate::corpus::CorpusStore;
use crate::error::{Error, Result};
use crate::graph::{cumulative_graph, CoocGraph, EntityKind};
use crate::score::{fingerprint, ScoreRecord};

pub const DEFAULT_RESOLUTION: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FosterParams {
    pub entity: EntityKind,
    pub year: i32,
    pub resolution: f64,
    pub seed: u64,
}

impl FosterParams {
    pub fn new(entity: EntityKind, year: i32) -> Self {
        Self {
            entity,
            year,
            resolution: DEFAULT_RESOLUTION,
            seed: 0,
        }
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(&[
            ("resolution", self.resolution.to_string()),
            ("seed", self.seed.to_string()),
        ])
    }
}

#[derive(Debug, Clone)]
pub struct FosterOutput {
    /// Cumulative graph over every document up to and including the year.
    pub graph: CoocGraph,
    pub partition: CommunityPartition,
    pub records: Vec<ScoreRecord>,
}

pub fn foster_bridging(store: &CorpusStore, params: &FosterParams) -> Result<FosterOutput> {
    let docs = store.docs_in_year(params.year);
    if docs.is_empty() {
        return Err(Error::NoDocuments(format!("year {}", params.year)));
    }
    let graph = cumulative_graph(store, params.entity, params.year, true);
    let partition = detect_communities(&graph, params.resolution, params.seed)?;
    let fp = params.fingerprint();
    let entity = params.entity.as_str();
    let records = score_docs(&docs, |doc| {
        let pairs = doc_pairs(doc, &graph, params.entity);
        if pairs.is_empty() {
            return None;
        }
        let across = pairs
            .iter()
            .filter(|&&(i, j)| partition.community_of(i) != partition.community_of(j))
            .count();
        Some(
            ScoreRecord::new(&doc.id, doc.year, "foster", entity, &fp)
                .score("novelty", Some(across as f64 / pairs.len() as f64))
                .count("pairs", pairs.len() as u64)
                .count("inter_community_pairs", across as u64),
        )
    });
    Ok(FosterOutput {
        graph,
        partition,
        records,
    })
}

// SPDX-License-Identifier: Apache-2.0

//! Co-occurrence based novelty indicators.
//!
//! All four indicators score a focal document through its distinct entity
//! pairs `E_FP`; a document with fewer than two distinct entities receives no
//! record.

mod foster;
mod lee;
pub mod louvain;
mod uzzi;
mod wang;

use rayon::prelude::*;

use crate::corpus::DocumentRecord;
use crate::graph::{document_entities, CoocGraph, EntityKind};
use crate::score::ScoreRecord;

pub use foster::{foster_bridging, FosterOutput, FosterParams, DEFAULT_RESOLUTION};
pub use lee::{lee_commonness, CommonnessTable, LeeOutput, LeeParams};
pub use louvain::{detect_communities, modularity, CommunityPartition};
pub use uzzi::{uzzi_scores, z_score, UzziOutput, UzziParams, ZEntry, ZScoreTable};
pub use wang::{wang_novelty, WangOutput, WangParams, WangWindows};

/// Distinct pairs of a document in `graph` indexing, `(i, j)` with `i < j`.
///
/// Entities missing from the graph are ignored.
pub(crate) fn doc_pairs(
    doc: &DocumentRecord,
    graph: &CoocGraph,
    kind: EntityKind,
) -> Vec<(u32, u32)> {
    let mut nodes: Vec<u32> = document_entities(doc, kind)
        .into_iter()
        .filter_map(|e| graph.node_index(e))
        .collect();
    nodes.sort_unstable();
    nodes.dedup();
    let mut pairs = Vec::with_capacity(nodes.len() * nodes.len().saturating_sub(1) / 2);
    for (a, &i) in nodes.iter().enumerate() {
        for &j in &nodes[a + 1..] {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Scores every document in parallel, keeping input order.
pub(crate) fn score_docs<F>(docs: &[&DocumentRecord], f: F) -> Vec<ScoreRecord>
where
    F: Fn(&DocumentRecord) -> Option<ScoreRecord> + Sync,
{
    docs.par_iter()
        .map(|d| f(d))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::corpus::{CorpusStore, DocumentRecord, IngestOptions, Provenance, ReferenceEntry};

    pub fn journal_doc(id: &str, year: i32, sources: &[&str]) -> DocumentRecord {
        DocumentRecord {
            id: id.into(),
            year,
            references: sources
                .iter()
                .map(|s| ReferenceEntry {
                    ref_id: None,
                    source: Some(s.to_string()),
                    year: Some(year - 1),
                })
                .collect(),
            keywords: vec![],
            title_vector_id: None,
            abstract_vector_id: None,
        }
    }

    pub fn store(docs: Vec<DocumentRecord>) -> CorpusStore {
        CorpusStore::from_documents(
            docs,
            Provenance {
                input_digest: String::new(),
                options: IngestOptions::default(),
            },
        )
        .0
    }
}

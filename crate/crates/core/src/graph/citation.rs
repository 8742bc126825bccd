// SPDX-License-Identifier: Apache-2.0

use crate::corpus::CorpusStore;

/// Directed, unweighted citation graph restricted to in-corpus documents.
///
/// Node indices are the store's id-order positions. Both directions are
/// kept in CSR form with sorted rows: `refs(d)` is the set of documents `d`
/// cites, `citers(d)` the set of documents citing `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationGraph {
    ids: Vec<String>,
    ref_offsets: Vec<usize>,
    refs: Vec<u32>,
    citer_offsets: Vec<usize>,
    citers: Vec<u32>,
    resolved: Vec<u32>,
    total: Vec<u32>,
    self_citations: usize,
}

impl CitationGraph {
    pub fn build(store: &CorpusStore) -> Self {
        let docs = store.documents();
        let n = docs.len();
        let mut ref_offsets = Vec::with_capacity(n + 1);
        ref_offsets.push(0);
        let mut refs = Vec::new();
        let mut resolved = Vec::with_capacity(n);
        let mut total = Vec::with_capacity(n);
        let mut self_citations = 0;
        let mut row = Vec::new();
        for (d, doc) in docs.iter().enumerate() {
            row.clear();
            for r in &doc.references {
                let Some(target) = r.ref_id.as_deref().and_then(|id| store.position(id)) else {
                    continue;
                };
                if target == d {
                    self_citations += 1;
                    log::warn!("dropping self-citation of {}", doc.id);
                    continue;
                }
                row.push(target as u32);
            }
            row.sort_unstable();
            row.dedup();
            resolved.push(row.len() as u32);
            total.push(doc.references.len() as u32);
            refs.extend_from_slice(&row);
            ref_offsets.push(refs.len());
        }

        let mut counts = vec![0usize; n];
        for &t in &refs {
            counts[t as usize] += 1;
        }
        let mut citer_offsets = Vec::with_capacity(n + 1);
        citer_offsets.push(0);
        for c in &counts {
            citer_offsets.push(citer_offsets.last().unwrap() + c);
        }
        let mut cursor = citer_offsets[..n].to_vec();
        let mut citers = vec![0u32; refs.len()];
        // Citing documents are visited in ascending order, so rows come out sorted.
        for d in 0..n {
            for &t in &refs[ref_offsets[d]..ref_offsets[d + 1]] {
                citers[cursor[t as usize]] = d as u32;
                cursor[t as usize] += 1;
            }
        }

        Self {
            ids: docs.iter().map(|d| d.id.clone()).collect(),
            ref_offsets,
            refs,
            citer_offsets,
            citers,
            resolved,
            total,
            self_citations,
        }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.refs.len()
    }

    pub fn id(&self, d: u32) -> &str {
        &self.ids[d as usize]
    }

    pub fn index_of(&self, id: &str) -> Option<u32> {
        self.ids
            .binary_search_by(|probe| probe.as_str().cmp(id))
            .ok()
            .map(|i| i as u32)
    }

    /// `In_d`: in-corpus documents cited by `d`, ascending.
    pub fn refs(&self, d: u32) -> &[u32] {
        &self.refs[self.ref_offsets[d as usize]..self.ref_offsets[d as usize + 1]]
    }

    /// `Out_d`: documents citing `d`, ascending.
    pub fn citers(&self, d: u32) -> &[u32] {
        &self.citers[self.citer_offsets[d as usize]..self.citer_offsets[d as usize + 1]]
    }

    /// Distinct in-corpus references of `d`.
    pub fn resolved_ref_count(&self, d: u32) -> u32 {
        self.resolved[d as usize]
    }

    /// All reference entries of `d`, resolved or not.
    pub fn total_ref_count(&self, d: u32) -> u32 {
        self.total[d as usize]
    }

    pub fn self_citations_dropped(&self) -> usize {
        self.self_citations
    }
}

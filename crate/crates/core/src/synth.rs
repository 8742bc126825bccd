// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic corpora with planted entity communities, preferential
//! attachment citations and a geometric reference-age distribution.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Normal};
use serde::Serialize;

use crate::corpus::{DocumentRecord, ReferenceEntry};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthParams {
    pub n_docs: usize,
    /// Number of journals; the keyword vocabulary has the same size.
    pub n_entities: usize,
    /// Inclusive publication-year range.
    pub years: (i32, i32),
    pub communities: usize,
    /// Mean number of references per document.
    pub mean_refs: usize,
    /// Probability that a reference points to an earlier corpus document.
    pub p_internal: f64,
    /// Probability that an entity is drawn outside the document's community.
    pub p_cross: f64,
    /// Success probability of the geometric reference-age distribution.
    pub age_decay: f64,
    pub keywords_per_doc: usize,
    /// Embedding dimension; 0 disables embeddings.
    pub embedding_dim: usize,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            n_docs: 1000,
            n_entities: 50,
            years: (2000, 2009),
            communities: 4,
            mean_refs: 10,
            p_internal: 0.6,
            p_cross: 0.1,
            age_decay: 0.35,
            keywords_per_doc: 3,
            embedding_dim: 16,
            seed: 0,
        }
    }
}

/// Planted structure, for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub params: SynthParams,
    /// Community of each document, in document order.
    pub doc_communities: Vec<(String, u32)>,
    /// Community of each journal and keyword.
    pub entity_communities: Vec<(String, u32)>,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    /// Sorted by id, which is also year order.
    pub documents: Vec<DocumentRecord>,
    /// `(vector id, vector)` for title and abstract vectors.
    pub embeddings: Vec<(String, Vec<f64>)>,
    pub truth: GroundTruth,
}

pub fn journal_name(e: usize) -> String {
    format!("j{e:04}")
}

pub fn keyword_name(e: usize) -> String {
    format!("kw{e:04}")
}

fn pick_entity(rng: &mut ChaCha8Rng, community: usize, p: &SynthParams) -> usize {
    let n = p.n_entities;
    let c = p.communities.min(n);
    if rng.random_bool(p.p_cross) {
        return rng.random_range(0..n);
    }
    // Entities of community `c0` are c0, c0 + c, c0 + 2c, ...
    let c0 = community % c;
    let members = (n - c0).div_ceil(c);
    c0 + c * rng.random_range(0..members)
}

pub fn synth_corpus(p: &SynthParams) -> Result<SynthCorpus> {
    if p.n_docs == 0 {
        return Err(Error::InvalidParams("n_docs must be at least 1".into()));
    }
    if p.n_entities < 2 {
        return Err(Error::InvalidParams("n_entities must be at least 2".into()));
    }
    if p.years.0 > p.years.1 {
        return Err(Error::InvalidParams(format!(
            "empty year range {}..{}",
            p.years.0, p.years.1
        )));
    }
    if p.communities == 0 {
        return Err(Error::InvalidParams(
            "communities must be at least 1".into(),
        ));
    }
    for (name, v) in [("p_internal", p.p_internal), ("p_cross", p.p_cross)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParams(format!("{name} must lie in [0, 1]")));
        }
    }
    if !(p.age_decay > 0.0 && p.age_decay <= 1.0) {
        return Err(Error::InvalidParams("age_decay must lie in (0, 1]".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let age = Geometric::new(p.age_decay).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let noise = Normal::new(0.0, 0.5).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let span = (p.years.1 - p.years.0) as usize + 1;
    let width = p.n_docs.to_string().len().max(6);
    let c = p.communities.min(p.n_entities);

    let centroids: Vec<Vec<f64>> = (0..c)
        .map(|_| {
            (0..p.embedding_dim)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect()
        })
        .collect();

    let mut documents: Vec<DocumentRecord> = Vec::with_capacity(p.n_docs);
    let mut doc_communities = Vec::with_capacity(p.n_docs);
    let mut venues = Vec::with_capacity(p.n_docs);
    let mut embeddings = Vec::new();
    // Citation tickets per year offset: a document appears once, plus once
    // per citation received.
    let mut tickets: Vec<Vec<u32>> = vec![Vec::new(); span];

    for d in 0..p.n_docs {
        let offset = d * span / p.n_docs;
        let year = p.years.0 + offset as i32;
        let community = rng.random_range(0..c);
        let id = format!("d{d:0width$}");
        let venue = pick_entity(&mut rng, community, p);

        let lo = p.mean_refs / 2;
        let n_refs = rng.random_range(lo..=p.mean_refs + (p.mean_refs - lo));
        let mut references = Vec::with_capacity(n_refs);
        for _ in 0..n_refs {
            let a = 1 + age.sample(&mut rng) as usize;
            let internal = rng.random_bool(p.p_internal) && offset > 0;
            let target = if internal {
                let t_off = offset - a.min(offset);
                tickets[t_off].choose(&mut rng).copied().map(|t| (t, t_off))
            } else {
                None
            };
            match target {
                Some((t, t_off)) => {
                    let t = t as usize;
                    references.push(ReferenceEntry {
                        ref_id: Some(documents[t].id.clone()),
                        source: Some(journal_name(venues[t])),
                        year: Some(p.years.0 + t_off as i32),
                    });
                    tickets[t_off].push(t as u32);
                }
                None => {
                    references.push(ReferenceEntry {
                        ref_id: None,
                        source: Some(journal_name(pick_entity(&mut rng, community, p))),
                        year: Some(year - a as i32),
                    });
                }
            }
        }
        let keywords = (0..p.keywords_per_doc)
            .map(|_| keyword_name(pick_entity(&mut rng, community, p)))
            .collect();

        let (title_vector_id, abstract_vector_id) = if p.embedding_dim > 0 {
            for prefix in ["t", "a"] {
                let v: Vec<f64> = centroids[community]
                    .iter()
                    .map(|x| x + noise.sample(&mut rng))
                    .collect();
                embeddings.push((format!("{prefix}:{id}"), v));
            }
            (Some(format!("t:{id}")), Some(format!("a:{id}")))
        } else {
            (None, None)
        };

        tickets[offset].push(d as u32);
        venues.push(venue);
        doc_communities.push((id.clone(), community as u32));
        documents.push(DocumentRecord {
            id,
            year,
            references,
            keywords,
            title_vector_id,
            abstract_vector_id,
        });
    }

    let mut entity_communities: Vec<(String, u32)> = (0..p.n_entities)
        .map(|e| (journal_name(e), (e % c) as u32))
        .collect();
    entity_communities.extend((0..p.n_entities).map(|e| (keyword_name(e), (e % c) as u32)));

    Ok(SynthCorpus {
        documents,
        embeddings,
        truth: GroundTruth {
            params: p.clone(),
            doc_communities,
            entity_communities,
        },
    })
}

/// Writes the ground truth as pretty JSON.
pub fn write_truth(path: &Path, truth: &GroundTruth) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    serde_json::to_writer_pretty(&mut w, truth).map_err(|e| io(e.into()))?;
    w.write_all(b"\n").map_err(io)?;
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusStore, IngestOptions, Provenance};
    use crate::graph::CitationGraph;
    use crate::novelty::{lee_commonness, LeeParams};
    use crate::EntityKind;

    fn params(n: usize) -> SynthParams {
        SynthParams {
            n_docs: n,
            seed: 1,
            ..Default::default()
        }
    }

    fn store(docs: Vec<DocumentRecord>) -> CorpusStore {
        let prov = Provenance {
            input_digest: String::new(),
            options: IngestOptions::default(),
        };
        CorpusStore::from_documents(docs, prov).0
    }

    #[test]
    fn deterministic_under_seed() {
        let a = synth_corpus(&params(100)).unwrap();
        let b = synth_corpus(&params(100)).unwrap();
        assert_eq!(a.documents, b.documents);
        assert_eq!(a.embeddings, b.embeddings);
        let c = synth_corpus(&SynthParams {
            seed: 2,
            ..params(100)
        })
        .unwrap();
        assert_ne!(a.documents, c.documents);
    }

    #[test]
    fn ids_sort_in_generation_order_and_cite_backwards() {
        let s = synth_corpus(&params(500)).unwrap();
        let ids: Vec<_> = s.documents.iter().map(|d| d.id.clone()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        let years: std::collections::HashMap<_, _> =
            s.documents.iter().map(|d| (d.id.clone(), d.year)).collect();
        let mut internal = 0;
        for d in &s.documents {
            for r in &d.references {
                if let Some(t) = &r.ref_id {
                    assert!(years[t] < d.year);
                    assert_eq!(r.year, Some(years[t]));
                    internal += 1;
                }
            }
        }
        assert!(internal > 0);
    }

    #[test]
    fn single_year_has_no_citations() {
        let s = synth_corpus(&SynthParams {
            years: (2000, 2000),
            ..params(100)
        })
        .unwrap();
        assert!(s.documents.iter().all(|d| d.year == 2000));
        let g = CitationGraph::build(&store(s.documents));
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn two_entities_give_one_pair() {
        let s = synth_corpus(&SynthParams {
            n_entities: 2,
            ..params(100)
        })
        .unwrap();
        let st = store(s.documents);
        let out = lee_commonness(
            &st,
            &LeeParams {
                entity: EntityKind::Journals,
                year: 2000,
            },
        )
        .unwrap();
        assert_eq!(out.table.entries, vec![(0, 1, 1.0)]);
        assert!(out.records.iter().all(|r| r.get("commonness") == Some(0.0)));
    }

    #[test]
    fn invalid_params() {
        assert!(synth_corpus(&params(0)).is_err());
        assert!(synth_corpus(&SynthParams {
            n_entities: 1,
            ..params(10)
        })
        .is_err());
        assert!(synth_corpus(&SynthParams {
            years: (2001, 2000),
            ..params(10)
        })
        .is_err());
    }

    #[test]
    fn embeddings_cover_every_document() {
        let s = synth_corpus(&params(20)).unwrap();
        assert_eq!(s.embeddings.len(), 40);
        assert!(s.embeddings.iter().all(|(_, v)| v.len() == 16));
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Browser demo: a synthetic corpus scored in the page.
//!
//! Every method returns a JSON string, which keeps the JS side to `JSON.parse`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use scinov_core::bench::BenchSpec;
use scinov_core::corpus::{CorpusStore, IngestOptions, Provenance};
use scinov_core::graph::window_graph;
use scinov_core::novelty::louvain::detect_communities;
use scinov_core::pipeline::run_indicator;
use scinov_core::report::{report_correlation, ScoreSeries};
use scinov_core::semantic::EmbeddingStore;
use scinov_core::synth::{synth_corpus, SynthParams};
use scinov_core::EntityKind;

pub const INDICATORS: [&str; 6] = [
    "uzzi:s=20",
    "lee",
    "foster",
    "wang",
    "shibayama",
    "disruption",
];

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[derive(Serialize)]
pub struct Histogram {
    pub indicator: String,
    pub score: String,
    pub year: i32,
    pub scored: usize,
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Serialize)]
pub struct Node {
    pub name: String,
    pub degree: u64,
    pub detected: u32,
    pub planted: Option<u32>,
}

#[derive(Serialize)]
pub struct Communities {
    pub resolution: f64,
    pub modularity: f64,
    pub community_count: usize,
    pub nodes: Vec<Node>,
    /// `(a, b, weight)` over node positions.
    pub edges: Vec<(u32, u32, u32)>,
}

#[wasm_bindgen]
pub struct Demo {
    store: CorpusStore,
    embeddings: EmbeddingStore,
    planted: Vec<(String, u32)>,
    seed: u64,
    focal_year: i32,
}

#[wasm_bindgen]
impl Demo {
    /// Generates a corpus spanning 2000..=2009.
    #[wasm_bindgen(constructor)]
    pub fn new(
        n_docs: usize,
        n_entities: usize,
        communities: usize,
        seed: u64,
    ) -> Result<Demo, JsValue> {
        Self::build(n_docs, n_entities, communities, seed).map_err(js_err)
    }

    #[wasm_bindgen(getter)]
    pub fn documents(&self) -> usize {
        self.store.len()
    }

    /// Distribution of the primary score of one indicator at the middle year.
    pub fn histogram(&self, indicator: &str, bins: usize) -> Result<String, JsValue> {
        let h = self.histogram_inner(indicator, bins).map_err(js_err)?;
        serde_json::to_string(&h).map_err(js_err)
    }

    /// Journal communities of the whole corpus at the given resolution.
    pub fn communities(&self, resolution: f64) -> Result<String, JsValue> {
        let c = self.communities_inner(resolution).map_err(js_err)?;
        serde_json::to_string(&c).map_err(js_err)
    }

    /// Pearson and Spearman matrix of every indicator's primary score.
    pub fn correlation(&self) -> Result<String, JsValue> {
        let m = self.correlation_inner().map_err(js_err)?;
        serde_json::to_string(&m).map_err(js_err)
    }
}

impl Demo {
    pub fn build(
        n_docs: usize,
        n_entities: usize,
        communities: usize,
        seed: u64,
    ) -> scinov_core::Result<Self> {
        let params = SynthParams {
            n_docs,
            n_entities,
            communities,
            embedding_dim: 8,
            seed,
            ..Default::default()
        };
        let synth = synth_corpus(&params)?;
        let mut embeddings = EmbeddingStore::default();
        for (id, v) in synth.embeddings {
            embeddings.insert(id, v)?;
        }
        let prov = Provenance {
            input_digest: format!("synth:n={n_docs},e={n_entities},c={communities},seed={seed}"),
            options: IngestOptions::default(),
        };
        let (store, _) = CorpusStore::from_documents(synth.documents, prov);
        Ok(Self {
            store,
            embeddings,
            planted: synth.truth.entity_communities,
            seed,
            focal_year: (params.years.0 + params.years.1 + 1) / 2,
        })
    }

    fn series(&self, spec: &str) -> scinov_core::Result<ScoreSeries> {
        let spec: BenchSpec = spec.parse()?;
        let ind = spec.indicator(EntityKind::Journals, self.focal_year, self.seed)?;
        let ind = match ind {
            scinov_core::pipeline::Indicator::Disruption { measures, .. } => {
                scinov_core::pipeline::Indicator::Disruption {
                    year: Some(self.focal_year),
                    measures,
                }
            }
            other => other,
        };
        let out = run_indicator(&self.store, Some(&self.embeddings), &ind)?;
        ScoreSeries::from_records(&spec.name, &out.records, None)
    }

    pub fn histogram_inner(&self, indicator: &str, bins: usize) -> scinov_core::Result<Histogram> {
        let series = self.series(indicator)?;
        let mut values: Vec<f64> = series.values.values().copied().collect();
        values.sort_by(f64::total_cmp);
        let bins = bins.clamp(1, 200);
        let (lo, hi) = match (values.first(), values.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => (0.0, 1.0),
        };
        let width = if hi > lo {
            (hi - lo) / bins as f64
        } else {
            1.0
        };
        let mut counts = vec![0; bins];
        for v in &values {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let (name, score) = series.label.split_once(':').unwrap_or((&series.label, ""));
        Ok(Histogram {
            indicator: name.to_string(),
            score: score.to_string(),
            year: self.focal_year,
            scored: values.len(),
            edges: (0..=bins).map(|i| lo + width * i as f64).collect(),
            counts,
        })
    }

    pub fn communities_inner(&self, resolution: f64) -> scinov_core::Result<Communities> {
        let (lo, hi) = self.store.year_span().unwrap_or((0, 0));
        let graph = window_graph(&self.store, EntityKind::Journals, lo, hi);
        let part = detect_communities(&graph, resolution, self.seed)?;
        let planted = |name: &str| {
            self.planted
                .iter()
                .find(|(n, _)| n == name)
                .map(|&(_, c)| c)
        };
        Ok(Communities {
            resolution,
            modularity: part.modularity,
            community_count: part.community_count,
            nodes: graph
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, name)| Node {
                    name: name.clone(),
                    degree: graph.degree(i as u32),
                    detected: part.membership[i],
                    planted: planted(name),
                })
                .collect(),
            edges: graph.edges().collect(),
        })
    }

    pub fn correlation_inner(&self) -> scinov_core::Result<scinov_core::report::CorrelationMatrix> {
        let series = INDICATORS
            .iter()
            .map(|s| self.series(s))
            .collect::<scinov_core::Result<Vec<_>>>()?;
        report_correlation(&series)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operations_on_a_small_corpus() {
        let demo = Demo::build(400, 20, 4, 1).unwrap();
        for ind in INDICATORS {
            let h = demo.histogram_inner(ind, 10).unwrap();
            assert_eq!(h.counts.iter().sum::<usize>(), h.scored, "{ind}");
            assert_eq!(h.edges.len(), 11);
        }
        let c = demo.communities_inner(1.0).unwrap();
        assert_eq!(c.nodes.len(), 20);
        assert!(c.community_count >= 2);
        assert!(c.nodes.iter().all(|n| n.planted.is_some()));
        let coarse = demo.communities_inner(0.05).unwrap();
        assert!(coarse.community_count <= c.community_count);
        let m = demo.correlation_inner().unwrap();
        assert_eq!(m.labels.len(), INDICATORS.len());
    }
}

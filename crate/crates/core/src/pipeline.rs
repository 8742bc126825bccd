// SPDX-License-Identifier: Apache-2.0

//! One entry point for running any indicator on a loaded corpus.

use serde::Serialize;

use crate::corpus::CorpusStore;
use crate::disruption::{disruption_corpus, measures_fingerprint, Measure};
use crate::error::{Error, Result};
use crate::graph::CitationGraph;
use crate::novelty::{
    foster_bridging, lee_commonness, uzzi_scores, wang_novelty, FosterParams, LeeParams,
    UzziParams, WangParams,
};
use crate::score::ScoreRecord;
use crate::semantic::{shibayama_year, EmbeddingStore, ShibayamaParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Indicator {
    Uzzi(UzziParams),
    Lee(LeeParams),
    Foster(FosterParams),
    Wang(WangParams),
    Shibayama {
        year: i32,
        params: ShibayamaParams,
    },
    /// `year: None` scores the whole corpus.
    Disruption {
        year: Option<i32>,
        measures: Vec<Measure>,
    },
}

impl Indicator {
    pub fn name(&self) -> &'static str {
        match self {
            Indicator::Uzzi(_) => "uzzi",
            Indicator::Lee(_) => "lee",
            Indicator::Foster(_) => "foster",
            Indicator::Wang(_) => "wang",
            Indicator::Shibayama { .. } => "shibayama",
            Indicator::Disruption { .. } => "disruption",
        }
    }

    /// `journals`, `keywords`, `title`, `abstract` or `citations`.
    pub fn entity(&self) -> &'static str {
        match self {
            Indicator::Uzzi(p) => p.entity.as_str(),
            Indicator::Lee(p) => p.entity.as_str(),
            Indicator::Foster(p) => p.entity.as_str(),
            Indicator::Wang(p) => p.entity.as_str(),
            Indicator::Shibayama { params, .. } => params.field.as_str(),
            Indicator::Disruption { .. } => "citations",
        }
    }

    pub fn year(&self) -> Option<i32> {
        match self {
            Indicator::Uzzi(p) => Some(p.year),
            Indicator::Lee(p) => Some(p.year),
            Indicator::Foster(p) => Some(p.year),
            Indicator::Wang(p) => Some(p.year),
            Indicator::Shibayama { year, .. } => Some(*year),
            Indicator::Disruption { year, .. } => *year,
        }
    }

    pub fn fingerprint(&self) -> String {
        match self {
            Indicator::Uzzi(p) => p.fingerprint(),
            Indicator::Lee(_) => String::new(),
            Indicator::Foster(p) => p.fingerprint(),
            Indicator::Wang(p) => p.fingerprint(),
            Indicator::Shibayama { params, .. } => params.fingerprint(),
            Indicator::Disruption { measures, .. } => measures_fingerprint(measures),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Indicator::Uzzi(p) => Some(p.seed),
            Indicator::Foster(p) => Some(p.seed),
            _ => None,
        }
    }

    /// Conventional output file name, `<indicator>_<entity>_<year>.jsonl`.
    pub fn file_name(&self) -> String {
        let year = self
            .year()
            .map_or_else(|| "all".to_string(), |y| y.to_string());
        format!("{}_{}_{}.jsonl", self.name(), self.entity(), year)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub records: Vec<ScoreRecord>,
    /// Documents in scope that received no record although they have at
    /// least one pair or reference (for instance all pairs degenerate).
    pub skipped: Vec<String>,
    pub warnings: Vec<String>,
}

/// Runs `indicator`; `embeddings` is required for the semantic indicator.
pub fn run_indicator(
    store: &CorpusStore,
    embeddings: Option<&EmbeddingStore>,
    indicator: &Indicator,
) -> Result<RunOutput> {
    let out = match indicator {
        Indicator::Uzzi(p) => {
            let o = uzzi_scores(store, p)?;
            RunOutput {
                records: o.records,
                skipped: o.skipped,
                warnings: Vec::new(),
            }
        }
        Indicator::Lee(p) => RunOutput {
            records: lee_commonness(store, p)?.records,
            ..Default::default()
        },
        Indicator::Foster(p) => RunOutput {
            records: foster_bridging(store, p)?.records,
            ..Default::default()
        },
        Indicator::Wang(p) => {
            let o = wang_novelty(store, p)?;
            RunOutput {
                records: o.records,
                skipped: Vec::new(),
                warnings: o.warnings,
            }
        }
        Indicator::Shibayama { year, params } => {
            let emb = embeddings
                .ok_or_else(|| Error::InvalidParams("shibayama needs an embeddings file".into()))?;
            let o = shibayama_year(store, emb, *year, params)?;
            RunOutput {
                records: o.records,
                skipped: o.skipped,
                warnings: Vec::new(),
            }
        }
        Indicator::Disruption { year, measures } => {
            let graph = CitationGraph::build(store);
            let o = disruption_corpus(store, &graph, *year, measures)?;
            let mut warnings = Vec::new();
            if graph.self_citations_dropped() > 0 {
                warnings.push(format!(
                    "{} self-citations dropped",
                    graph.self_citations_dropped()
                ));
            }
            RunOutput {
                records: o.records,
                skipped: Vec::new(),
                warnings,
            }
        }
    };
    Ok(out)
}

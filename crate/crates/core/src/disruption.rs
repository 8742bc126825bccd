// SPDX-License-Identifier: Apache-2.0

//! Citation-based disruption: the I/J/K citer classification, disruption
//! indices with and without the `K` term, and depth, breadth, dependence and
//! independence.
//!
//! `In_d` are the in-corpus documents `d` cites and `Out_d` the documents
//! citing `d`. For a focal document FP, a citer belongs to `J^l` when it
//! shares at least `l` references with FP and to `I` (relative to `l`)
//! otherwise. `K` holds the documents that cite some reference of FP without
//! citing FP itself.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::CorpusStore;
use crate::error::{Error, Result};
use crate::graph::CitationGraph;
use crate::score::{fingerprint, ScoreRecord};

/// One requested output column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Measure {
    Di(u32),
    DiNok(u32),
    Depth,
    Breadth,
    Dependence,
    Independence,
}

impl Measure {
    /// Every measure the CLI offers by default.
    pub const DEFAULT: [Measure; 8] = [
        Measure::Di(1),
        Measure::Di(5),
        Measure::DiNok(1),
        Measure::DiNok(5),
        Measure::Depth,
        Measure::Breadth,
        Measure::Dependence,
        Measure::Independence,
    ];

    pub fn name(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Di(l) => write!(f, "di{l}"),
            Measure::DiNok(l) => write!(f, "dinok{l}"),
            Measure::Depth => f.write_str("depth"),
            Measure::Breadth => f.write_str("breadth"),
            Measure::Dependence => f.write_str("dependence"),
            Measure::Independence => f.write_str("independence"),
        }
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        let level = |rest: &str| -> std::result::Result<u32, String> {
            match rest.parse::<u32>() {
                Ok(l) if l >= 1 => Ok(l),
                _ => Err(format!("bad threshold in measure `{s}`")),
            }
        };
        match s.as_str() {
            "depth" => Ok(Measure::Depth),
            "breadth" => Ok(Measure::Breadth),
            "dependence" => Ok(Measure::Dependence),
            "independence" => Ok(Measure::Independence),
            _ => {
                if let Some(rest) = s.strip_prefix("dinok") {
                    level(rest).map(Measure::DiNok)
                } else if let Some(rest) = s.strip_prefix("di") {
                    level(rest).map(Measure::Di)
                } else {
                    Err(format!("unknown measure `{s}`"))
                }
            }
        }
    }
}

/// Parses a comma-separated measure list, removing duplicates and keeping
/// the first occurrence order.
pub fn parse_measures(list: &str) -> Result<Vec<Measure>> {
    let mut out = Vec::new();
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        let m: Measure = part.parse().map_err(Error::InvalidParams)?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidParams(
            "no disruption measure requested".into(),
        ));
    }
    Ok(out)
}

/// Thresholds `l` needed to compute `measures`.
pub fn required_levels(measures: &[Measure]) -> Vec<u32> {
    let mut levels = BTreeSet::new();
    for m in measures {
        match m {
            Measure::Di(l) | Measure::DiNok(l) => {
                levels.insert(*l);
            }
            Measure::Independence => {
                levels.insert(1);
            }
            _ => {}
        }
    }
    levels.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CiterClassification {
    pub doc_id: String,
    /// `|Out_FP|`.
    pub citer_count: u64,
    /// `|In_FP|`, in-corpus references only.
    pub ref_count: u64,
    /// `|I|` relative to each threshold.
    pub i_counts: BTreeMap<u32, u64>,
    /// `|J^l|` for each threshold.
    pub j_counts: BTreeMap<u32, u64>,
    pub k_count: u64,
    /// `Σ_{c ∈ Out_FP} |In_c ∩ In_FP|`.
    pub shared_ref_total: u64,
    /// Citers that also cite another citer of FP.
    pub deep_citers: u64,
}

/// Reusable marking buffers; a mark equal to `fp + 1` means "set for FP".
struct Scratch {
    in_fp: Vec<u32>,
    out_fp: Vec<u32>,
    k: Vec<u32>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            in_fp: vec![0; n],
            out_fp: vec![0; n],
            k: vec![0; n],
        }
    }
}

fn classify_with(
    graph: &CitationGraph,
    fp: u32,
    levels: &[u32],
    scratch: &mut Scratch,
) -> CiterClassification {
    let stamp = fp + 1;
    let refs = graph.refs(fp);
    let citers = graph.citers(fp);
    for &r in refs {
        scratch.in_fp[r as usize] = stamp;
    }
    for &c in citers {
        scratch.out_fp[c as usize] = stamp;
    }

    let mut j_counts: BTreeMap<u32, u64> = levels.iter().map(|&l| (l, 0)).collect();
    let mut shared_ref_total = 0u64;
    let mut deep_citers = 0u64;
    for &c in citers {
        let mut shared = 0u64;
        let mut deep = false;
        for &r in graph.refs(c) {
            if scratch.in_fp[r as usize] == stamp {
                shared += 1;
            }
            if scratch.out_fp[r as usize] == stamp {
                deep = true;
            }
        }
        shared_ref_total += shared;
        deep_citers += deep as u64;
        for (&l, j) in j_counts.iter_mut() {
            if shared >= l as u64 {
                *j += 1;
            }
        }
    }

    let mut k_count = 0u64;
    for &r in refs {
        for &v in graph.citers(r) {
            let vi = v as usize;
            if v == fp || scratch.out_fp[vi] == stamp || scratch.k[vi] == stamp {
                continue;
            }
            scratch.k[vi] = stamp;
            k_count += 1;
        }
    }

    let citer_count = citers.len() as u64;
    CiterClassification {
        doc_id: graph.id(fp).to_string(),
        citer_count,
        ref_count: refs.len() as u64,
        i_counts: j_counts
            .iter()
            .map(|(&l, &j)| (l, citer_count - j))
            .collect(),
        j_counts,
        k_count,
        shared_ref_total,
        deep_citers,
    }
}

/// Classifies the citers of the document `fp_id`.
pub fn classify_citers(
    graph: &CitationGraph,
    fp_id: &str,
    levels: &[u32],
) -> Result<CiterClassification> {
    let fp = graph
        .index_of(fp_id)
        .ok_or_else(|| Error::UnknownDocument(fp_id.to_string()))?;
    Ok(classify_with(
        graph,
        fp,
        levels,
        &mut Scratch::new(graph.node_count()),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisruptionRecord {
    pub doc_id: String,
    pub classification: CiterClassification,
    /// `DI_l` including `K`; `None` when `|I| + |J^l| + |K| = 0`.
    pub di: BTreeMap<u32, Option<f64>>,
    /// `DI_l^nok`; `None` without citers.
    pub di_nok: BTreeMap<u32, Option<f64>>,
    pub depth: Option<f64>,
    pub breadth: Option<f64>,
    pub dependence: Option<f64>,
    /// `(DI_1^nok + 1) / 2`; present when threshold 1 was classified.
    pub independence: Option<f64>,
}

impl DisruptionRecord {
    pub fn from_classification(c: CiterClassification) -> Self {
        let citers = c.citer_count as f64;
        let mut di = BTreeMap::new();
        let mut di_nok = BTreeMap::new();
        for (&l, &j) in &c.j_counts {
            let i = c.i_counts[&l];
            let diff = i as f64 - j as f64;
            let with_k = i + j + c.k_count;
            di.insert(l, (with_k > 0).then(|| diff / with_k as f64));
            di_nok.insert(l, (c.citer_count > 0).then(|| diff / citers));
        }
        let has_citers = c.citer_count > 0;
        let depth = has_citers.then(|| c.deep_citers as f64 / citers);
        Self {
            doc_id: c.doc_id.clone(),
            di,
            independence: di_nok.get(&1).copied().flatten().map(|d| (d + 1.0) / 2.0),
            di_nok,
            depth,
            breadth: depth.map(|d| 1.0 - d),
            dependence: has_citers.then(|| c.shared_ref_total as f64 / citers),
            classification: c,
        }
    }

    pub fn measure(&self, m: Measure) -> Option<f64> {
        match m {
            Measure::Di(l) => self.di.get(&l).copied().flatten(),
            Measure::DiNok(l) => self.di_nok.get(&l).copied().flatten(),
            Measure::Depth => self.depth,
            Measure::Breadth => self.breadth,
            Measure::Dependence => self.dependence,
            Measure::Independence => self.independence,
        }
    }

    /// Flattens to the shared score record, keeping only `measures`.
    pub fn to_score_record(
        &self,
        year: i32,
        measures: &[Measure],
        resolved: u32,
        total: u32,
    ) -> ScoreRecord {
        let c = &self.classification;
        let mut rec = ScoreRecord::new(
            &self.doc_id,
            year,
            "disruption",
            "citations",
            &measures_fingerprint(measures),
        );
        for &m in measures {
            rec = rec.score(&m.name(), self.measure(m));
        }
        rec = rec
            .count("citers", c.citer_count)
            .count("refs", c.ref_count)
            .count("k", c.k_count)
            .count("shared_refs", c.shared_ref_total)
            .count("resolved_refs", resolved as u64)
            .count("total_refs", total as u64);
        for (&l, &j) in &c.j_counts {
            rec = rec
                .count(&format!("i{l}"), c.i_counts[&l])
                .count(&format!("j{l}"), j);
        }
        rec
    }
}

pub fn measures_fingerprint(measures: &[Measure]) -> String {
    let names: Vec<String> = measures.iter().map(|m| m.name()).collect();
    fingerprint(&[("measures", names.join("+"))])
}

/// Scores one document.
pub fn disruption_scores(
    graph: &CitationGraph,
    fp_id: &str,
    levels: &[u32],
) -> Result<DisruptionRecord> {
    classify_citers(graph, fp_id, levels).map(DisruptionRecord::from_classification)
}

#[derive(Debug, Clone)]
pub struct DisruptionOutput {
    pub records: Vec<ScoreRecord>,
    /// Scored documents without any citer (every measure undefined).
    pub uncited: usize,
}

/// Scores every document of `year` (or of the whole corpus) against the full
/// in-corpus citation graph, in store order.
pub fn disruption_corpus(
    store: &CorpusStore,
    graph: &CitationGraph,
    year: Option<i32>,
    measures: &[Measure],
) -> Result<DisruptionOutput> {
    if measures.is_empty() {
        return Err(Error::InvalidParams(
            "no disruption measure requested".into(),
        ));
    }
    let focal: Vec<u32> = match year {
        Some(y) => store
            .docs_in_year(y)
            .iter()
            .map(|d| graph.index_of(&d.id).expect("graph built from store"))
            .collect(),
        None => (0..graph.node_count() as u32).collect(),
    };
    if focal.is_empty() {
        return Err(Error::NoDocuments(match year {
            Some(y) => format!("year {y}"),
            None => "empty corpus".into(),
        }));
    }
    let levels = required_levels(measures);
    let n = graph.node_count();
    let docs = store.documents();
    let records: Vec<ScoreRecord> = focal
        .par_iter()
        .map_init(
            || Scratch::new(n),
            |scratch, &fp| {
                let rec = DisruptionRecord::from_classification(classify_with(
                    graph, fp, &levels, scratch,
                ));
                rec.to_score_record(
                    docs[fp as usize].year,
                    measures,
                    graph.resolved_ref_count(fp),
                    graph.total_ref_count(fp),
                )
            },
        )
        .collect();
    let uncited = records.iter().filter(|r| r.counts["citers"] == 0).count();
    Ok(DisruptionOutput { records, uncited })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DocumentRecord, IngestOptions, Provenance, ReferenceEntry};

    pub(crate) fn doc(id: &str, year: i32, refs: &[&str]) -> DocumentRecord {
        DocumentRecord {
            id: id.into(),
            year,
            references: refs
                .iter()
                .map(|r| ReferenceEntry {
                    ref_id: Some(r.to_string()),
                    source: None,
                    year: None,
                })
                .collect(),
            keywords: vec![],
            title_vector_id: None,
            abstract_vector_id: None,
        }
    }

    fn graph(docs: Vec<DocumentRecord>) -> (CorpusStore, CitationGraph) {
        let prov = Provenance {
            input_digest: String::new(),
            options: IngestOptions::default(),
        };
        let store = CorpusStore::from_documents(docs, prov).0;
        let g = CitationGraph::build(&store);
        (store, g)
    }

    fn toy() -> (CorpusStore, CitationGraph) {
        graph(vec![
            doc("R1", 1990, &[]),
            doc("R2", 1990, &[]),
            doc("FP", 2000, &["R1", "R2"]),
            doc("C1", 2001, &["FP"]),
            doc("C2", 2001, &["FP", "R1"]),
            doc("C3", 2001, &["R2"]),
        ])
    }

    #[test]
    fn toy_classification() {
        let (_, g) = toy();
        let c = classify_citers(&g, "FP", &[1]).unwrap();
        assert_eq!(c.i_counts[&1], 1);
        assert_eq!(c.j_counts[&1], 1);
        assert_eq!(c.k_count, 1);
        assert_eq!(c.shared_ref_total, 1);
        assert_eq!(c.citer_count, 2);
    }

    #[test]
    fn toy_scores() {
        let (_, g) = toy();
        let r = disruption_scores(&g, "FP", &[1]).unwrap();
        assert_eq!(r.di[&1], Some(0.0));
        assert_eq!(r.di_nok[&1], Some(0.0));
        assert_eq!(r.depth, Some(0.0));
        assert_eq!(r.breadth, Some(1.0));
        assert_eq!(r.dependence, Some(0.5));
        assert_eq!(r.independence, Some(0.5));
    }

    #[test]
    fn unknown_document() {
        let (_, g) = toy();
        assert!(matches!(
            classify_citers(&g, "nope", &[1]),
            Err(Error::UnknownDocument(_))
        ));
    }

    #[test]
    fn no_references_puts_every_citer_in_i() {
        let (_, g) = graph(vec![
            doc("FP", 2000, &[]),
            doc("C1", 2001, &["FP"]),
            doc("C2", 2001, &["FP"]),
        ]);
        let r = disruption_scores(&g, "FP", &[1]).unwrap();
        assert_eq!(r.classification.i_counts[&1], 2);
        assert_eq!(r.classification.k_count, 0);
        assert_eq!(r.di[&1], Some(1.0));
    }

    #[test]
    fn uncited_document_is_undefined() {
        let (_, g) = graph(vec![
            doc("R", 1990, &[]),
            doc("FP", 2000, &["R"]),
            doc("X", 2001, &["R"]),
        ]);
        let r = disruption_scores(&g, "FP", &[1, 5]).unwrap();
        assert_eq!(r.classification.k_count, 1);
        assert_eq!(r.di[&1], Some(0.0));
        assert_eq!(r.di_nok[&1], None);
        assert_eq!(
            (r.depth, r.breadth, r.dependence, r.independence),
            (None, None, None, None)
        );

        let (_, g) = graph(vec![doc("FP", 2000, &[])]);
        let r = disruption_scores(&g, "FP", &[1]).unwrap();
        assert_eq!(r.di[&1], None);
    }

    #[test]
    fn full_consolidation() {
        let (_, g) = graph(vec![
            doc("R", 1990, &[]),
            doc("FP", 2000, &["R"]),
            doc("C1", 2001, &["FP", "R"]),
            doc("C2", 2001, &["FP", "R"]),
        ]);
        let r = disruption_scores(&g, "FP", &[1]).unwrap();
        assert_eq!(r.di[&1], Some(-1.0));
        assert_eq!(r.independence, Some(0.0));
    }

    #[test]
    fn higher_threshold_moves_citers_to_i() {
        let (_, g) = graph(vec![
            doc("R1", 1990, &[]),
            doc("R2", 1990, &[]),
            doc("FP", 2000, &["R1", "R2"]),
            doc("C1", 2001, &["FP", "R1"]),
            doc("C2", 2001, &["FP", "R1", "R2"]),
        ]);
        let c = classify_citers(&g, "FP", &[1, 2, 3]).unwrap();
        assert_eq!(
            c.j_counts.values().copied().collect::<Vec<_>>(),
            vec![2, 1, 0]
        );
        assert_eq!(
            c.i_counts.values().copied().collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn depth_counts_citers_citing_citers() {
        let (_, g) = graph(vec![
            doc("FP", 2000, &[]),
            doc("C1", 2001, &["FP"]),
            doc("C2", 2002, &["FP", "C1"]),
        ]);
        let r = disruption_scores(&g, "FP", &[1]).unwrap();
        assert_eq!(r.depth, Some(0.5));
        assert_eq!(r.breadth, Some(0.5));
    }

    #[test]
    fn k_term_pulls_negative_index_toward_zero() {
        let base = vec![
            doc("R", 1990, &[]),
            doc("FP", 2000, &["R"]),
            doc("C1", 2001, &["FP", "R"]),
        ];
        let (_, g) = graph(base.clone());
        let before = disruption_scores(&g, "FP", &[1]).unwrap().di[&1].unwrap();
        let mut more = base;
        more.push(doc("K1", 2001, &["R"]));
        let (_, g) = graph(more);
        let after = disruption_scores(&g, "FP", &[1]).unwrap().di[&1].unwrap();
        assert!(before < after && after < 0.0);
    }

    #[test]
    fn measure_parsing() {
        let ms =
            parse_measures("di1,di5,dinok1,dinok5,depth,breadth,dependence,independence").unwrap();
        assert_eq!(ms, Measure::DEFAULT.to_vec());
        assert_eq!(required_levels(&ms), vec![1, 5]);
        assert!(parse_measures("di0").is_err());
        assert!(parse_measures("foo").is_err());
        assert!(parse_measures("").is_err());
        assert_eq!(required_levels(&[Measure::Independence]), vec![1]);
    }

    #[test]
    fn corpus_scoring_by_year() {
        let (s, g) = toy();
        let out = disruption_corpus(&s, &g, Some(2000), &Measure::DEFAULT).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert_eq!(r.get("di1"), Some(0.0));
        assert_eq!(r.get("dependence"), Some(0.5));
        assert_eq!(r.counts["i1"] + r.counts["j1"], r.counts["citers"]);
        let all = disruption_corpus(&s, &g, None, &Measure::DEFAULT).unwrap();
        assert_eq!(all.records.len(), 6);
        assert_eq!(all.uncited, 3);
        assert!(matches!(
            disruption_corpus(&s, &g, Some(1800), &Measure::DEFAULT),
            Err(Error::NoDocuments(_))
        ));
    }
}

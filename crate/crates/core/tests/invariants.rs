// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use scinov_core::corpus::{CorpusStore, DocumentRecord, IngestOptions, Provenance};
use scinov_core::disruption::{disruption_corpus, Measure};
use scinov_core::graph::CitationGraph;
use scinov_core::graph::{build_cooc_graph, window_graph};
use scinov_core::novelty::{
    foster_bridging, lee_commonness, wang_novelty, FosterParams, LeeParams, WangParams,
};
use scinov_core::resampling::{build_plan, draw_sample};
use scinov_core::semantic::cosine_distance;
use scinov_core::synth::{synth_corpus, SynthParams};
use scinov_core::EntityKind;

fn docs(n_docs: usize, n_entities: usize, seed: u64) -> Vec<DocumentRecord> {
    synth_corpus(&SynthParams {
        n_docs,
        n_entities,
        years: (2000, 2006),
        communities: 3,
        mean_refs: 6,
        embedding_dim: 0,
        seed,
        ..Default::default()
    })
    .unwrap()
    .documents
}

fn store(docs: Vec<DocumentRecord>) -> CorpusStore {
    let prov = Provenance {
        input_digest: "prop".into(),
        options: IngestOptions::default(),
    };
    CorpusStore::from_documents(docs, prov).0
}

fn corpus_args() -> impl Strategy<Value = (usize, usize, u64)> {
    (30usize..150, 3usize..15, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn handshake(args in corpus_args()) {
        let s = store(docs(args.0, args.1, args.2));
        for kind in [EntityKind::Journals, EntityKind::Keywords] {
            let g = window_graph(&s, kind, 2000, 2006);
            let sum: u64 = g.degrees().iter().sum();
            prop_assert_eq!(sum, 2 * g.total_weight());
            let edge_sum: u64 = g.edges().map(|(_, _, w)| w as u64).sum();
            prop_assert_eq!(edge_sum, g.total_weight());
        }
    }

    #[test]
    fn document_order_does_not_matter(args in corpus_args(), rot in 0usize..1000) {
        let d = docs(args.0, args.1, args.2);
        let mut shuffled = d.clone();
        shuffled.reverse();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        let (a, b) = (store(d), store(shuffled));
        let lee = |s: &CorpusStore| lee_commonness(s, &LeeParams { entity: EntityKind::Journals, year: 2003 })
            .map(|o| o.records);
        prop_assert_eq!(lee(&a).ok(), lee(&b).ok());
        let dis = |s: &CorpusStore| disruption_corpus(s, &CitationGraph::build(s), None, &Measure::DEFAULT).unwrap().records;
        prop_assert_eq!(dis(&a), dis(&b));
        let g = |s: &CorpusStore| build_cooc_graph(&s.docs_in_year(2004), EntityKind::Keywords);
        prop_assert_eq!(g(&a), g(&b));
    }

    #[test]
    fn citation_duality(args in corpus_args()) {
        let s = store(docs(args.0, args.1, args.2));
        let g = CitationGraph::build(&s);
        let mut forward = 0;
        for d in 0..g.node_count() as u32 {
            forward += g.refs(d).len();
            for &r in g.refs(d) {
                prop_assert!(g.citers(r).binary_search(&d).is_ok());
            }
        }
        let backward: usize = (0..g.node_count() as u32).map(|d| g.citers(d).len()).sum();
        prop_assert_eq!(forward, backward);
        prop_assert_eq!(forward, g.edge_count());
    }

    #[test]
    fn resampling_conserves_labels(args in corpus_args(), sample in 0usize..5) {
        let s = store(docs(args.0, args.1, args.2));
        let year_docs = s.docs_in_year(2004);
        prop_assume!(!year_docs.is_empty());
        let plan = build_plan(&year_docs, EntityKind::Journals, 5, args.2).unwrap();
        let observed = plan.observed();
        let drawn = draw_sample(&plan, sample);
        // Every document keeps its reference count.
        for (o, d) in observed.iter().zip(&drawn) {
            prop_assert_eq!(o.len(), d.len());
        }
        // Every stratum keeps its label multiset.
        for (stratum, labels) in plan.strata.iter().zip(plan.shuffled_strata(sample)) {
            let mut a = stratum.labels.clone();
            let mut b = labels;
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn disruption_bounds_and_monotone_threshold(args in corpus_args()) {
        let s = store(docs(args.0, args.1, args.2));
        let measures: Vec<Measure> = (1..=4).flat_map(|l| [Measure::Di(l), Measure::DiNok(l)])
            .chain([Measure::Depth, Measure::Breadth, Measure::Dependence, Measure::Independence])
            .collect();
        let out = disruption_corpus(&s, &CitationGraph::build(&s), None, &measures).unwrap();
        for r in &out.records {
            for m in &measures {
                if let Some(v) = r.get(&m.name()) {
                    match m {
                        Measure::Di(_) | Measure::DiNok(_) => prop_assert!((-1.0..=1.0).contains(&v)),
                        Measure::Dependence => prop_assert!(v >= 0.0),
                        _ => prop_assert!((0.0..=1.0).contains(&v)),
                    }
                }
            }
            if let (Some(d), Some(b)) = (r.get("depth"), r.get("breadth")) {
                prop_assert!((d + b - 1.0).abs() < 1e-12);
            }
            let nok: Vec<Option<f64>> = (1..=4).map(|l| r.get(&format!("dinok{l}"))).collect();
            for w in nok.windows(2) {
                if let (Some(a), Some(b)) = (w[0], w[1]) {
                    prop_assert!(a <= b + 1e-12, "{} {:?}", r.doc_id, nok);
                }
            }
        }
    }

    #[test]
    fn lee_and_foster_bounds(args in corpus_args()) {
        let s = store(docs(args.0, args.1, args.2));
        if let Ok(out) = lee_commonness(&s, &LeeParams { entity: EntityKind::Journals, year: 2005 }) {
            for r in &out.records {
                let dist = r.distribution.as_ref().unwrap();
                prop_assert!(dist.iter().all(|&c| c > 0.0 && c.is_finite()));
                let p10 = (-r.get("commonness").unwrap()).exp();
                prop_assert!(p10 >= dist[0] * (1.0 - 1e-12) && p10 <= dist[dist.len() - 1] * (1.0 + 1e-12));
            }
        }
        if let Ok(out) = foster_bridging(&s, &FosterParams::new(EntityKind::Journals, 2005)) {
            for r in &out.records {
                let v = r.get("novelty").unwrap();
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn wang_monotone_in_forward_window(args in corpus_args()) {
        let s = store(docs(args.0, args.1, args.2));
        let run = |f: u32| wang_novelty(&s, &WangParams { forward: f, ..WangParams::new(EntityKind::Journals, 2003) })
            .map(|o| o.records.into_iter().map(|r| (r.doc_id.clone(), r.get("novelty").unwrap())).collect::<Vec<_>>());
        if let (Ok(short), Ok(long)) = (run(1), run(3)) {
            prop_assert_eq!(short.len(), long.len());
            for ((da, a), (db, b)) in short.iter().zip(&long) {
                prop_assert_eq!(da, db);
                prop_assert!(*a <= *b + 1e-12);
                prop_assert!(*a >= 0.0);
            }
        }
    }

    #[test]
    fn cosine_distance_bounds(u in prop::collection::vec(-10.0f64..10.0, 1..8), scale in 0.1f64..10.0) {
        let v: Vec<f64> = u.iter().map(|x| x * scale).collect();
        let d = cosine_distance(&u, &v).unwrap();
        prop_assert!((0.0..=2.0).contains(&d));
        let w: Vec<f64> = u.iter().map(|x| -x).collect();
        let e = cosine_distance(&u, &w).unwrap();
        prop_assert!((0.0..=2.0).contains(&e));
        if u.iter().any(|x| *x != 0.0) {
            prop_assert!(d < 1e-12);
            prop_assert!((e - 2.0).abs() < 1e-12);
        }
    }
}

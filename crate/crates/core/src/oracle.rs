// SPDX-License-Identifier: Apache-2.0

//! Slow, dense reference implementations of every indicator.
//!
//! Everything here is written from the formulas with full matrices and
//! all-pairs loops, single-threaded, and shares nothing with the engine except
//! the corpus parser and, for sampled atypicality, the seeded shuffles (so
//! that sampled statistics are comparable draw for draw). It exists to be
//! diffed against the engine on small corpora.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::corpus::{CorpusStore, DocumentRecord};
use crate::disruption::Measure;
use crate::error::{Error, Result};
use crate::graph::EntityKind;
use crate::pipeline::Indicator;
use crate::resampling::{build_plan, draw_sample};
use crate::score::ScoreRecord;
use crate::semantic::{EmbeddingStore, TextField};

pub const DEFAULT_SIZE_GUARD: usize = 500;

/// Largest number of joint stratum permutations enumerated exhaustively.
pub const MAX_ENUMERATION: u128 = 1_000_000;

pub type DocScores = BTreeMap<String, Option<f64>>;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OracleResult {
    pub indicator: String,
    pub scores: BTreeMap<String, DocScores>,
    /// Intermediate tables, keyed by name, for failure reports.
    pub artifacts: BTreeMap<String, serde_json::Value>,
}

/// How the atypicality oracle obtains its null distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NullModel {
    /// Replays the engine's seeded shuffles.
    Sampled,
    /// Enumerates every joint permutation of the strata.
    Exhaustive,
}

pub fn oracle_score(
    indicator: &Indicator,
    store: &CorpusStore,
    embeddings: Option<&EmbeddingStore>,
    size_guard: usize,
) -> Result<OracleResult> {
    if store.len() > size_guard {
        return Err(Error::CorpusTooLarge {
            found: store.len(),
            limit: size_guard,
        });
    }
    let mut result = OracleResult {
        indicator: indicator.name().to_string(),
        ..Default::default()
    };
    if store.is_empty() {
        return Ok(result);
    }
    match indicator {
        Indicator::Uzzi(p) => {
            let null = NullModel::Sampled;
            uzzi(
                store,
                p.entity,
                p.year,
                null,
                p.samples,
                p.seed,
                &mut result,
            )?
        }
        Indicator::Lee(p) => lee(store, p.entity, p.year, &mut result)?,
        Indicator::Foster(p) => foster(store, p.entity, p.year, p.resolution, &mut result)?,
        Indicator::Wang(p) => wang(
            store,
            p.entity,
            p.year,
            p.backward as i32,
            p.forward as i32,
            p.reuse_threshold,
            &mut result,
        )?,
        Indicator::Shibayama { year, params } => {
            let emb = embeddings
                .ok_or_else(|| Error::InvalidParams("shibayama needs an embeddings file".into()))?;
            shibayama(
                store,
                emb,
                *year,
                params.field,
                params.percentile,
                &mut result,
            )?
        }
        Indicator::Disruption { year, measures } => {
            disruption(store, *year, measures, &mut result)?
        }
    }
    Ok(result)
}

/// Linear-interpolation percentile, written independently of the engine.
pub fn naive_percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (v.len() - 1) as f64 * q / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

fn entity_set(doc: &DocumentRecord, kind: EntityKind) -> BTreeSet<String> {
    match kind {
        EntityKind::Journals => doc
            .references
            .iter()
            .filter_map(|r| r.source.clone())
            .collect(),
        EntityKind::Keywords => doc.keywords.iter().cloned().collect(),
    }
}

/// Dense symmetric co-occurrence matrix over a fixed entity list.
#[derive(Debug, Clone)]
struct Dense {
    names: Vec<String>,
    w: Vec<Vec<u64>>,
}

impl Dense {
    fn new(names: Vec<String>) -> Self {
        let n = names.len();
        Self {
            names,
            w: vec![vec![0; n]; n],
        }
    }

    fn index(&self, name: &str) -> usize {
        self.names
            .iter()
            .position(|x| x == name)
            .expect("name in universe")
    }

    fn add_docs<'a>(&mut self, docs: impl Iterator<Item = &'a DocumentRecord>, kind: EntityKind) {
        for d in docs {
            let ids: Vec<usize> = entity_set(d, kind).iter().map(|e| self.index(e)).collect();
            for a in 0..ids.len() {
                for b in 0..ids.len() {
                    if a != b {
                        self.w[ids[a]][ids[b]] += 1;
                    }
                }
            }
        }
    }

    fn degree(&self, i: usize) -> u64 {
        self.w[i].iter().sum()
    }

    fn total(&self) -> u64 {
        let mut t = 0;
        for i in 0..self.names.len() {
            for j in i + 1..self.names.len() {
                t += self.w[i][j];
            }
        }
        t
    }
}

fn universe<'a>(docs: impl Iterator<Item = &'a DocumentRecord>, kind: EntityKind) -> Vec<String> {
    let mut all = BTreeSet::new();
    for d in docs {
        all.extend(entity_set(d, kind));
    }
    all.into_iter().collect()
}

fn year_docs(store: &CorpusStore, year: i32) -> Vec<&DocumentRecord> {
    store
        .documents()
        .iter()
        .filter(|d| d.year == year)
        .collect()
}

/// Distinct pairs of a document as sorted name pairs.
fn name_pairs(doc: &DocumentRecord, kind: EntityKind) -> Vec<(String, String)> {
    let set: Vec<String> = entity_set(doc, kind).into_iter().collect();
    let mut out = Vec::new();
    for a in 0..set.len() {
        for b in a + 1..set.len() {
            out.push((set[a].clone(), set[b].clone()));
        }
    }
    out
}

fn lee(store: &CorpusStore, kind: EntityKind, year: i32, out: &mut OracleResult) -> Result<()> {
    let docs = year_docs(store, year);
    if docs.is_empty() {
        return Err(Error::NoDocuments(format!("year {year}")));
    }
    let mut g = Dense::new(universe(docs.iter().copied(), kind));
    g.add_docs(docs.iter().copied(), kind);
    let n = g.total() as f64;
    let c = |a: &str, b: &str| {
        let (i, j) = (g.index(a), g.index(b));
        g.w[i][j] as f64 * n / (g.degree(i) as f64 * g.degree(j) as f64)
    };
    let mut table = Vec::new();
    for (i, a) in g.names.iter().enumerate() {
        for (j, b) in g.names.iter().enumerate().skip(i + 1) {
            if g.w[i][j] > 0 {
                table.push((a.clone(), b.clone(), c(a, b)));
            }
        }
    }
    out.artifacts
        .insert("commonness".into(), serde_json::json!(table));
    for d in docs {
        let pairs = name_pairs(d, kind);
        if pairs.is_empty() {
            continue;
        }
        let values: Vec<f64> = pairs.iter().map(|(a, b)| c(a, b)).collect();
        let score = -naive_percentile(&values, 10.0).ln();
        out.scores.insert(
            d.id.clone(),
            BTreeMap::from([("commonness".into(), Some(score))]),
        );
    }
    Ok(())
}

/// Per-edge mean and population standard deviation of a null model, over
/// the focal year's observed edges, keyed by sorted name pair.
pub type NullStats = BTreeMap<(String, String), (f64, f64)>;

/// Joint permutation count of the focal year's strata, `Π n_k!`, saturating
/// at `u128::MAX`.
pub fn permutation_count(store: &CorpusStore, kind: EntityKind, year: i32) -> u128 {
    strata(&year_docs(store, year), kind)
        .iter()
        .map(|(_, occ)| (1..=occ.len() as u128).fold(1u128, |acc, x| acc.saturating_mul(x)))
        .fold(1u128, |acc, x| acc.saturating_mul(x))
}

/// `(stratum year, [(doc position, entity)])`, ordered by year with unknown first.
type Strata = Vec<(Option<i32>, Vec<(usize, String)>)>;

fn strata(docs: &[&DocumentRecord], kind: EntityKind) -> Strata {
    let mut map: BTreeMap<Option<i32>, Vec<(usize, String)>> = BTreeMap::new();
    for (p, d) in docs.iter().enumerate() {
        match kind {
            EntityKind::Journals => {
                for r in &d.references {
                    if let Some(s) = &r.source {
                        map.entry(r.year).or_default().push((p, s.clone()));
                    }
                }
            }
            EntityKind::Keywords => {
                for k in &d.keywords {
                    map.entry(None).or_default().push((p, k.clone()));
                }
            }
        }
    }
    map.into_iter().collect()
}

fn all_permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut tail in all_permutations(&rest) {
            tail.insert(0, first.clone());
            out.push(tail);
        }
    }
    out
}

/// Accumulates sum and sum of squares of each observed edge over null draws.
struct NullAccumulator<'a> {
    g: &'a Dense,
    sums: Vec<Vec<(u64, u64)>>,
    draws: u64,
}

impl<'a> NullAccumulator<'a> {
    fn new(g: &'a Dense) -> Self {
        let n = g.names.len();
        Self {
            g,
            sums: vec![vec![(0, 0); n]; n],
            draws: 0,
        }
    }

    #[allow(clippy::needless_range_loop)]
    fn add(&mut self, doc_labels: &[Vec<String>]) {
        let n = self.g.names.len();
        let mut w = vec![vec![0u64; n]; n];
        for labels in doc_labels {
            let set: BTreeSet<usize> = labels.iter().map(|l| self.g.index(l)).collect();
            let set: Vec<usize> = set.into_iter().collect();
            for a in 0..set.len() {
                for b in a + 1..set.len() {
                    w[set[a]][set[b]] += 1;
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                self.sums[i][j].0 += w[i][j];
                self.sums[i][j].1 += w[i][j] * w[i][j];
            }
        }
        self.draws += 1;
    }

    fn finish(&self) -> NullStats {
        let s = self.draws as f64;
        let mut out = BTreeMap::new();
        for i in 0..self.g.names.len() {
            for j in i + 1..self.g.names.len() {
                if self.g.w[i][j] == 0 {
                    continue;
                }
                let (sum, sumsq) = self.sums[i][j];
                let var_scaled = self.draws as u128 * sumsq as u128 - sum as u128 * sum as u128;
                let mean = sum as f64 / s;
                let std = (var_scaled as f64).sqrt() / s;
                out.insert(
                    (self.g.names[i].clone(), self.g.names[j].clone()),
                    (mean, std),
                );
            }
        }
        out
    }
}

/// Exact null statistics by enumerating every joint permutation of the
/// focal year's strata.
pub fn exhaustive_null(store: &CorpusStore, kind: EntityKind, year: i32) -> Result<NullStats> {
    let docs = year_docs(store, year);
    if docs.is_empty() {
        return Err(Error::NoDocuments(format!("year {year}")));
    }
    let total = permutation_count(store, kind, year);
    if total > MAX_ENUMERATION {
        return Err(Error::InvalidParams(format!(
            "{total} joint permutations exceed the enumeration limit {MAX_ENUMERATION}"
        )));
    }
    let mut g = Dense::new(universe(docs.iter().copied(), kind));
    g.add_docs(docs.iter().copied(), kind);
    let st = strata(&docs, kind);
    let perms: Vec<Vec<Vec<String>>> = st
        .iter()
        .map(|(_, occ)| all_permutations(&occ.iter().map(|o| o.1.clone()).collect::<Vec<_>>()))
        .collect();
    let mut acc = NullAccumulator::new(&g);
    let mut choice = vec![0usize; st.len()];
    loop {
        let mut labels = vec![Vec::new(); docs.len()];
        for (k, (_, occ)) in st.iter().enumerate() {
            for ((pos, _), label) in occ.iter().zip(&perms[k][choice[k]]) {
                labels[*pos].push(label.clone());
            }
        }
        acc.add(&labels);
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Ok(acc.finish());
            }
            choice[k] += 1;
            if choice[k] < perms[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Null statistics from the engine's seeded shuffles, recounted densely.
pub fn sampled_null(
    store: &CorpusStore,
    kind: EntityKind,
    year: i32,
    samples: usize,
    seed: u64,
) -> Result<NullStats> {
    let docs = year_docs(store, year);
    let plan = build_plan(&docs, kind, samples, seed)?;
    let mut g = Dense::new(universe(docs.iter().copied(), kind));
    g.add_docs(docs.iter().copied(), kind);
    let mut acc = NullAccumulator::new(&g);
    for k in 0..samples {
        let labels: Vec<Vec<String>> = draw_sample(&plan, k)
            .into_iter()
            .map(|ls| {
                ls.into_iter()
                    .map(|l| plan.entities[l as usize].clone())
                    .collect()
            })
            .collect();
        acc.add(&labels);
    }
    Ok(acc.finish())
}

fn uzzi(
    store: &CorpusStore,
    kind: EntityKind,
    year: i32,
    null: NullModel,
    samples: usize,
    seed: u64,
    out: &mut OracleResult,
) -> Result<()> {
    let docs = year_docs(store, year);
    let mut g = Dense::new(universe(docs.iter().copied(), kind));
    g.add_docs(docs.iter().copied(), kind);
    if g.total() == 0 {
        return Err(Error::NoDocuments(format!(
            "{year} with two distinct {kind}"
        )));
    }
    let stats = match null {
        NullModel::Sampled => sampled_null(store, kind, year, samples, seed)?,
        NullModel::Exhaustive => exhaustive_null(store, kind, year)?,
    };
    let mut z: BTreeMap<(String, String), Option<f64>> = BTreeMap::new();
    for (pair, &(mean, std)) in &stats {
        let obs = g.w[g.index(&pair.0)][g.index(&pair.1)] as f64;
        let value = if std > 0.0 {
            Some((obs - mean) / std)
        } else if obs == mean {
            Some(0.0)
        } else {
            None
        };
        z.insert(pair.clone(), value);
    }
    out.artifacts.insert(
        "null".into(),
        serde_json::json!(stats
            .iter()
            .map(|(k, v)| (k.0.clone(), k.1.clone(), v.0, v.1))
            .collect::<Vec<_>>()),
    );
    for d in docs {
        let values: Vec<f64> = name_pairs(d, kind)
            .into_iter()
            .filter_map(|p| z[&p])
            .collect();
        if values.is_empty() {
            continue;
        }
        out.scores.insert(
            d.id.clone(),
            BTreeMap::from([
                ("novelty".into(), Some(naive_percentile(&values, 10.0))),
                (
                    "conventionality".into(),
                    Some(naive_percentile(&values, 50.0)),
                ),
            ]),
        );
    }
    Ok(())
}

/// Atypicality with an explicit null model.
pub fn oracle_uzzi(
    store: &CorpusStore,
    kind: EntityKind,
    year: i32,
    null: NullModel,
    samples: usize,
    seed: u64,
) -> Result<OracleResult> {
    let mut out = OracleResult {
        indicator: "uzzi".into(),
        ..Default::default()
    };
    uzzi(store, kind, year, null, samples, seed, &mut out)?;
    Ok(out)
}

/// Louvain on a dense matrix with the engine's deterministic rules: index
/// sweep order, integer gains, stay on ties, lowest community id among
/// equal candidates, renumbering by first appearance.
pub fn dense_louvain(w: &[Vec<u64>], resolution: f64) -> Vec<u32> {
    let n = w.len();
    let two_m: u64 = w.iter().flatten().sum();
    let mut membership: Vec<usize> = (0..n).collect();
    if two_m == 0 {
        return membership.iter().map(|&c| c as u32).collect();
    }
    let mut a: Vec<Vec<u64>> = w.to_vec();
    loop {
        let size = a.len();
        let k: Vec<u64> = a.iter().map(|row| row.iter().sum()).collect();
        let mut comm: Vec<usize> = (0..size).collect();
        let mut any = false;
        loop {
            let mut moved = false;
            for i in 0..size {
                let current = comm[i];
                let mut tot = vec![0u64; size];
                for v in 0..size {
                    if v != i {
                        tot[comm[v]] += k[v];
                    }
                }
                let mut kin = vec![0u64; size];
                let mut candidates = BTreeSet::new();
                for j in 0..size {
                    if j != i && a[i][j] > 0 {
                        kin[comm[j]] += a[i][j];
                        candidates.insert(comm[j]);
                    }
                }
                let gain = |d: usize| {
                    (two_m as u128 * kin[d] as u128) as f64
                        - resolution * (tot[d] as u128 * k[i] as u128) as f64
                };
                let stay = gain(current);
                let mut best = current;
                let mut best_gain = stay;
                for &d in candidates.iter().filter(|&&d| d != current) {
                    let g = gain(d);
                    if g > best_gain {
                        best = d;
                        best_gain = g;
                    }
                }
                if best != current {
                    comm[i] = best;
                    moved = true;
                }
            }
            any |= moved;
            if !moved {
                break;
            }
        }
        if !any {
            break;
        }
        let mut map: HashMap<usize, usize> = HashMap::new();
        for &c in &comm {
            let next = map.len();
            map.entry(c).or_insert(next);
        }
        let count = map.len();
        for m in membership.iter_mut() {
            *m = map[&comm[*m]];
        }
        let mut agg = vec![vec![0u64; count]; count];
        for i in 0..size {
            for j in 0..size {
                agg[map[&comm[i]]][map[&comm[j]]] += a[i][j];
            }
        }
        a = agg;
    }
    let mut map: HashMap<usize, u32> = HashMap::new();
    membership
        .iter()
        .map(|&c| {
            let next = map.len() as u32;
            *map.entry(c).or_insert(next)
        })
        .collect()
}

fn foster(
    store: &CorpusStore,
    kind: EntityKind,
    year: i32,
    resolution: f64,
    out: &mut OracleResult,
) -> Result<()> {
    let docs = year_docs(store, year);
    if docs.is_empty() {
        return Err(Error::NoDocuments(format!("year {year}")));
    }
    let upto: Vec<&DocumentRecord> = store
        .documents()
        .iter()
        .filter(|d| d.year <= year)
        .collect();
    let mut g = Dense::new(universe(upto.iter().copied(), kind));
    if g.names.is_empty() {
        return Err(Error::EmptyGraph);
    }
    g.add_docs(upto.iter().copied(), kind);
    let membership = dense_louvain(&g.w, resolution);
    out.artifacts.insert(
        "membership".into(),
        serde_json::json!(g.names.iter().zip(&membership).collect::<Vec<_>>()),
    );
    for d in docs {
        let pairs = name_pairs(d, kind);
        if pairs.is_empty() {
            continue;
        }
        let across = pairs
            .iter()
            .filter(|(a, b)| membership[g.index(a)] != membership[g.index(b)])
            .count();
        out.scores.insert(
            d.id.clone(),
            BTreeMap::from([("novelty".into(), Some(across as f64 / pairs.len() as f64))]),
        );
    }
    Ok(())
}

fn wang(
    store: &CorpusStore,
    kind: EntityKind,
    year: i32,
    b: i32,
    f: i32,
    reuse: u32,
    out: &mut OracleResult,
) -> Result<()> {
    let docs = year_docs(store, year);
    if docs.is_empty() {
        return Err(Error::NoDocuments(format!("year {year}")));
    }
    if b < 1 || f < 1 {
        return Err(Error::InvalidParams(
            "wang windows must be at least one year".into(),
        ));
    }
    let all = store.documents();
    let span_lo = all.iter().map(|d| d.year).min().unwrap();
    let span_hi = all.iter().map(|d| d.year).max().unwrap();
    for (lo, hi) in [(year - b, year - 1), (year + 1, year + f)] {
        if hi < span_lo || lo > span_hi {
            return Err(Error::WindowOutOfRange {
                lo,
                hi,
                span_lo,
                span_hi,
            });
        }
    }
    let names = universe(all.iter(), kind);
    let graph = |keep: &dyn Fn(i32) -> bool| {
        let mut g = Dense::new(names.clone());
        g.add_docs(all.iter().filter(|d| keep(d.year)), kind);
        g
    };
    let past = graph(&|y| y < year);
    let back = graph(&|y| y >= year - b && y < year);
    let future = graph(&|y| y > year && y <= year + f);
    let index: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let cosine = |i: usize, j: usize| {
        let (mut dot, mut ni, mut nj) = (0.0, 0.0, 0.0);
        for v in 0..names.len() {
            let (x, y) = (back.w[i][v] as f64, back.w[j][v] as f64);
            dot += x * y;
            ni += x * x;
            nj += y * y;
        }
        if ni == 0.0 || nj == 0.0 {
            0.0
        } else {
            dot / (ni.sqrt() * nj.sqrt())
        }
    };
    for d in docs {
        let pairs = name_pairs(d, kind);
        if pairs.is_empty() {
            continue;
        }
        let mut score = 0.0;
        for (a, bn) in &pairs {
            let (i, j) = (index[a.as_str()], index[bn.as_str()]);
            let new = past.w[i][j] == 0;
            let reused = future.w[i][j] >= reuse.max(1) as u64;
            if new && reused {
                score += 1.0 - cosine(i, j);
            }
        }
        out.scores.insert(
            d.id.clone(),
            BTreeMap::from([("novelty".into(), Some(score))]),
        );
    }
    Ok(())
}

fn shibayama(
    store: &CorpusStore,
    emb: &EmbeddingStore,
    year: i32,
    field: TextField,
    q: f64,
    out: &mut OracleResult,
) -> Result<()> {
    let docs = year_docs(store, year);
    if docs.is_empty() {
        return Err(Error::NoDocuments(format!("year {year}")));
    }
    for d in docs {
        let mut ids: Vec<&str> = Vec::new();
        for r in &d.references {
            if let Some(id) = r.ref_id.as_deref() {
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
        }
        let mut vectors: Vec<&[f64]> = Vec::new();
        for id in ids {
            let Some(cited) = store.documents().iter().find(|x| x.id == id) else {
                continue;
            };
            let vid = match field {
                TextField::Title => cited.title_vector_id.as_deref(),
                TextField::Abstract => cited.abstract_vector_id.as_deref(),
            };
            if let Some(v) = vid.and_then(|v| emb.get(v)) {
                vectors.push(v);
            }
        }
        if vectors.len() < 2 {
            continue;
        }
        let mut dist = Vec::new();
        for a in 0..vectors.len() {
            for b in a + 1..vectors.len() {
                let (u, v) = (vectors[a], vectors[b]);
                if u.len() != v.len() {
                    return Err(Error::DimensionMismatch {
                        expected: u.len(),
                        found: v.len(),
                    });
                }
                let dot: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
                let nu: f64 = u.iter().map(|x| x * x).sum();
                let nv: f64 = v.iter().map(|x| x * x).sum();
                let d = if nu == 0.0 || nv == 0.0 {
                    1.0
                } else {
                    (1.0 - dot / (nu * nv).sqrt()).clamp(0.0, 2.0)
                };
                dist.push(d);
            }
        }
        out.scores.insert(
            d.id.clone(),
            BTreeMap::from([
                ("novelty".into(), Some(naive_percentile(&dist, q))),
                (
                    "coverage".into(),
                    Some(vectors.len() as f64 / d.references.len() as f64),
                ),
            ]),
        );
    }
    Ok(())
}

fn disruption(
    store: &CorpusStore,
    year: Option<i32>,
    measures: &[Measure],
    out: &mut OracleResult,
) -> Result<()> {
    let all = store.documents();
    let known: BTreeSet<&str> = all.iter().map(|d| d.id.as_str()).collect();
    let refs: HashMap<&str, BTreeSet<&str>> = all
        .iter()
        .map(|d| {
            let set = d
                .references
                .iter()
                .filter_map(|r| r.ref_id.as_deref())
                .filter(|id| known.contains(id) && *id != d.id)
                .collect();
            (d.id.as_str(), set)
        })
        .collect();
    let focal: Vec<&DocumentRecord> = all
        .iter()
        .filter(|d| year.is_none_or(|y| d.year == y))
        .collect();
    if focal.is_empty() {
        return Err(Error::NoDocuments("no focal documents".into()));
    }
    for fp in focal {
        let in_fp = &refs[fp.id.as_str()];
        let citers: Vec<&str> = all
            .iter()
            .map(|d| d.id.as_str())
            .filter(|c| refs[c].contains(fp.id.as_str()))
            .collect();
        let k = all
            .iter()
            .map(|d| d.id.as_str())
            .filter(|v| *v != fp.id && !citers.contains(v) && !refs[v].is_disjoint(in_fp))
            .count() as f64;
        let shared: Vec<usize> = citers
            .iter()
            .map(|c| refs[c].intersection(in_fp).count())
            .collect();
        let n = citers.len() as f64;
        let deep = citers
            .iter()
            .filter(|c| citers.iter().any(|other| refs[*c].contains(other)))
            .count() as f64;
        let di = |l: u32, with_k: bool| {
            let j = shared.iter().filter(|&&s| s >= l as usize).count() as f64;
            let i = n - j;
            let denom = if with_k { i + j + k } else { i + j };
            (denom > 0.0).then(|| (i - j) / denom)
        };
        let mut scores = BTreeMap::new();
        for &m in measures {
            let v = match m {
                Measure::Di(l) => di(l, true),
                Measure::DiNok(l) => di(l, false),
                Measure::Depth => (n > 0.0).then(|| deep / n),
                Measure::Breadth => (n > 0.0).then(|| 1.0 - deep / n),
                Measure::Dependence => (n > 0.0).then(|| shared.iter().sum::<usize>() as f64 / n),
                Measure::Independence => di(1, false).map(|d| (d + 1.0) / 2.0),
            };
            scores.insert(m.name(), v);
        }
        out.scores.insert(fp.id.clone(), scores);
    }
    Ok(())
}

/// One disagreement between engine and oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub doc_id: String,
    pub score: String,
    pub engine: Option<f64>,
    pub oracle: Option<f64>,
}

/// Relative tolerance for floating chains; values are also accepted within an
/// absolute `1e-12` to allow for cancellation around zero.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;

pub fn values_agree(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= RELATIVE_TOLERANCE * a.abs().max(b.abs()) || (a - b).abs() <= 1e-12
}

/// Compares engine records with an oracle result over the union of
/// documents and of the oracle's score names.
pub fn compare(engine: &[ScoreRecord], oracle: &OracleResult) -> Vec<Mismatch> {
    let engine_map: BTreeMap<&str, &ScoreRecord> =
        engine.iter().map(|r| (r.doc_id.as_str(), r)).collect();
    let mut out = Vec::new();
    let docs: BTreeSet<&str> = engine_map
        .keys()
        .copied()
        .chain(oracle.scores.keys().map(String::as_str))
        .collect();
    for doc in docs {
        let o = oracle.scores.get(doc);
        let e = engine_map.get(doc);
        let names: BTreeSet<&str> = o
            .map(|s| s.keys().map(String::as_str).collect())
            .unwrap_or_else(|| {
                e.map(|r| r.scores.keys().map(String::as_str).collect())
                    .unwrap_or_default()
            });
        for name in names {
            let ev = e.and_then(|r| r.get(name));
            let ov = o.and_then(|s| s.get(name).copied().flatten());
            let ok = match (ev, ov) {
                (Some(a), Some(b)) => values_agree(a, b),
                (None, None) => e.is_some() == o.is_some(),
                _ => false,
            };
            if !ok {
                out.push(Mismatch {
                    doc_id: doc.to_string(),
                    score: name.to_string(),
                    engine: ev,
                    oracle: ov,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{IngestOptions, Provenance, ReferenceEntry};
    use crate::novelty::LeeParams;

    fn doc(id: &str, year: i32, sources: &[&str], refs: &[&str]) -> DocumentRecord {
        let mut references: Vec<ReferenceEntry> = sources
            .iter()
            .map(|s| ReferenceEntry {
                ref_id: None,
                source: Some(s.to_string()),
                year: Some(year - 1),
            })
            .collect();
        references.extend(refs.iter().map(|r| ReferenceEntry {
            ref_id: Some(r.to_string()),
            source: None,
            year: None,
        }));
        DocumentRecord {
            id: id.into(),
            year,
            references,
            keywords: vec![],
            title_vector_id: None,
            abstract_vector_id: None,
        }
    }

    fn store(docs: Vec<DocumentRecord>) -> CorpusStore {
        CorpusStore::from_documents(
            docs,
            Provenance {
                input_digest: String::new(),
                options: IngestOptions::default(),
            },
        )
        .0
    }

    #[test]
    fn lee_five_document_example() {
        let s = store(vec![
            doc("P1", 2004, &["A", "B"], &[]),
            doc("P2", 2004, &["A", "B"], &[]),
            doc("P3", 2004, &["A", "C"], &[]),
            doc("P4", 2004, &["A", "B"], &[]),
            doc("P5", 2004, &["B", "C"], &[]),
        ]);
        let ind = Indicator::Lee(LeeParams {
            entity: EntityKind::Journals,
            year: 2004,
        });
        let r = oracle_score(&ind, &s, None, DEFAULT_SIZE_GUARD).unwrap();
        let table: Vec<f64> = r.artifacts["commonness"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e[2].as_f64().unwrap())
            .collect();
        assert_eq!(table, vec![0.9375, 0.625, 0.625]);
        let p3 = r.scores["P3"]["commonness"].unwrap();
        assert!((p3 - 0.4700).abs() < 1e-4);
    }

    #[test]
    fn disruption_toy_graph() {
        let s = store(vec![
            doc("R1", 1990, &[], &[]),
            doc("R2", 1990, &[], &[]),
            doc("FP", 2000, &[], &["R1", "R2"]),
            doc("C1", 2001, &[], &["FP"]),
            doc("C2", 2001, &[], &["FP", "R1"]),
            doc("C3", 2001, &[], &["R2"]),
        ]);
        let ind = Indicator::Disruption {
            year: Some(2000),
            measures: Measure::DEFAULT.to_vec(),
        };
        let r = oracle_score(&ind, &s, None, DEFAULT_SIZE_GUARD).unwrap();
        let fp = &r.scores["FP"];
        assert_eq!(fp["di1"], Some(0.0));
        assert_eq!(fp["dependence"], Some(0.5));
        assert_eq!(fp["breadth"], Some(1.0));
    }

    #[test]
    fn empty_corpus_gives_empty_result() {
        let s = store(vec![]);
        let ind = Indicator::Lee(LeeParams {
            entity: EntityKind::Journals,
            year: 2000,
        });
        let r = oracle_score(&ind, &s, None, DEFAULT_SIZE_GUARD).unwrap();
        assert!(r.scores.is_empty());
    }

    #[test]
    fn size_guard() {
        let s = store(
            (0..3)
                .map(|i| doc(&format!("d{i}"), 2000, &["A"], &[]))
                .collect(),
        );
        let ind = Indicator::Lee(LeeParams {
            entity: EntityKind::Journals,
            year: 2000,
        });
        assert!(matches!(
            oracle_score(&ind, &s, None, 2),
            Err(Error::CorpusTooLarge { found: 3, limit: 2 })
        ));
    }

    #[test]
    fn exhaustive_null_on_two_documents() {
        // One stratum with labels [A, B, A, C]; 24 orderings.
        let s = store(vec![
            doc("x", 2000, &["A", "B"], &[]),
            doc("y", 2000, &["A", "C"], &[]),
        ]);
        assert_eq!(permutation_count(&s, EntityKind::Journals, 2000), 24);
        let stats = exhaustive_null(&s, EntityKind::Journals, 2000).unwrap();
        // Doc x gets {A,B} when its two slots hold A and B in either order:
        // for the AB edge count the orderings where x or y holds {A,B}.
        let (mean, _) = stats[&("A".to_string(), "B".to_string())];
        // x holds {A,B}: 2 (A choices) * 2 (orders) * 2 (C,A for y) = 8 of 24;
        // y holds {A,B}: likewise 8; both at once is impossible (one B).
        assert!((mean - 16.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn dense_louvain_splits_two_triangles() {
        let mut w = vec![vec![0u64; 6]; 6];
        for (a, b) in [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)] {
            w[a][b] = 1;
            w[b][a] = 1;
        }
        assert_eq!(dense_louvain(&w, 1.0), vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn compare_reports_disagreements() {
        let mut o = OracleResult::default();
        o.scores
            .insert("d".into(), BTreeMap::from([("x".to_string(), Some(1.0))]));
        let e =
            vec![ScoreRecord::new("d", 2000, "t", "journals", "").score("x", Some(1.0 + 1e-12))];
        assert!(compare(&e, &o).is_empty());
        let e = vec![ScoreRecord::new("d", 2000, "t", "journals", "").score("x", Some(1.1))];
        assert_eq!(compare(&e, &o).len(), 1);
        assert_eq!(compare(&[], &o).len(), 1);
    }
}

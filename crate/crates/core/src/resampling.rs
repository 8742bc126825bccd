// SPDX-License-Identifier: Apache-2.0

//! Year-stratified reference shuffling.
//!
//! For a focal year, every `(document, reference)` occurrence is put into a
//! stratum keyed by the publication year of the cited work. A sample permutes
//! the entity labels inside each stratum across its slots, so each document
//! keeps how many references it draws from every year while the journals it
//! cites change. References without a year share one dedicated stratum.
//!
//! Randomness is derived per `(master_seed, sample_index, stratum)` with a
//! fixed mixing function, which makes every sample independent of execution
//! order and thread count.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::corpus::DocumentRecord;
use crate::error::{Error, Result};
use crate::graph::{pair_key, push_pair_keys, unpack_key, CoocGraph, EntityKind};

/// Samples drawn when the caller does not say otherwise.
pub const DEFAULT_SAMPLES: usize = 20;

/// Stratum key: publication year of the cited works, `None` when unknown.
pub type StratumYear = Option<i32>;

const MISSING_YEAR_KEY: u64 = i64::MIN as u64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stratum {
    pub year: StratumYear,
    /// Document slot (position in the plan's document list) of each occurrence.
    pub slots: Vec<u32>,
    /// Entity label (index into [`ResamplePlan::entities`]) of each occurrence
    /// in the observed data.
    pub labels: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResamplePlan {
    pub focal_year: i32,
    pub entity_kind: EntityKind,
    pub sample_count: usize,
    pub master_seed: u64,
    /// Document ids in slot order.
    pub doc_ids: Vec<String>,
    /// Entity names, sorted; labels index into this.
    pub entities: Vec<String>,
    /// Strata ordered by year, the missing-year stratum first.
    pub strata: Vec<Stratum>,
}

/// SplitMix64 finaliser.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the permutation stream for one stratum of one sample.
pub fn stream_seed(master_seed: u64, sample_index: u64, stratum: StratumYear) -> u64 {
    let key = stratum.map_or(MISSING_YEAR_KEY, |y| y as i64 as u64);
    let mut h = splitmix64(master_seed);
    h = splitmix64(h ^ sample_index);
    splitmix64(h ^ key)
}

/// Builds the stratified plan over the focal year's documents.
///
/// `docs` must be in the deterministic corpus order (see
/// [`crate::corpus::CorpusStore::docs_in_year`]). Keywords carry no year, so
/// a keyword plan has a single missing-year stratum.
pub fn build_plan(
    docs: &[&DocumentRecord],
    kind: EntityKind,
    sample_count: usize,
    master_seed: u64,
) -> Result<ResamplePlan> {
    let Some(first) = docs.first() else {
        return Err(Error::NoDocuments("resampling plan".into()));
    };
    if sample_count == 0 {
        return Err(Error::InvalidParams(
            "sample count must be at least 1".into(),
        ));
    }

    let mut entities: Vec<&str> = Vec::new();
    let mut occurrences: Vec<(StratumYear, u32, &str)> = Vec::new();
    for (slot, doc) in docs.iter().enumerate() {
        match kind {
            EntityKind::Journals => {
                for r in &doc.references {
                    if let Some(src) = r.source.as_deref() {
                        occurrences.push((r.year, slot as u32, src));
                    }
                }
            }
            EntityKind::Keywords => {
                for k in &doc.keywords {
                    occurrences.push((None, slot as u32, k));
                }
            }
        }
    }
    entities.extend(occurrences.iter().map(|o| o.2));
    entities.sort_unstable();
    entities.dedup();

    // Stable sort keeps slot order (and within-document order) inside a stratum.
    occurrences.sort_by_key(|o| o.0);
    let mut strata: Vec<Stratum> = Vec::new();
    for (year, slot, name) in occurrences {
        let label = entities.binary_search(&name).expect("entity interned") as u32;
        match strata.last_mut() {
            Some(s) if s.year == year => {
                s.slots.push(slot);
                s.labels.push(label);
            }
            _ => strata.push(Stratum {
                year,
                slots: vec![slot],
                labels: vec![label],
            }),
        }
    }

    Ok(ResamplePlan {
        focal_year: first.year,
        entity_kind: kind,
        sample_count,
        master_seed,
        doc_ids: docs.iter().map(|d| d.id.clone()).collect(),
        entities: entities.into_iter().map(str::to_string).collect(),
        strata,
    })
}

impl ResamplePlan {
    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    /// Per-document label multisets of the observed (unshuffled) data.
    pub fn observed(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.doc_count()];
        for s in &self.strata {
            for (&slot, &label) in s.slots.iter().zip(&s.labels) {
                out[slot as usize].push(label);
            }
        }
        out
    }

    /// Shuffled labels of every stratum for one sample, aligned with
    /// `strata[k].slots`.
    pub fn shuffled_strata(&self, sample_index: usize) -> Vec<Vec<u32>> {
        self.strata
            .iter()
            .map(|s| {
                let mut labels = s.labels.clone();
                let seed = stream_seed(self.master_seed, sample_index as u64, s.year);
                labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                labels
            })
            .collect()
    }
}

/// Per-document shuffled label multisets for sample `sample_index`.
///
/// Labels of a document are grouped by stratum, in stratum order.
pub fn draw_sample(plan: &ResamplePlan, sample_index: usize) -> Vec<Vec<u32>> {
    assert!(
        sample_index < plan.sample_count,
        "sample index {sample_index} out of range 0..{}",
        plan.sample_count
    );
    let mut out = vec![Vec::new(); plan.doc_count()];
    for (stratum, labels) in plan.strata.iter().zip(plan.shuffled_strata(sample_index)) {
        for (&slot, label) in stratum.slots.iter().zip(labels) {
            out[slot as usize].push(label);
        }
    }
    out
}

/// Resample statistics of one edge, in the focal graph's node indexing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeStat {
    pub i: u32,
    pub j: u32,
    /// Observed weight `w_t` (0 when the edge only appears in samples).
    pub observed: u32,
    pub mean: f64,
    /// Population standard deviation (divides by the sample count).
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeStats {
    pub sample_count: usize,
    /// Sorted by `(i, j)`.
    pub edges: Vec<EdgeStat>,
}

impl EdgeStats {
    pub fn get(&self, i: u32, j: u32) -> Option<&EdgeStat> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.edges
            .binary_search_by(|e| (e.i, e.j).cmp(&(i, j)))
            .ok()
            .map(|p| &self.edges[p])
    }
}

/// Counts of one sample graph as sorted `(key, weight)` runs.
fn sample_graph(plan: &ResamplePlan, to_graph: &[u32], sample_index: usize) -> Vec<(u64, u64)> {
    let docs = draw_sample(plan, sample_index);
    let mut keys = Vec::new();
    let mut scratch = Vec::new();
    for labels in docs {
        scratch.clear();
        scratch.extend(labels.into_iter().map(|l| to_graph[l as usize]));
        scratch.sort_unstable();
        scratch.dedup();
        push_pair_keys(&scratch, &mut keys);
    }
    keys.sort_unstable();
    let mut runs = Vec::new();
    let mut start = 0;
    while start < keys.len() {
        let mut end = start + 1;
        while end < keys.len() && keys[end] == keys[start] {
            end += 1;
        }
        runs.push((keys[start], (end - start) as u64));
        start = end;
    }
    runs
}

/// Per-edge mean and population standard deviation over the plan's samples.
///
/// Covers the union of edges seen in any sample or in `graph`; an edge
/// absent from a sample counts as weight 0 there. Sums are accumulated in
/// integers, so the result is identical for any thread count.
pub fn resample_stats(plan: &ResamplePlan, graph: &CoocGraph) -> Result<EdgeStats> {
    let to_graph = plan
        .entities
        .iter()
        .map(|e| {
            graph
                .node_index(e)
                .ok_or_else(|| Error::PlanGraphMismatch(e.clone()))
        })
        .collect::<Result<Vec<u32>>>()?;

    let sums: FxHashMap<u64, (u64, u64)> = (0..plan.sample_count)
        .into_par_iter()
        .fold(FxHashMap::default, |mut acc, k| {
            for (key, w) in sample_graph(plan, &to_graph, k) {
                let e = acc.entry(key).or_insert((0, 0));
                e.0 += w;
                e.1 += w * w;
            }
            acc
        })
        .reduce(FxHashMap::default, merge_sums);

    let mut keys: Vec<u64> = sums.keys().copied().collect();
    for (i, j, _) in graph.edges() {
        keys.push(pair_key(i, j));
    }
    keys.sort_unstable();
    keys.dedup();

    let s = plan.sample_count as u128;
    let edges = keys
        .into_iter()
        .map(|key| {
            let (i, j) = unpack_key(key);
            let (sum, sumsq) = sums.get(&key).copied().unwrap_or((0, 0));
            // s^2 var = s * Σw² - (Σw)², exact in integers.
            let scaled_var = s * sumsq as u128 - (sum as u128) * (sum as u128);
            EdgeStat {
                i,
                j,
                observed: graph.weight(i, j),
                mean: sum as f64 / plan.sample_count as f64,
                std: (scaled_var as f64).sqrt() / plan.sample_count as f64,
            }
        })
        .collect();
    Ok(EdgeStats {
        sample_count: plan.sample_count,
        edges,
    })
}

fn merge_sums(
    mut a: FxHashMap<u64, (u64, u64)>,
    mut b: FxHashMap<u64, (u64, u64)>,
) -> FxHashMap<u64, (u64, u64)> {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    for (k, (s, q)) in b {
        let e = a.entry(k).or_insert((0, 0));
        e.0 += s;
        e.1 += q;
    }
    a
}

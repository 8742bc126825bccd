// SPDX-License-Identifier: Apache-2.0

//! Louvain community detection on co-occurrence graphs.
//!
//! The procedure is fully deterministic:
//!
//! * nodes are swept in dense index order, repeatedly, until a sweep moves
//!   nothing;
//! * a node considers its current community and every community of its
//!   neighbours; the gain of joining community `d` is
//!   `2m * k_i,in(d) - resolution * tot(d) * k_i` (the modularity gain scaled
//!   by `2m^2`), with `i` removed from its own community first;
//! * the node stays unless some community has a strictly larger gain than the
//!   current one; among the best candidates the lowest community id wins;
//! * communities are renumbered by first appearance in node order and
//!   collapsed into super-nodes; levels repeat until a level moves nothing.
//!
//! Edge weights are integers, so with the default resolution every gain is
//! computed exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::CoocGraph;

const MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityPartition {
    /// Community id of each graph node, indexed like the graph.
    pub membership: Vec<u32>,
    pub community_count: usize,
    pub modularity: f64,
    pub resolution: f64,
    /// Recorded for provenance; the sweep order is fixed by node index.
    pub seed: u64,
    pub levels: usize,
}

impl CommunityPartition {
    pub fn community_of(&self, node: u32) -> u32 {
        self.membership[node as usize]
    }
}

/// Weighted undirected graph with explicit self-loop weights.
///
/// `self_w[i]` is the `A_ii` entry, which at aggregated levels already counts
/// each internal edge twice; `k[i] = sum_j A_ij` including it.
struct Level {
    offsets: Vec<usize>,
    nbrs: Vec<u32>,
    w: Vec<u64>,
    self_w: Vec<u64>,
    k: Vec<u64>,
}

impl Level {
    fn from_graph(g: &CoocGraph) -> Self {
        let n = g.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut nbrs = Vec::new();
        let mut w = Vec::new();
        for i in 0..n as u32 {
            let (ns, ws) = g.neighbors(i);
            nbrs.extend_from_slice(ns);
            w.extend(ws.iter().map(|&x| x as u64));
            offsets.push(nbrs.len());
        }
        Self {
            offsets,
            nbrs,
            w,
            self_w: vec![0; n],
            k: g.degrees().to_vec(),
        }
    }

    fn len(&self) -> usize {
        self.k.len()
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.nbrs[r.clone()]
            .iter()
            .zip(&self.w[r])
            .map(|(&j, &w)| (j as usize, w))
    }

    /// One local-moving phase. Returns the community of every node and
    /// whether anything moved.
    fn local_moves(&self, two_m: u64, resolution: f64) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot: Vec<u64> = self.k.clone();
        let mut kin = vec![0u64; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any_move = false;

        for _ in 0..MAX_SWEEPS {
            let mut moved = false;
            for i in 0..n {
                let current = comm[i];
                let ki = self.k[i];
                for (j, w) in self.row(i) {
                    let c = comm[j];
                    if kin[c] == 0 {
                        touched.push(c);
                    }
                    kin[c] += w;
                }
                tot[current] -= ki;

                let gain = |d: usize, kin_d: u64| -> f64 {
                    (two_m as u128 * kin_d as u128) as f64
                        - resolution * (tot[d] as u128 * ki as u128) as f64
                };
                let stay = gain(current, kin[current]);
                let mut best = current;
                let mut best_gain = stay;
                for &d in touched.iter().filter(|&&d| d != current) {
                    let g = gain(d, kin[d]);
                    if g > best_gain || (g == best_gain && best != current && d < best) {
                        best = d;
                        best_gain = g;
                    }
                }

                tot[best] += ki;
                comm[i] = best;
                if best != current {
                    moved = true;
                }
                for &c in &touched {
                    kin[c] = 0;
                }
                touched.clear();
            }
            any_move |= moved;
            if !moved {
                break;
            }
        }
        (comm, any_move)
    }

    /// Collapses communities (already renumbered `0..count`) into nodes.
    fn aggregate(&self, comm: &[usize], count: usize) -> Self {
        let mut rows: Vec<Vec<(u32, u64)>> = vec![Vec::new(); count];
        let mut self_w = vec![0u64; count];
        let mut k = vec![0u64; count];
        for i in 0..self.len() {
            let ci = comm[i];
            self_w[ci] += self.self_w[i];
            k[ci] += self.k[i];
            for (j, w) in self.row(i) {
                let cj = comm[j];
                if ci == cj {
                    self_w[ci] += w;
                } else {
                    rows[ci].push((cj as u32, w));
                }
            }
        }
        let mut offsets = Vec::with_capacity(count + 1);
        offsets.push(0);
        let mut nbrs = Vec::new();
        let mut w = Vec::new();
        for mut row in rows {
            row.sort_unstable_by_key(|e| e.0);
            let mut p = 0;
            while p < row.len() {
                let mut q = p;
                let mut sum = 0;
                while q < row.len() && row[q].0 == row[p].0 {
                    sum += row[q].1;
                    q += 1;
                }
                nbrs.push(row[p].0);
                w.push(sum);
                p = q;
            }
            offsets.push(nbrs.len());
        }
        Self {
            offsets,
            nbrs,
            w,
            self_w,
            k,
        }
    }
}

/// Renumbers labels by first appearance; returns the new labels and count.
fn renumber(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; labels.len().max(1)];
    let mut next = 0;
    let out = labels
        .iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect();
    (out, next)
}

/// Modularity of `membership` on `graph` at the given resolution.
pub fn modularity(graph: &CoocGraph, membership: &[u32], resolution: f64) -> f64 {
    let two_m = 2 * graph.total_weight();
    if two_m == 0 {
        return 0.0;
    }
    let count = membership
        .iter()
        .map(|&c| c as usize + 1)
        .max()
        .unwrap_or(0);
    let mut internal = vec![0u64; count];
    let mut tot = vec![0u64; count];
    for i in 0..graph.node_count() as u32 {
        let ci = membership[i as usize];
        tot[ci as usize] += graph.degree(i);
        let (ns, ws) = graph.neighbors(i);
        for (&j, &w) in ns.iter().zip(ws) {
            if membership[j as usize] == ci {
                internal[ci as usize] += w as u64;
            }
        }
    }
    let two_m = two_m as f64;
    internal
        .iter()
        .zip(&tot)
        .map(|(&a, &t)| a as f64 / two_m - resolution * (t as f64 / two_m).powi(2))
        .sum()
}

/// Runs Louvain on `graph`.
pub fn detect_communities(
    graph: &CoocGraph,
    resolution: f64,
    seed: u64,
) -> Result<CommunityPartition> {
    if graph.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::InvalidParams(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let two_m = 2 * graph.total_weight();
    let mut membership: Vec<usize> = (0..graph.node_count()).collect();
    let mut level = Level::from_graph(graph);
    let mut levels = 0;
    if two_m > 0 {
        loop {
            let (comm, moved) = level.local_moves(two_m, resolution);
            if !moved {
                break;
            }
            levels += 1;
            let (comm, count) = renumber(&comm);
            for m in membership.iter_mut() {
                *m = comm[*m];
            }
            level = level.aggregate(&comm, count);
        }
    }
    let (membership, community_count) = renumber(&membership);
    let membership: Vec<u32> = membership.into_iter().map(|c| c as u32).collect();
    Ok(CommunityPartition {
        modularity: modularity(graph, &membership, resolution),
        membership,
        community_count,
        resolution,
        seed,
        levels,
    })
}

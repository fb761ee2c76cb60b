// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BfsScratch, Graph, NodeId};
use crate::error::{Error, Result};
use crate::rng;

/// Summary statistics of a connected graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub nodes: usize,
    pub edges: usize,
    pub avg_degree: f64,
    /// Mean local clustering coefficient; nodes of degree < 2 count as 0.
    pub avg_clustering: f64,
    /// Largest eccentricity over the BFS sources used.
    pub diameter: u32,
    /// 90th percentile of the pairwise distance distribution, linearly
    /// interpolated between integer distances.
    pub effective_diameter_90: f64,
    /// Number of BFS sources when distances were sampled; `None` when exact.
    pub sampled_sources: Option<usize>,
}

impl NetworkStats {
    pub const CSV_HEADER: &'static str = "nodes,edges,avg_deg,avg_cc,diameter,eff_diameter_90";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.nodes,
            self.edges,
            self.avg_degree,
            self.avg_clustering,
            self.diameter,
            self.effective_diameter_90
        )
    }
}

/// Exact statistics from one BFS per node.
pub fn network_stats(g: &Graph) -> Result<NetworkStats> {
    let sources: Vec<NodeId> = (0..g.node_count()).collect();
    stats_from_sources(g, &sources, None)
}

/// Statistics with distances taken from `sources` uniformly sampled BFS
/// roots. Degree and clustering stay exact.
pub fn network_stats_sampled(g: &Graph, sources: usize, seed: u64) -> Result<NetworkStats> {
    let n = g.node_count();
    if sources == 0 || sources >= n {
        return network_stats(g);
    }
    let mut rng = rng::stream(seed, "stats-sources", 0);
    let mut picked = index::sample(&mut rng, n, sources).into_vec();
    picked.sort_unstable();
    stats_from_sources(g, &picked, Some(sources))
}

fn stats_from_sources(
    g: &Graph,
    sources: &[NodeId],
    sampled: Option<usize>,
) -> Result<NetworkStats> {
    let n = g.node_count();
    if n == 0 || !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let histogram = sources
        .par_iter()
        .fold(
            || (BfsScratch::new(n), Vec::<u64>::new()),
            |(mut scratch, mut hist), &s| {
                if hist.is_empty() {
                    hist.push(0);
                }
                hist[0] += 1;
                scratch.run(g, s, None, |_, d| {
                    let d = d as usize;
                    if hist.len() <= d {
                        hist.resize(d + 1, 0);
                    }
                    hist[d] += 1;
                });
                (scratch, hist)
            },
        )
        .map(|(_, hist)| hist)
        .reduce(Vec::new, merge_histograms);
    let diameter = (histogram.len() - 1) as u32;
    Ok(NetworkStats {
        nodes: n,
        edges: g.edge_count(),
        avg_degree: 2.0 * g.edge_count() as f64 / n as f64,
        avg_clustering: average_clustering(g),
        diameter,
        effective_diameter_90: effective_diameter(&histogram, 0.9),
        sampled_sources: sampled,
    })
}

fn merge_histograms(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    if a.len() < b.len() {
        a.resize(b.len(), 0);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Local clustering coefficient of `u`.
pub fn local_clustering(g: &Graph, u: NodeId) -> f64 {
    let nbrs = g.neighbors(u);
    let d = nbrs.len();
    if d < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for &v in nbrs {
        links += sorted_intersection_len(nbrs, g.neighbors(v));
    }
    // each triangle edge (v, w) is seen from v and from w
    links as f64 / (d * (d - 1)) as f64
}

fn sorted_intersection_len(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

fn average_clustering(g: &Graph) -> f64 {
    let n = g.node_count();
    let total: f64 = (0..n).into_par_iter().map(|u| local_clustering(g, u)).sum();
    total / n as f64
}

/// Interpolated `q`-quantile of a distance histogram (`hist[d]` = number of
/// ordered source/target pairs at distance `d`, self pairs included at 0).
pub(crate) fn effective_diameter(hist: &[u64], q: f64) -> f64 {
    let total: u64 = hist.iter().sum();
    let target = q * total as f64;
    let mut below = 0u64;
    for (d, &count) in hist.iter().enumerate() {
        let through = below + count;
        if through as f64 > target {
            if d == 0 || count == 0 {
                return d as f64;
            }
            return (d - 1) as f64 + (target - below as f64) / count as f64;
        }
        below = through;
    }
    hist.len().saturating_sub(1) as f64
}

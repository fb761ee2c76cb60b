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

//! Synthetic graph models and small named graphs.
//!
//! All generators are deterministic in their seed.

use std::collections::BTreeSet;

use rand::Rng as _;

use super::{Graph, NodeId};
use crate::error::{Error, Result};
use crate::rng;

/// Barabási–Albert preferential attachment. Starts from a clique on
/// `attach` nodes; every further node links to `attach` distinct existing
/// nodes chosen with probability proportional to their current degree.
pub fn gen_ba(n: usize, attach: usize, seed: u64) -> Result<Graph> {
    if attach < 1 || n <= attach {
        return Err(Error::invalid(format!(
            "barabasi-albert needs n > attach >= 1 (got n={n}, attach={attach})"
        )));
    }
    let mut rng = rng::stream(seed, "gen-ba", 0);
    let mut edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(attach * n);
    // every edge endpoint, so a uniform pick is a degree-weighted node pick
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * attach * n);
    for u in 0..attach {
        for v in (u + 1)..attach {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    let mut targets = BTreeSet::new();
    for new in attach..n {
        targets.clear();
        if new == attach {
            targets.extend(0..attach);
        } else {
            while targets.len() < attach {
                targets.insert(endpoints[rng.random_range(0..endpoints.len())]);
            }
        }
        for &t in &targets {
            edges.push((t, new));
            endpoints.extend([t, new]);
        }
    }
    Graph::from_edges(n, edges)
}

/// Erdős–Rényi G(n, p): each of the n(n-1)/2 pairs is present independently
/// with probability `p`.
pub fn gen_er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n < 2 || !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!(
            "erdos-renyi needs n >= 2 and 0 < p <= 1 (got n={n}, p={p})"
        )));
    }
    let mut rng = rng::stream(seed, "gen-er", 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// G(n, p) with `p = avg_degree / (n - 1)`.
pub fn gen_er_avg_degree(n: usize, avg_degree: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "erdos-renyi needs n >= 2 (got {n})"
        )));
    }
    gen_er(n, avg_degree / (n - 1) as f64, seed)
}

/// Watts–Strogatz small world: a ring lattice where every node links to its
/// `k_nbrs / 2` nearest neighbors on each side, then each lattice edge
/// `(u, u+j)` is rewired to `(u, w)` with probability `p_rewire`, `w`
/// uniform among nodes that are neither `u` nor already adjacent to it.
/// Rewiring keeps the edge count at `n * k_nbrs / 2`.
pub fn gen_ws(n: usize, k_nbrs: usize, p_rewire: f64, seed: u64) -> Result<Graph> {
    if k_nbrs < 2 || !k_nbrs.is_multiple_of(2) || n <= k_nbrs {
        return Err(Error::invalid(format!(
            "watts-strogatz needs an even k_nbrs >= 2 and n > k_nbrs (got n={n}, k_nbrs={k_nbrs})"
        )));
    }
    if !(0.0..=1.0).contains(&p_rewire) {
        return Err(Error::invalid(format!(
            "rewiring probability must lie in [0, 1] (got {p_rewire})"
        )));
    }
    let mut rng = rng::stream(seed, "gen-ws", 0);
    let mut adj: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k_nbrs / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=k_nbrs / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if rng.random::<f64>() >= p_rewire || adj[u].len() >= n - 1 || !adj[u].contains(&v) {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let edges = adj
        .iter()
        .enumerate()
        .flat_map(|(u, set)| set.iter().filter(move |&&v| v > u).map(move |&v| (u, v)));
    Graph::from_edges(n, edges)
}

pub fn path_graph(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("valid path")
}

pub fn cycle_graph(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid cycle")
}

/// Star with node 0 at the center.
pub fn star_graph(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))).expect("valid star")
}

pub fn complete_graph(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))))
        .expect("valid complete graph")
}

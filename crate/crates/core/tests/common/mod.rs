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

//! Brute-force oracles shared by the integration tests. They are written
//! independently of the library: dense matrices, no BFS.

#![allow(dead_code)]

use egoclose::graph::{Graph, NodeId};
use egoclose::rng::{stream, Rng};
use rand::Rng as _;

pub const INF: u32 = u32::MAX;

/// All-pairs hop distances by Floyd-Warshall.
#[allow(clippy::needless_range_loop)]
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<u32>> {
    let n = g.node_count();
    let mut d = vec![vec![INF; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0;
    }
    for (u, v) in g.edges() {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == INF {
                continue;
            }
            for j in 0..n {
                if d[k][j] != INF && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

pub fn closeness_oracle(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    floyd_warshall(g)
        .iter()
        .map(|row| {
            let total: u64 = row.iter().map(|&x| u64::from(x)).sum();
            (n - 1) as f64 / total as f64
        })
        .collect()
}

/// `sum_{t=1..h} |{u : d(v,u) = t}| / t` from the distance matrix.
pub fn ego_oracle(dist: &[Vec<u32>], h: u32) -> Vec<f64> {
    dist.iter()
        .map(|row| {
            row.iter()
                .filter(|&&x| x >= 1 && x <= h)
                .map(|&x| 1.0 / f64::from(x))
                .sum()
        })
        .collect()
}

/// Component representative of every node, by union-find.
pub fn union_find_roots(g: &Graph) -> Vec<usize> {
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    for (u, v) in g.edges() {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    (0..n).map(|u| find(&mut parent, u)).collect()
}

/// Connected graph: a random recursive tree plus `extra` random edges.
pub fn random_connected(n: usize, extra: usize, seed: u64) -> Graph {
    let mut rng: Rng = stream(seed, "oracle-graph", 0);
    let mut edges: Vec<(NodeId, NodeId)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    for _ in 0..extra {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        edges.push((u, v));
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Possibly disconnected graph with each pair present with probability `p`.
pub fn random_pairs(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng: Rng = stream(seed, "oracle-pairs", 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

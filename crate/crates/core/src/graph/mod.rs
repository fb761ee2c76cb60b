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

//! Undirected simple graphs in compressed adjacency form.

mod generate;
mod io;
mod stats;

pub use generate::{
    complete_graph, cycle_graph, gen_ba, gen_er, gen_er_avg_degree, gen_ws, path_graph, star_graph,
};
pub use io::{load_edge_list, write_edge_list};
pub use stats::{network_stats, network_stats_sampled, NetworkStats};

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Immutable undirected simple graph.
///
/// Node ids are `0..node_count()`. Each node keeps the external label it was
/// read with (or its own id for generated graphs), so results can be reported
/// in the caller's id space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    labels: Vec<u64>,
    max_degree: usize,
}

impl Graph {
    /// Builds a graph from an edge iterator. Self-loops and duplicate edges
    /// are dropped; both orientations of an edge collapse to one.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let labels = (0..node_count as u64).collect();
        Self::from_edges_labeled(labels, edges)
    }

    pub(crate) fn from_edges_labeled<I>(labels: Vec<u64>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let node_count = labels.len();
        let mut lists: Vec<Vec<NodeId>> = vec![Vec::new(); node_count];
        for (u, v) in edges {
            for node in [u, v] {
                if node >= node_count {
                    return Err(Error::NodeOutOfRange { node, node_count });
                }
            }
            if u != v {
                lists[u].push(v);
                lists[v].push(u);
            }
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        let mut neighbors = Vec::new();
        let mut max_degree = 0;
        offsets.push(0);
        for mut list in lists {
            list.sort_unstable();
            list.dedup();
            max_degree = max_degree.max(list.len());
            neighbors.extend_from_slice(&list);
            offsets.push(neighbors.len());
        }
        Ok(Graph {
            offsets,
            neighbors,
            labels,
            max_degree,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Sorted neighbor ids of `u`.
    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: NodeId) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count()).map(|u| self.degree(u)).collect()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// External label of node `u`.
    pub fn label(&self, u: NodeId) -> u64 {
        self.labels[u]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// Edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn check_node(&self, node: NodeId) -> Result<()> {
        if node < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node,
                node_count: self.node_count(),
            })
        }
    }

    /// Connected component index for every node, numbered in order of their
    /// smallest node id.
    pub fn component_ids(&self) -> (Vec<usize>, usize) {
        let n = self.node_count();
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for root in 0..n {
            if comp[root] != usize::MAX {
                continue;
            }
            comp[root] = count;
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        (comp, count)
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && self.component_ids().1 == 1
    }

    /// Subgraph induced by `keep` (ascending node ids), relabeled densely in
    /// the same order. Labels carry over.
    pub fn induced_subgraph(&self, keep: &[NodeId]) -> Graph {
        let mut index = vec![usize::MAX; self.node_count()];
        for (new, &old) in keep.iter().enumerate() {
            index[old] = new;
        }
        let labels = keep.iter().map(|&u| self.labels[u]).collect();
        let edges = keep.iter().flat_map(|&u| {
            let index = &index;
            self.neighbors(u)
                .iter()
                .filter(move |&&v| index[v] != usize::MAX && v > u)
                .map(move |&v| (index[u], index[v]))
        });
        Graph::from_edges_labeled(labels, edges).expect("induced edges are in range")
    }
}

/// Induced subgraph on the largest connected component, relabeled
/// contiguously. Among equally large components the one holding the smallest
/// external label wins.
pub fn largest_connected_component(g: &Graph) -> Graph {
    let (comp, count) = g.component_ids();
    if count <= 1 {
        return g.clone();
    }
    let mut size = vec![0usize; count];
    let mut min_label = vec![u64::MAX; count];
    for u in 0..g.node_count() {
        size[comp[u]] += 1;
        min_label[comp[u]] = min_label[comp[u]].min(g.label(u));
    }
    let best = (0..count)
        .max_by(|&a, &b| size[a].cmp(&size[b]).then(min_label[b].cmp(&min_label[a])))
        .expect("at least one component");
    let keep: Vec<NodeId> = (0..g.node_count()).filter(|&u| comp[u] == best).collect();
    g.induced_subgraph(&keep)
}

/// Hop distance; `None` marks an unreachable node.
pub type Distance = Option<u32>;

/// Hop distances from `source` to every node.
pub fn bfs_distances(g: &Graph, source: NodeId) -> Result<Vec<Distance>> {
    g.check_node(source)?;
    let mut dist = vec![None; g.node_count()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued nodes are reached");
        for &v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    Ok(dist)
}

/// Reusable scratch space for repeated BFS runs. `dist` is `u32::MAX`
/// for unvisited slots, reset lazily through `touched`.
pub(crate) struct BfsScratch {
    dist: Vec<u32>,
    touched: Vec<NodeId>,
}

impl BfsScratch {
    pub(crate) fn new(n: usize) -> Self {
        BfsScratch {
            dist: vec![u32::MAX; n],
            touched: Vec::new(),
        }
    }

    /// BFS from `source` out to `radius` hops (all hops when `None`). Calls
    /// `visit(node, depth)` for every reached node other than the source, in
    /// BFS order.
    pub(crate) fn run(
        &mut self,
        g: &Graph,
        source: NodeId,
        radius: Option<u32>,
        mut visit: impl FnMut(NodeId, u32),
    ) {
        for &u in &self.touched {
            self.dist[u] = u32::MAX;
        }
        self.touched.clear();
        self.dist[source] = 0;
        self.touched.push(source);
        let mut head = 0;
        while head < self.touched.len() {
            let u = self.touched[head];
            head += 1;
            let du = self.dist[u];
            if radius.is_some_and(|r| du >= r) {
                continue;
            }
            for &v in g.neighbors(u) {
                if self.dist[v] == u32::MAX {
                    self.dist[v] = du + 1;
                    self.touched.push(v);
                    visit(v, du + 1);
                }
            }
        }
    }
}

/// Dense non-negative per-node values (centrality scores or a recovered
/// signal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeScores(Vec<f64>);

impl NodeScores {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(format!(
                "score at node {i} is {} (scores must be finite and non-negative)",
                values[i]
            )));
        }
        Ok(NodeScores(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<NodeId> for NodeScores {
    type Output = f64;

    fn index(&self, u: NodeId) -> &f64 {
        &self.0[u]
    }
}

/// Degree of every node as a score vector.
pub fn degree_scores(g: &Graph) -> NodeScores {
    NodeScores((0..g.node_count()).map(|u| g.degree(u) as f64).collect())
}

/// Closeness centrality `(|V|-1) / sum of distances` of every node, one BFS
/// per source.
pub fn closeness_exact(g: &Graph) -> Result<NodeScores> {
    let n = g.node_count();
    if n == 0 || !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if n == 1 {
        return Ok(NodeScores(vec![0.0]));
    }
    let values = (0..n)
        .into_par_iter()
        .map_init(
            || BfsScratch::new(n),
            |scratch, u| {
                let mut total = 0u64;
                scratch.run(g, u, None, |_, d| total += u64::from(d));
                (n - 1) as f64 / total as f64
            },
        )
        .collect();
    Ok(NodeScores(values))
}

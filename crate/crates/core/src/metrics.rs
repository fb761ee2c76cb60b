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

//! Local centrality scores computed from each node's own h-hop ball.
//!
//! Every score is a pure function of a truncated BFS around one node, so the
//! per-node work is independent and runs in parallel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BfsScratch, Graph, NodeId, NodeScores};

/// Radius used throughout when none is given.
pub const DEFAULT_RADIUS: u32 = 2;

/// Sizes of the exact-distance rings around a node:
/// `ring_sizes[t - 1]` nodes sit at distance exactly `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EgoProfile {
    pub ring_sizes: Vec<usize>,
}

impl EgoProfile {
    /// `sum_t |B_t| / t`
    pub fn ego_closeness(&self) -> f64 {
        self.ring_sizes
            .iter()
            .enumerate()
            .map(|(i, &size)| size as f64 / (i + 1) as f64)
            .sum()
    }

    /// `sum_t t * |B_t|`
    pub fn truncated_farness(&self) -> f64 {
        self.ring_sizes
            .iter()
            .enumerate()
            .map(|(i, &size)| ((i + 1) * size) as f64)
            .sum()
    }

    pub fn reached(&self) -> usize {
        self.ring_sizes.iter().sum()
    }

    /// Farness estimate for a node in a graph of `n` nodes: the rings give
    /// exact distances up to `h`, and every node outside the ball is at
    /// least `h + 1` away, so it is charged `h + 1`. Exact once the ball
    /// covers the graph.
    pub fn farness_estimate(&self, n: usize) -> f64 {
        let h = self.ring_sizes.len();
        let outside = n.saturating_sub(1 + self.reached());
        self.truncated_farness() + ((h + 1) * outside) as f64
    }
}

/// Which local score to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalMetric {
    Ego,
    Daccer,
    DistExact,
    Degree,
}

impl LocalMetric {
    pub fn compute(self, g: &Graph, h: u32) -> Result<NodeScores> {
        match self {
            LocalMetric::Ego => ego_closeness(g, h),
            LocalMetric::Daccer => daccer_vol(g, h),
            LocalMetric::DistExact => dist_exact_score(g, h),
            LocalMetric::Degree => Ok(crate::graph::degree_scores(g)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LocalMetric::Ego => "ego",
            LocalMetric::Daccer => "daccer",
            LocalMetric::DistExact => "dist-exact",
            LocalMetric::Degree => "degree",
        }
    }
}

impl std::str::FromStr for LocalMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ego" => Ok(LocalMetric::Ego),
            "daccer" => Ok(LocalMetric::Daccer),
            "dist-exact" => Ok(LocalMetric::DistExact),
            "degree" => Ok(LocalMetric::Degree),
            other => Err(Error::invalid(format!("unknown metric {other:?}"))),
        }
    }
}

fn check_radius(h: u32) -> Result<()> {
    if h < 1 {
        return Err(Error::invalid("radius h must be at least 1"));
    }
    Ok(())
}

fn rings_with(scratch: &mut BfsScratch, g: &Graph, v: NodeId, h: u32) -> EgoProfile {
    let mut ring_sizes = vec![0usize; h as usize];
    scratch.run(g, v, Some(h), |_, d| ring_sizes[d as usize - 1] += 1);
    EgoProfile { ring_sizes }
}

/// Ring sizes of `v` from a BFS truncated at radius `h`.
pub fn ego_rings(g: &Graph, v: NodeId, h: u32) -> Result<EgoProfile> {
    check_radius(h)?;
    g.check_node(v)?;
    Ok(rings_with(&mut BfsScratch::new(g.node_count()), g, v, h))
}

fn per_node<F>(g: &Graph, h: u32, score: F) -> Result<NodeScores>
where
    F: Fn(&mut BfsScratch, NodeId) -> f64 + Sync,
{
    check_radius(h)?;
    let n = g.node_count();
    let values = (0..n)
        .into_par_iter()
        .map_init(|| BfsScratch::new(n), |scratch, v| score(scratch, v))
        .collect();
    NodeScores::new(values)
}

/// Ego-closeness `sum_{t=1..h} |B_t(v)| / t` of every node.
pub fn ego_closeness(g: &Graph, h: u32) -> Result<NodeScores> {
    per_node(g, h, |scratch, v| {
        rings_with(scratch, g, v, h).ego_closeness()
    })
}

/// DACCER volume: total degree of the closed h-hop neighborhood of each node
/// (the node itself included).
pub fn daccer_vol(g: &Graph, h: u32) -> Result<NodeScores> {
    per_node(g, h, |scratch, v| {
        let mut vol = g.degree(v);
        scratch.run(g, v, Some(h), |u, _| vol += g.degree(u));
        vol as f64
    })
}

/// Dist-Exact baseline: farness estimated from the exact-distance rings up
/// to `h`, nodes beyond the ball counted at distance `h + 1` (see
/// [`EgoProfile::farness_estimate`]). Lower means more central.
///
/// The bare ring sum `sum_t t * |B_t(v)|` is not used as the score: it grows
/// with the size of the ball, so it ranks central nodes high rather than low.
pub fn dist_exact_score(g: &Graph, h: u32) -> Result<NodeScores> {
    let n = g.node_count();
    per_node(g, h, |scratch, v| {
        rings_with(scratch, g, v, h).farness_estimate(n)
    })
}

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

//! Feasible compressive measurements over a graph.
//!
//! A measurement is a set of nodes inducing a connected subgraph together
//! with the sum of a per-node signal over that set. The score-weighted
//! frontier walk grows the set one node at a time, drawing the next node
//! from the current frontier with probability proportional to its score.
//! The random-walk, degree-weighted (TopCent) and random-membership
//! (DICeNod) constructions serve as baselines.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{degree_scores, Graph, NodeId, NodeScores};
use crate::rng::{self, Rng};

/// Selection weight given to zero-score frontier nodes so the walk can
/// always advance.
pub const ZERO_WEIGHT_FLOOR: f64 = 1e-12;

const ROW_STREAM: &str = "measure-row";

/// Cumulative weights over frontier slots (a Fenwick tree), supporting
/// append, removal and weighted draws by binary descent in O(log n).
#[derive(Debug, Clone, Default)]
struct CumulativeWeights {
    tree: Vec<f64>,
    weights: Vec<f64>,
    active: usize,
    peak: f64,
}

impl CumulativeWeights {
    fn len(&self) -> usize {
        self.weights.len()
    }

    fn prefix(&self, mut i: usize) -> f64 {
        let mut sum = 0.0;
        while i > 0 {
            sum += self.tree[i - 1];
            i &= i - 1;
        }
        sum
    }

    fn add(&mut self, slot: usize, delta: f64) {
        let mut i = slot + 1;
        while i <= self.len() {
            self.tree[i - 1] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn push(&mut self, w: f64) -> usize {
        let i = self.len() + 1;
        let low = i & i.wrapping_neg();
        let node = w + self.prefix(i - 1) - self.prefix(i - low);
        self.weights.push(w);
        self.tree.push(node);
        self.active += 1;
        self.peak = self.peak.max(self.total());
        i - 1
    }

    fn remove(&mut self, slot: usize) {
        let w = std::mem::replace(&mut self.weights[slot], 0.0);
        debug_assert!(w > 0.0, "slot removed twice");
        self.add(slot, -w);
        self.active -= 1;
        // cancellation drift matters once most of the mass is gone
        if self.active > 0 && self.total() < 1e-6 * self.peak {
            self.rebuild();
        }
    }

    fn total(&self) -> f64 {
        self.prefix(self.len())
    }

    fn rebuild(&mut self) {
        let n = self.len();
        self.tree.copy_from_slice(&self.weights);
        for i in 1..=n {
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                let v = self.tree[i - 1];
                self.tree[parent - 1] += v;
            }
        }
        self.peak = self.total();
    }

    /// First slot whose inclusive prefix sum exceeds `target`.
    fn descend(&self, target: f64) -> usize {
        let n = self.len();
        let mut pos = 0;
        let mut rem = target;
        let mut step = if n == 0 {
            0
        } else {
            1 << (usize::BITS - 1 - n.leading_zeros())
        };
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next - 1] <= rem {
                pos = next;
                rem -= self.tree[next - 1];
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }

    fn nearest_active(&self, slot: usize) -> usize {
        (slot..self.len())
            .chain((0..slot).rev())
            .find(|&s| self.weights[s] > 0.0)
            .expect("at least one active slot")
    }

    fn draw(&mut self, rng: &mut Rng) -> Option<usize> {
        if self.active == 0 {
            return None;
        }
        let target = rng.random::<f64>() * self.total();
        let slot = self.descend(target);
        if self.weights[slot] > 0.0 {
            return Some(slot);
        }
        self.rebuild();
        let slot = self.descend(target.min(self.total()));
        Some(self.nearest_active(slot))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Membership {
    Visited,
    Frontier(usize),
}

/// Visited set `S` and its frontier `N(S)` during one frontier walk.
///
/// Invariants: `S` and `N(S)` are disjoint, `S` induces a connected
/// subgraph, and every frontier node has a neighbor in `S`.
#[derive(Debug, Clone)]
pub struct FrontierState<'a> {
    graph: &'a Graph,
    weights: &'a [f64],
    visited: Vec<NodeId>,
    membership: HashMap<NodeId, Membership>,
    slots: Vec<NodeId>,
    cumulative: CumulativeWeights,
}

impl<'a> FrontierState<'a> {
    /// Starts a walk at `start`; `weights[u]` is the selection weight of
    /// node `u` (floored at [`ZERO_WEIGHT_FLOOR`]).
    pub fn new(graph: &'a Graph, weights: &'a [f64], start: NodeId) -> Result<Self> {
        graph.check_node(start)?;
        if weights.len() != graph.node_count() {
            return Err(Error::invalid(format!(
                "{} selection weights for {} nodes",
                weights.len(),
                graph.node_count()
            )));
        }
        let mut state = FrontierState {
            graph,
            weights,
            visited: Vec::new(),
            membership: HashMap::new(),
            slots: Vec::new(),
            cumulative: CumulativeWeights::default(),
        };
        state.visit(start);
        Ok(state)
    }

    fn visit(&mut self, u: NodeId) {
        self.membership.insert(u, Membership::Visited);
        self.visited.push(u);
        for &v in self.graph.neighbors(u) {
            if !self.membership.contains_key(&v) {
                let slot = self.cumulative.push(self.weights[v].max(ZERO_WEIGHT_FLOOR));
                debug_assert_eq!(slot, self.slots.len());
                self.slots.push(v);
                self.membership.insert(v, Membership::Frontier(slot));
            }
        }
    }

    /// Visited nodes in the order they joined.
    pub fn visited(&self) -> &[NodeId] {
        &self.visited
    }

    /// Current frontier nodes in the order they were discovered.
    pub fn frontier(&self) -> Vec<NodeId> {
        self.slots
            .iter()
            .enumerate()
            .filter(|&(slot, _)| self.cumulative.weights[slot] > 0.0)
            .map(|(_, &u)| u)
            .collect()
    }

    pub fn frontier_len(&self) -> usize {
        self.cumulative.active
    }

    pub fn is_visited(&self, u: NodeId) -> bool {
        self.membership.get(&u) == Some(&Membership::Visited)
    }

    pub fn in_frontier(&self, u: NodeId) -> bool {
        matches!(self.membership.get(&u), Some(Membership::Frontier(_)))
    }

    /// Draws a frontier node with probability proportional to its weight
    /// without changing the state.
    pub fn sample(&mut self, rng: &mut Rng) -> Option<NodeId> {
        self.cumulative.draw(rng).map(|slot| self.slots[slot])
    }

    /// Draws the next node, moves it from the frontier into the visited set
    /// and adds its unseen neighbors to the frontier. Returns `None` once the
    /// component is exhausted.
    pub fn advance(&mut self, rng: &mut Rng) -> Option<NodeId> {
        let slot = self.cumulative.draw(rng)?;
        let u = self.slots[slot];
        self.cumulative.remove(slot);
        self.visit(u);
        Some(u)
    }
}

/// One measurement: nodes in visit order and the aggregated signal.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkRow {
    pub support: Vec<NodeId>,
    pub y: f64,
}

fn frontier_row(
    g: &Graph,
    selection: &[f64],
    signal: &[f64],
    start: NodeId,
    l: usize,
    rng: &mut Rng,
) -> Result<WalkRow> {
    let mut state = FrontierState::new(g, selection, start)?;
    for _ in 0..l {
        if state.advance(rng).is_none() {
            break;
        }
    }
    let support = state.visited;
    let y = support.iter().map(|&u| signal[u]).sum();
    Ok(WalkRow { support, y })
}

/// Score-weighted frontier walk of `l` extensions from `start`. The same
/// scores drive selection and aggregation. Stops early when the component
/// runs out of nodes.
pub fn build_measurement(
    g: &Graph,
    scores: &NodeScores,
    start: NodeId,
    l: usize,
    rng: &mut Rng,
) -> Result<WalkRow> {
    check_scores(g, scores)?;
    frontier_row(g, scores.as_slice(), scores.as_slice(), start, l, rng)
}

/// A binary measurement matrix in sparse row form with its measurement
/// vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSystem {
    /// Sorted node ids of each row.
    pub rows: Vec<Vec<NodeId>>,
    pub y: Vec<f64>,
    pub node_count: usize,
    /// Walk length `l`; `None` for constructions without walks.
    pub walk_length: Option<usize>,
}

impl MeasurementSystem {
    /// Builds a system from row supports, sorting each row and aggregating
    /// `signal` over it.
    pub fn from_supports(
        supports: Vec<Vec<NodeId>>,
        signal: &[f64],
        walk_length: Option<usize>,
    ) -> Result<Self> {
        let node_count = signal.len();
        let mut rows = Vec::with_capacity(supports.len());
        let mut y = Vec::with_capacity(supports.len());
        for mut row in supports {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidMeasurements("repeated node in a row".into()));
            }
            if let Some(&u) = row.iter().find(|&&u| u >= node_count) {
                return Err(Error::NodeOutOfRange {
                    node: u,
                    node_count,
                });
            }
            y.push(row.iter().map(|&u| signal[u]).sum());
            rows.push(row);
        }
        Ok(MeasurementSystem {
            rows,
            y,
            node_count,
            walk_length,
        })
    }

    pub fn num_measurements(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Checks dimensions, row canonical form and finiteness of `y`.
    pub fn validate(&self) -> Result<()> {
        if self.rows.len() != self.y.len() {
            return Err(Error::InvalidMeasurements(format!(
                "{} rows but {} measurements",
                self.rows.len(),
                self.y.len()
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidMeasurements(format!(
                    "row {i} is not strictly increasing"
                )));
            }
            if let Some(&u) = row.last().filter(|&&u| u >= self.node_count) {
                return Err(Error::NodeOutOfRange {
                    node: u,
                    node_count: self.node_count,
                });
            }
        }
        if let Some(i) = self.y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasurements(format!(
                "measurement {i} is not finite"
            )));
        }
        Ok(())
    }

    /// `A x`
    pub fn multiply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&j| x[j]).sum())
            .collect()
    }

    /// `A^T r`
    pub fn transpose_multiply(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.node_count];
        for (row, &ri) in self.rows.iter().zip(r) {
            for &j in row {
                out[j] += ri;
            }
        }
        out
    }

    /// Writes one line per row: `y: id id ...` with ids ascending.
    pub fn write_rows<W: Write>(&self, mut out: W) -> Result<()> {
        for (row, y) in self.rows.iter().zip(&self.y) {
            write!(out, "{y}:")?;
            for u in row {
                write!(out, " {u}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Reads the row format written by [`write_rows`](Self::write_rows).
    pub fn read_rows<R: BufRead>(
        reader: R,
        node_count: usize,
        walk_length: Option<usize>,
    ) -> Result<Self> {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let (value, ids) = line
                .split_once(':')
                .ok_or_else(|| parse_err("missing ':' after measurement value".into()))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("invalid measurement value {value:?}")))?;
            let row = ids
                .split_whitespace()
                .map(|t| {
                    t.parse::<NodeId>()
                        .map_err(|_| parse_err(format!("invalid node id {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
            y.push(value);
        }
        let ms = MeasurementSystem {
            rows,
            y,
            node_count,
            walk_length,
        };
        ms.validate()?;
        Ok(ms)
    }
}

/// Measurement constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builder {
    /// Frontier walk weighted by the aggregated scores.
    Hiclose,
    /// Uniform random walk; revisits collapse into the binary row.
    Rw,
    /// Frontier walk weighted by degree.
    Topcent,
    /// Independent random membership, no walks.
    Dicenod,
}

impl Builder {
    pub fn name(self) -> &'static str {
        match self {
            Builder::Hiclose => "hiclose",
            Builder::Rw => "rw",
            Builder::Topcent => "topcent",
            Builder::Dicenod => "dicenod",
        }
    }

    pub fn is_walk(self) -> bool {
        self != Builder::Dicenod
    }

    /// Builds `m` rows aggregating `signal`. `l` is the walk length for the
    /// walk builders. For DICeNod, `d` is the expected column weight; when
    /// absent it is chosen so the mean row size equals `l + 1`.
    pub fn build(
        self,
        g: &Graph,
        signal: &NodeScores,
        m: usize,
        l: usize,
        d: Option<f64>,
        seed: u64,
    ) -> Result<MeasurementSystem> {
        match self {
            Builder::Hiclose => build_matrix(g, signal, m, l, seed),
            Builder::Rw => build_matrix_rw(g, signal, m, l, seed),
            Builder::Topcent => build_matrix_topcent(g, signal, m, l, seed),
            Builder::Dicenod => {
                let d = match d {
                    Some(d) => d,
                    None => dicenod_degree_for_row_size(g.node_count(), m, (l + 1) as f64)?,
                };
                build_matrix_dicenod(g, signal, m, d, seed)
            }
        }
    }
}

impl std::str::FromStr for Builder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hiclose" => Ok(Builder::Hiclose),
            "rw" => Ok(Builder::Rw),
            "topcent" => Ok(Builder::Topcent),
            "dicenod" => Ok(Builder::Dicenod),
            other => Err(Error::invalid(format!("unknown builder {other:?}"))),
        }
    }
}

fn check_scores(g: &Graph, scores: &NodeScores) -> Result<()> {
    if scores.len() != g.node_count() {
        return Err(Error::invalid(format!(
            "{} scores for {} nodes",
            scores.len(),
            g.node_count()
        )));
    }
    Ok(())
}

fn check_shape(g: &Graph, signal: &NodeScores, m: usize) -> Result<()> {
    check_scores(g, signal)?;
    if m < 1 {
        return Err(Error::invalid("at least one measurement is required"));
    }
    if g.node_count() == 0 {
        return Err(Error::invalid("graph has no nodes"));
    }
    Ok(())
}

fn walk_rows<F>(g: &Graph, m: usize, seed: u64, row: F) -> Result<Vec<Vec<NodeId>>>
where
    F: Fn(NodeId, &mut Rng) -> Result<Vec<NodeId>> + Sync,
{
    let n = g.node_count();
    (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, ROW_STREAM, i as u64);
            let start = rng.random_range(0..n);
            row(start, &mut rng)
        })
        .collect()
}

/// `m` score-weighted frontier walks of length `l`, each from a uniformly
/// drawn start. Deterministic in `seed`; rows are independent streams.
pub fn build_matrix(
    g: &Graph,
    scores: &NodeScores,
    m: usize,
    l: usize,
    seed: u64,
) -> Result<MeasurementSystem> {
    check_shape(g, scores, m)?;
    let s = scores.as_slice();
    let rows = walk_rows(g, m, seed, |start, rng| {
        Ok(frontier_row(g, s, s, start, l, rng)?.support)
    })?;
    MeasurementSystem::from_supports(rows, s, Some(l))
}

/// Frontier walks selecting by degree, aggregating `signal`.
pub fn build_matrix_topcent(
    g: &Graph,
    signal: &NodeScores,
    m: usize,
    l: usize,
    seed: u64,
) -> Result<MeasurementSystem> {
    check_shape(g, signal, m)?;
    let degrees = degree_scores(g);
    let (sel, s) = (degrees.as_slice(), signal.as_slice());
    let rows = walk_rows(g, m, seed, |start, rng| {
        Ok(frontier_row(g, sel, s, start, l, rng)?.support)
    })?;
    MeasurementSystem::from_supports(rows, s, Some(l))
}

/// Uniform random walks of `l` steps; a row holds the distinct nodes seen.
pub fn build_matrix_rw(
    g: &Graph,
    signal: &NodeScores,
    m: usize,
    l: usize,
    seed: u64,
) -> Result<MeasurementSystem> {
    check_shape(g, signal, m)?;
    let rows = walk_rows(g, m, seed, |start, rng| {
        let mut seen = vec![start];
        let mut current = start;
        for _ in 0..l {
            let nbrs = g.neighbors(current);
            if nbrs.is_empty() {
                break;
            }
            current = nbrs[rng.random_range(0..nbrs.len())];
            seen.push(current);
        }
        seen.sort_unstable();
        seen.dedup();
        Ok(seen)
    })?;
    MeasurementSystem::from_supports(rows, signal.as_slice(), Some(l))
}

/// Column weight `d` giving an expected row size of `mean_row_size`.
pub fn dicenod_degree_for_row_size(n: usize, m: usize, mean_row_size: f64) -> Result<f64> {
    if n == 0 || m == 0 || !(mean_row_size > 0.0) {
        return Err(Error::invalid("row size, n and m must be positive"));
    }
    Ok((mean_row_size * m as f64 / n as f64).min(m as f64))
}

/// Every node joins every row independently with probability `d / m`.
/// Rows need not be connected.
pub fn build_matrix_dicenod(
    g: &Graph,
    signal: &NodeScores,
    m: usize,
    d: f64,
    seed: u64,
) -> Result<MeasurementSystem> {
    check_shape(g, signal, m)?;
    if !(d > 0.0 && d <= m as f64) {
        return Err(Error::invalid(format!(
            "column weight d must lie in (0, m] (got d={d}, m={m})"
        )));
    }
    let n = g.node_count();
    let q = d / m as f64;
    let rows = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, "measure-dicenod", i as u64);
            if q >= 1.0 {
                return (0..n).collect();
            }
            // geometric gaps between members
            let log_miss = (1.0 - q).ln();
            let mut row = Vec::new();
            let mut pos = 0usize;
            loop {
                let u: f64 = rng.random();
                let gap = ((1.0 - u).ln() / log_miss).floor();
                if gap >= (n - pos) as f64 {
                    break;
                }
                pos += gap as usize;
                row.push(pos);
                pos += 1;
            }
            row
        })
        .collect();
    MeasurementSystem::from_supports(rows, signal.as_slice(), None)
}

/// Per-row connectivity of a measurement system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub per_row: Vec<bool>,
    /// Fraction of feasible rows.
    pub fraction: f64,
}

/// Whether `support` (sorted, distinct) induces a connected subgraph. The
/// empty set does not.
pub fn support_is_connected(g: &Graph, support: &[NodeId]) -> bool {
    let Some(&first) = support.first() else {
        return false;
    };
    let mut seen = vec![false; support.len()];
    seen[0] = true;
    let mut stack = vec![first];
    let mut reached = 1;
    while let Some(u) = stack.pop() {
        for &v in g.neighbors(u) {
            if let Ok(idx) = support.binary_search(&v) {
                if !seen[idx] {
                    seen[idx] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
    }
    reached == support.len()
}

pub fn verify_feasibility(g: &Graph, ms: &MeasurementSystem) -> FeasibilityReport {
    let per_row: Vec<bool> = ms
        .rows
        .par_iter()
        .map(|row| support_is_connected(g, row))
        .collect();
    let fraction = if per_row.is_empty() {
        1.0
    } else {
        per_row.iter().filter(|&&ok| ok).count() as f64 / per_row.len() as f64
    };
    FeasibilityReport { per_row, fraction }
}

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

//! Whitespace-separated edge-list text format.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{Graph, NodeId};
use crate::error::{Error, Result};

/// Reads an edge list: one `u v` pair per line, `#` starts a comment line,
/// extra columns (weights, timestamps) are ignored. External ids may be any
/// non-negative integers; they are remapped to `0..n` in ascending order and
/// kept as node labels.
///
/// The graph is always undirected. With `directed` set, `u v` and `v u` are
/// read as the two arcs of one symmetrized edge, which is also what happens
/// without it; the flag only documents the source's semantics.
pub fn load_edge_list<R: BufRead>(reader: R, directed: bool) -> Result<Graph> {
    let _ = directed;
    let mut raw: Vec<(u64, u64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next_id = || -> Result<u64> {
            let token = tokens.next().ok_or_else(|| Error::Parse {
                line: line_no,
                message: "expected two node ids".into(),
            })?;
            token.parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid node id {token:?}"),
            })
        };
        let u = next_id()?;
        let v = next_id()?;
        raw.push((u, v));
    }
    if raw.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut labels: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    labels.sort_unstable();
    labels.dedup();
    let index: HashMap<u64, NodeId> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let edges: Vec<(NodeId, NodeId)> = raw.iter().map(|(u, v)| (index[u], index[v])).collect();
    Graph::from_edges_labeled(labels, edges)
}

/// Writes one `u v` line per edge (`u < v`) using node labels, preceded by a
/// comment header with the node and edge counts.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "# nodes: {} edges: {}", g.node_count(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "{} {}", g.label(u), g.label(v))?;
    }
    Ok(())
}

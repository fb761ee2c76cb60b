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

//! Ego-closeness centrality and compressive-sensing detection of
//! high-closeness nodes.
//!
//! The pipeline: compute a cheap local score for every node from its h-hop
//! ball ([`metrics`]), aggregate it along connected, score-weighted frontier
//! walks into a small number of linear measurements ([`measure`]), recover a
//! sparse approximation of the score vector with an l1-regularized solver
//! ([`recovery`]), and read off the top-k nodes. [`eval`] and
//! [`experiment`] score the result against exact closeness.

pub mod error;
pub mod eval;
pub mod experiment;
pub mod graph;
pub mod measure;
pub mod metrics;
pub mod recovery;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId, NodeScores};
pub use measure::{Builder, MeasurementSystem};
pub use metrics::LocalMetric;
pub use recovery::{LassoOptions, RankedNodes, RecoveryResult, Solver};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

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

//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "egoclose",
    version,
    about = "Ego-closeness centrality and compressive top-k closeness recovery"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic graph as an edge list.
    Gen(GenArgs),
    /// Network statistics of the largest component.
    Stats(StatsArgs),
    /// Local centrality scores, one per node.
    Metric(MetricArgs),
    /// Build a measurement system over a graph.
    Measure(MeasureArgs),
    /// Recover a sparse signal from a measurement system.
    Recover(RecoverArgs),
    /// Score a recovered vector against top-k closeness.
    Eval(EvalArgs),
    /// Run a repeated experiment, optionally sweeping one parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Ba,
    Er,
    Ws,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Edge probability (erdos-renyi).
    #[arg(long)]
    pub p: Option<f64>,
    /// Target average degree (erdos-renyi), used when --p is absent.
    #[arg(long)]
    pub avg_degree: Option<f64>,
    /// Edges per new node (barabasi-albert).
    #[arg(long)]
    pub attach: Option<usize>,
    /// Lattice neighbors, even (watts-strogatz).
    #[arg(long)]
    pub k_nbrs: Option<usize>,
    /// Rewiring probability (watts-strogatz).
    #[arg(long)]
    pub rewire: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphInput {
    /// Edge-list file; the largest connected component is used.
    #[arg(long)]
    pub graph: PathBuf,
    /// Treat the edge list as directed (edges are symmetrized).
    #[arg(long)]
    pub directed: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: GraphInput,
    /// Estimate distances from this many sampled sources instead of all.
    #[arg(long)]
    pub sample_sources: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricName {
    Ego,
    Daccer,
    DistExact,
    Degree,
    /// Exact closeness (global; for reference).
    Closeness,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MetricArgs {
    #[command(flatten)]
    pub input: GraphInput,
    #[arg(long, value_enum, default_value_t = MetricName::Ego)]
    pub metric: MetricName,
    #[arg(long, default_value_t = 2)]
    pub h: u32,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuilderName {
    Hiclose,
    Rw,
    Topcent,
    Dicenod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalMetric {
    Ego,
    Daccer,
    DistExact,
    Degree,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub input: GraphInput,
    /// Node signal aggregated by the measurements.
    #[arg(long, value_enum, default_value_t = SignalMetric::Ego)]
    pub metric: SignalMetric,
    #[arg(long, default_value_t = 2)]
    pub h: u32,
    #[arg(long, value_enum, default_value_t = BuilderName::Hiclose)]
    pub builder: BuilderName,
    /// Number of measurements: a count, or a fraction of the node count.
    #[arg(long, default_value = "0.4")]
    pub m: String,
    /// Walk length: a count, or a fraction of the node count.
    #[arg(long, default_value = "0.25")]
    pub l: String,
    /// Expected column weight for dicenod.
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverName {
    Auto,
    InteriorPoint,
    ProximalGradient,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Restrict the solution to x >= 0.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub nonneg: Option<bool>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverName>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RecoverArgs {
    /// Measurement rows written by `measure` (its JSON sidecar is read too).
    #[arg(long)]
    pub matrix: PathBuf,
    /// Graph the matrix was built on; when given, output ids are the
    /// graph's node labels rather than column indices.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub directed: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: GraphInput,
    /// `node_id,value` CSV (as written by `recover` or `metric`).
    #[arg(long)]
    pub scores: PathBuf,
    /// Top-k size: a count, or a fraction of the node count.
    #[arg(long, default_value = "0.15")]
    pub k: String,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// TOML experiment configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub directed: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub metric: Option<SignalMetric>,
    #[arg(long)]
    pub h: Option<u32>,
    #[arg(long, value_enum)]
    pub builder: Option<BuilderName>,
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub l: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub d: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// First seed; runs use seeds seed..seed+reps.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of repetitions.
    #[arg(long)]
    pub reps: Option<u64>,
    /// Parameter to sweep (k, m, l or lambda), with --values.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<String>>,
    /// Resume from / append to this JSON-lines checkpoint.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Output directory for runs.csv, summary.csv and manifest.json.
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

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

//! Subcommand implementations.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use egoclose::experiment::{
    run_experiment_with_checkpoint, score_recovery, write_runs_csv, write_summary_csv, GraphSpec,
    Size, Sweep, SweepConfig, SweepParam,
};
use egoclose::graph::{
    closeness_exact, largest_connected_component, load_edge_list, network_stats,
    network_stats_sampled, write_edge_list, NetworkStats,
};
use egoclose::measure::verify_feasibility;
use egoclose::recovery::{kkt_residual, kkt_residual_nonneg, lasso_solve};
use egoclose::{Builder, Graph, LassoOptions, LocalMetric, MeasurementSystem, Solver};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cli::{
    BuilderName, EvalArgs, GenArgs, GraphInput, MeasureArgs, MetricArgs, MetricName, Model,
    ModelArgs, RecoverArgs, SignalMetric, SolverArgs, SolverName, StatsArgs, SweepArgs,
};
use crate::error::Failure;
use crate::manifest::{manifest_path, sibling, RunManifest};

type Outcome = Result<(), Failure>;

const DEFAULT_SEED: u64 = 42;
const DEFAULT_REPS: u64 = 10;

/// Metadata written next to a measurement rows file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub m: usize,
    pub l: usize,
    pub seed: u64,
    pub builder: Builder,
    pub score_metric: LocalMetric,
    pub h: u32,
    /// Number of columns (nodes of the graph's largest component).
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    pub feasible_fraction: f64,
    pub graph_sha256: String,
}

/// Summary written next to a recovered vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoverySummary {
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
    pub solver: Solver,
    pub lambda: f64,
    pub nonneg: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalOutput {
    pub nodes: usize,
    pub k: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::output(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::output(path, e))
}

fn write_with<F>(path: &Path, body: F) -> Outcome
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut out = create(path)?;
    body(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Failure::output(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::input(path, e))
}

/// Largest component of an edge-list file.
fn load_graph(input: &GraphInput, manifest: &mut RunManifest) -> Result<Graph, Failure> {
    manifest.input(&input.graph)?;
    let g = load_edge_list(open(&input.graph)?, input.directed)
        .map_err(|e| Failure::in_input(&input.graph, e))?;
    Ok(largest_connected_component(&g))
}

fn parse_size(what: &str, s: &str) -> Result<Size, Failure> {
    s.parse::<Size>()
        .map_err(|e| Failure::usage(format!("--{what}: {e}")))
}

fn resolve_size(what: &str, size: Size, n: usize) -> Result<usize, Failure> {
    if let Size::Fraction(f) = size {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Failure::usage(format!(
                "--{what}: fraction {f} must lie in (0, 1]"
            )));
        }
    }
    Ok(size.resolve(n))
}

fn finish(mut manifest: RunManifest, outputs: &[&Path], manifest_file: &Path) -> Outcome {
    for path in outputs {
        manifest.output(path)?;
    }
    manifest.write(manifest_file)
}

impl From<SignalMetric> for LocalMetric {
    fn from(m: SignalMetric) -> Self {
        match m {
            SignalMetric::Ego => LocalMetric::Ego,
            SignalMetric::Daccer => LocalMetric::Daccer,
            SignalMetric::DistExact => LocalMetric::DistExact,
            SignalMetric::Degree => LocalMetric::Degree,
        }
    }
}

impl From<BuilderName> for Builder {
    fn from(b: BuilderName) -> Self {
        match b {
            BuilderName::Hiclose => Builder::Hiclose,
            BuilderName::Rw => Builder::Rw,
            BuilderName::Topcent => Builder::Topcent,
            BuilderName::Dicenod => Builder::Dicenod,
        }
    }
}

impl From<SolverName> for Solver {
    fn from(s: SolverName) -> Self {
        match s {
            SolverName::Auto => Solver::Auto,
            SolverName::InteriorPoint => Solver::InteriorPoint,
            SolverName::ProximalGradient => Solver::ProximalGradient,
        }
    }
}

/// Generator spec from flags, with the desk-scale defaults for whatever
/// is left unset.
fn model_spec(args: &ModelArgs) -> Result<Option<GraphSpec>, Failure> {
    let Some(model) = args.model else {
        return Ok(None);
    };
    let n = args.n.unwrap_or(500);
    Ok(Some(match model {
        Model::Ba => GraphSpec::Ba {
            n,
            attach: args.attach.unwrap_or(5),
        },
        Model::Er => GraphSpec::Er {
            n,
            p: args.p,
            avg_degree: match args.p {
                Some(_) => None,
                None => Some(args.avg_degree.unwrap_or(16.0)),
            },
        },
        Model::Ws => GraphSpec::Ws {
            n,
            k_nbrs: args.k_nbrs.unwrap_or(8),
            rewire: args.rewire.unwrap_or(0.2),
        },
    }))
}

/// Applies the generator flags that match `spec`'s model.
fn patch_spec(spec: &mut GraphSpec, args: &ModelArgs) {
    match spec {
        GraphSpec::Ba { n, attach } => {
            *n = args.n.unwrap_or(*n);
            *attach = args.attach.unwrap_or(*attach);
        }
        GraphSpec::Er { n, p, avg_degree } => {
            *n = args.n.unwrap_or(*n);
            if args.p.is_some() {
                *p = args.p;
                *avg_degree = None;
            } else if args.avg_degree.is_some() {
                *avg_degree = args.avg_degree;
                *p = None;
            }
        }
        GraphSpec::Ws { n, k_nbrs, rewire } => {
            *n = args.n.unwrap_or(*n);
            *k_nbrs = args.k_nbrs.unwrap_or(*k_nbrs);
            *rewire = args.rewire.unwrap_or(*rewire);
        }
        GraphSpec::File { .. } => {}
    }
}

pub fn gen(args: &GenArgs) -> Outcome {
    let spec = model_spec(&args.model)?
        .ok_or_else(|| Failure::usage("gen requires --model (ba, er or ws)"))?;
    let g = spec.build(args.seed)?;
    write_with(&args.output, |out| {
        write_edge_list(&g, &mut *out).map_err(std::io::Error::other)
    })?;
    let config = json!({ "graph": spec, "seed": args.seed });
    let manifest = RunManifest::new("gen", config, Some(args.seed));
    finish(manifest, &[&args.output], &manifest_path(&args.output))
}

pub fn stats(args: &StatsArgs) -> Outcome {
    let mut manifest = RunManifest::new(
        "stats",
        serde_json::to_value(args).map_err(Failure::runtime)?,
        Some(args.seed),
    );
    let g = load_graph(&args.input, &mut manifest)?;
    let stats: NetworkStats = match args.sample_sources {
        Some(s) => network_stats_sampled(&g, s, args.seed)?,
        None => network_stats(&g)?,
    };
    write_with(&args.output, |out| {
        writeln!(out, "{}", NetworkStats::CSV_HEADER)?;
        writeln!(out, "{}", stats.csv_row())
    })?;
    finish(manifest, &[&args.output], &manifest_path(&args.output))
}

fn write_node_values(path: &Path, g: &Graph, header: &str, values: &[f64]) -> Outcome {
    write_with(path, |out| {
        writeln!(out, "node_id,{header}")?;
        for (u, v) in values.iter().enumerate() {
            writeln!(out, "{},{v}", g.label(u))?;
        }
        Ok(())
    })
}

pub fn metric(args: &MetricArgs) -> Outcome {
    let mut manifest = RunManifest::new(
        "metric",
        serde_json::to_value(args).map_err(Failure::runtime)?,
        None,
    );
    let g = load_graph(&args.input, &mut manifest)?;
    let scores = match args.metric {
        MetricName::Closeness => closeness_exact(&g)?,
        MetricName::Ego => LocalMetric::Ego.compute(&g, args.h)?,
        MetricName::Daccer => LocalMetric::Daccer.compute(&g, args.h)?,
        MetricName::DistExact => LocalMetric::DistExact.compute(&g, args.h)?,
        MetricName::Degree => LocalMetric::Degree.compute(&g, args.h)?,
    };
    write_node_values(&args.output, &g, "score", scores.as_slice())?;
    finish(manifest, &[&args.output], &manifest_path(&args.output))
}

pub fn measure(args: &MeasureArgs) -> Outcome {
    let mut manifest = RunManifest::new("measure", serde_json::Value::Null, Some(args.seed));
    let g = load_graph(&args.input, &mut manifest)?;
    let n = g.node_count();
    let m = resolve_size("m", parse_size("m", &args.m)?, n)?;
    let l = resolve_size("l", parse_size("l", &args.l)?, n)?;
    let metric = LocalMetric::from(args.metric);
    let builder = Builder::from(args.builder);
    let signal = metric.compute(&g, args.h)?;
    let ms = builder.build(&g, &signal, m, l, args.d, args.seed)?;

    let sidecar = MatrixSidecar {
        m,
        l,
        seed: args.seed,
        builder,
        score_metric: metric,
        h: args.h,
        n,
        d: args.d,
        feasible_fraction: verify_feasibility(&g, &ms).fraction,
        graph_sha256: manifest.inputs[0].sha256.clone(),
    };
    write_with(&args.output, |out| {
        ms.write_rows(&mut *out).map_err(std::io::Error::other)
    })?;
    let sidecar_path = sibling(&args.output, "json");
    write_with(&sidecar_path, |out| {
        serde_json::to_writer_pretty(&mut *out, &sidecar)?;
        writeln!(out)
    })?;
    manifest.config = json!({ "args": args, "resolved": sidecar });
    finish(
        manifest,
        &[&args.output, &sidecar_path],
        &manifest_path(&args.output),
    )
}

fn lasso_options(args: &SolverArgs, base: LassoOptions) -> LassoOptions {
    LassoOptions {
        lambda: args.lambda.unwrap_or(base.lambda),
        nonneg: args.nonneg.unwrap_or(base.nonneg),
        tol: args.tol.unwrap_or(base.tol),
        max_iter: args.max_iter.unwrap_or(base.max_iter),
        solver: args.solver.map(Solver::from).unwrap_or(base.solver),
    }
}

pub fn recover(args: &RecoverArgs) -> Outcome {
    let mut manifest = RunManifest::new("recover", serde_json::Value::Null, None);
    let sidecar_path = sibling(&args.matrix, "json");
    manifest.input(&args.matrix)?;
    manifest.input(&sidecar_path)?;
    let sidecar: MatrixSidecar = serde_json::from_reader(open(&sidecar_path)?)
        .map_err(|e| Failure::usage(format!("{}: {e}", sidecar_path.display())))?;
    manifest.seed = Some(sidecar.seed);
    let walk_length = sidecar.builder.is_walk().then_some(sidecar.l);
    let ms = MeasurementSystem::read_rows(open(&args.matrix)?, sidecar.n, walk_length)
        .map_err(|e| Failure::in_input(&args.matrix, e))?;
    if ms.num_measurements() != sidecar.m {
        return Err(Failure::usage(format!(
            "{}: {} rows but the sidecar records m = {}",
            args.matrix.display(),
            ms.num_measurements(),
            sidecar.m
        )));
    }
    let graph = match &args.graph {
        Some(path) => {
            let input = GraphInput {
                graph: path.clone(),
                directed: args.directed,
            };
            let g = load_graph(&input, &mut manifest)?;
            if g.node_count() != sidecar.n {
                return Err(Failure::usage(format!(
                    "graph has {} nodes but the matrix has {} columns",
                    g.node_count(),
                    sidecar.n
                )));
            }
            Some(g)
        }
        None => None,
    };

    let opts = lasso_options(&args.solver, LassoOptions::default());
    let rec = lasso_solve(&ms, &opts)?;
    let kkt = if opts.nonneg {
        kkt_residual_nonneg(&ms, &rec.x_hat, opts.lambda)
    } else {
        kkt_residual(&ms, &rec.x_hat, opts.lambda)
    };
    write_with(&args.output, |out| {
        writeln!(out, "node_id,value")?;
        for (u, v) in rec.x_hat.iter().enumerate() {
            let id = graph.as_ref().map_or(u as u64, |g| g.label(u));
            writeln!(out, "{id},{v}")?;
        }
        Ok(())
    })?;
    let summary = RecoverySummary {
        objective: rec.objective_value,
        iterations: rec.iterations,
        converged: rec.converged,
        kkt_residual: kkt,
        solver: rec.solver,
        lambda: opts.lambda,
        nonneg: opts.nonneg,
    };
    let summary_path = sibling(&args.output, "summary.json");
    write_with(&summary_path, |out| {
        serde_json::to_writer_pretty(&mut *out, &summary)?;
        writeln!(out)
    })?;
    manifest.config = json!({ "args": args, "options": opts });
    finish(
        manifest,
        &[&args.output, &summary_path],
        &manifest_path(&args.output),
    )
}

/// Reads a `node_id,value` CSV into a vector indexed like `g`.
fn read_node_values(path: &Path, g: &Graph) -> Result<Vec<f64>, Failure> {
    let index: HashMap<u64, usize> = (0..g.node_count()).map(|u| (g.label(u), u)).collect();
    let mut values = vec![None; g.node_count()];
    for (idx, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Failure::input(path, e))?;
        let line = line.trim();
        if line.is_empty() || (idx == 0 && line.starts_with("node_id")) {
            continue;
        }
        let bad = |what: &str| Failure::usage(format!("{}:{}: {what}", path.display(), idx + 1));
        let (id, value) = line
            .split_once(',')
            .ok_or_else(|| bad("expected node_id,value"))?;
        let id: u64 = id.trim().parse().map_err(|_| bad("bad node id"))?;
        let value: f64 = value.trim().parse().map_err(|_| bad("bad value"))?;
        let &u = index.get(&id).ok_or_else(|| bad("node not in the graph"))?;
        values[u] = Some(value);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(u, v)| {
            v.ok_or_else(|| {
                Failure::usage(format!(
                    "{}: no value for node {}",
                    path.display(),
                    g.label(u)
                ))
            })
        })
        .collect()
}

pub fn eval(args: &EvalArgs) -> Outcome {
    let mut manifest = RunManifest::new("eval", serde_json::Value::Null, None);
    let g = load_graph(&args.input, &mut manifest)?;
    manifest.input(&args.scores)?;
    let x_hat = read_node_values(&args.scores, &g)?;
    let n = g.node_count();
    let k = resolve_size("k", parse_size("k", &args.k)?, n)?;
    let closeness = closeness_exact(&g)?;
    let score = score_recovery(&x_hat, closeness.as_slice(), k)?;
    let report = EvalOutput {
        nodes: n,
        k,
        precision: score.precision,
        recall: score.recall,
        f_measure: score.f_measure,
    };
    write_with(&args.output, |out| {
        serde_json::to_writer_pretty(&mut *out, &report)?;
        writeln!(out)
    })?;
    manifest.config = json!({ "args": args, "k_resolved": k });
    finish(manifest, &[&args.output], &manifest_path(&args.output))
}

fn sweep_config(args: &SweepArgs, manifest: &mut RunManifest) -> Result<SweepConfig, Failure> {
    let base = match &args.config {
        Some(path) => {
            manifest.input(path)?;
            let text = fs::read_to_string(path).map_err(|e| Failure::input(path, e))?;
            Some(SweepConfig::from_toml(&text).map_err(|e| Failure::in_input(path, e))?)
        }
        None => None,
    };

    let mut graph = base.as_ref().map(|c| c.graph.clone());
    if let Some(path) = &args.graph {
        graph = Some(GraphSpec::File {
            path: path.clone(),
            directed: args.directed,
        });
    } else if let Some(spec) = model_spec(&args.model)? {
        if !matches!((&graph, &spec), (Some(a), b) if std::mem::discriminant(a) == std::mem::discriminant(b))
        {
            graph = Some(spec);
        }
    }
    let mut graph =
        graph.ok_or_else(|| Failure::usage("sweep needs a graph: --config, --graph or --model"))?;
    patch_spec(&mut graph, &args.model);

    let mut cfg = match base {
        Some(cfg) => SweepConfig { graph, ..cfg },
        None => SweepConfig {
            graph,
            metric: LocalMetric::Ego,
            h: egoclose::metrics::DEFAULT_RADIUS,
            builder: Builder::Hiclose,
            m: Size::Fraction(0.4),
            l: Size::Fraction(0.25),
            k: Size::Fraction(0.15),
            d: None,
            seeds: (DEFAULT_SEED..DEFAULT_SEED + DEFAULT_REPS).collect(),
            lambda: LassoOptions::default().lambda,
            nonneg: LassoOptions::default().nonneg,
            tol: LassoOptions::default().tol,
            max_iter: LassoOptions::default().max_iter,
            solver: Solver::Auto,
            sweep: None,
        },
    };
    if let Some(m) = args.metric {
        cfg.metric = m.into();
    }
    if let Some(h) = args.h {
        cfg.h = h;
    }
    if let Some(b) = args.builder {
        cfg.builder = b.into();
    }
    if let Some(m) = &args.m {
        cfg.m = parse_size("m", m)?;
    }
    if let Some(l) = &args.l {
        cfg.l = parse_size("l", l)?;
    }
    if let Some(k) = &args.k {
        cfg.k = parse_size("k", k)?;
    }
    if args.d.is_some() {
        cfg.d = args.d;
    }
    let opts = lasso_options(
        &args.solver,
        LassoOptions {
            lambda: cfg.lambda,
            nonneg: cfg.nonneg,
            tol: cfg.tol,
            max_iter: cfg.max_iter,
            solver: cfg.solver,
        },
    );
    cfg.lambda = opts.lambda;
    cfg.nonneg = opts.nonneg;
    cfg.tol = opts.tol;
    cfg.max_iter = opts.max_iter;
    cfg.solver = opts.solver;
    if args.seed.is_some() || args.reps.is_some() {
        let start = args.seed.unwrap_or(cfg.seeds[0]);
        let reps = args.reps.unwrap_or(cfg.seeds.len() as u64);
        cfg.seeds = (start..start + reps).collect();
    }
    match (&args.sweep, &args.values) {
        (Some(param), Some(values)) => {
            let param: SweepParam = param.parse()?;
            let values = values
                .iter()
                .map(|v| parse_size(param.name(), v))
                .collect::<Result<Vec<_>, _>>()?;
            cfg.sweep = Some(Sweep { param, values });
        }
        (None, None) => {}
        _ => return Err(Failure::usage("--sweep and --values go together")),
    }
    cfg.validate()?;
    if let GraphSpec::File { path, .. } = &cfg.graph {
        manifest.input(path)?;
    }
    Ok(cfg)
}

pub fn sweep(args: &SweepArgs) -> Outcome {
    let mut manifest = RunManifest::new("sweep", serde_json::Value::Null, None);
    let cfg = sweep_config(args, &mut manifest)?;
    manifest.seed = cfg.seeds.first().copied();
    let reports = run_experiment_with_checkpoint(&cfg, args.checkpoint.as_deref())?;

    let dir = &args.output;
    fs::create_dir_all(dir).map_err(|e| Failure::output(dir, e))?;
    let runs = dir.join("runs.csv");
    let summary = dir.join("summary.csv");
    let resolved = dir.join("config.toml");
    write_with(&runs, |out| {
        write_runs_csv(&reports, &mut *out).map_err(std::io::Error::other)
    })?;
    write_with(&summary, |out| {
        write_summary_csv(&reports, &mut *out).map_err(std::io::Error::other)
    })?;
    let toml = cfg.to_toml()?;
    write_with(&resolved, |out| out.write_all(toml.as_bytes()))?;
    manifest.config = serde_json::to_value(&cfg).map_err(Failure::runtime)?;
    finish(
        manifest,
        &[&runs, &summary, &resolved],
        &dir.join("manifest.json"),
    )
}

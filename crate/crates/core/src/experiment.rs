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

//! Repeated recovery experiments and parameter sweeps.
//!
//! One run: build (or load) the graph for a seed, keep its largest
//! component, compute exact closeness as ground truth and the local signal,
//! construct measurements, solve the recovery problem, and score the top-k
//! of the recovered vector against the top-k closeness nodes.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{f_measure, precision_recall, topk_pearson, Summary};
use crate::graph::{self, closeness_exact, largest_connected_component, Graph, NodeScores};
use crate::measure::{verify_feasibility, Builder};
use crate::metrics::{LocalMetric, DEFAULT_RADIUS};
use crate::recovery::{lasso_solve, top_k, LassoOptions, Solver};

/// A count, or a fraction of the node count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Size {
    Count(u64),
    Fraction(f64),
}

impl Size {
    /// Resolves against `n` nodes; fractions round half up.
    pub fn resolve(self, n: usize) -> usize {
        match self {
            Size::Count(c) => c as usize,
            Size::Fraction(f) => (f * n as f64 + 0.5).floor() as usize,
        }
    }

    fn validate(self, what: &str) -> Result<()> {
        match self {
            Size::Fraction(f) if !(f > 0.0 && f <= 1.0) => Err(Error::Config(format!(
                "{what}: fraction {f} must lie in (0, 1]"
            ))),
            _ => Ok(()),
        }
    }

    fn as_f64(self) -> f64 {
        match self {
            Size::Count(c) => c as f64,
            Size::Fraction(f) => f,
        }
    }
}

impl std::fmt::Display for Size {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Size::Count(c) => write!(f, "{c}"),
            Size::Fraction(x) => write!(f, "{x}"),
        }
    }
}

impl std::str::FromStr for Size {
    type Err = Error;

    /// Integers are counts; anything with a decimal point or exponent is a
    /// fraction.
    fn from_str(s: &str) -> Result<Self> {
        if let Ok(c) = s.parse::<u64>() {
            return Ok(Size::Count(c));
        }
        s.parse::<f64>()
            .map(Size::Fraction)
            .map_err(|_| Error::Config(format!("invalid size {s:?}")))
    }
}

/// Where a run's graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum GraphSpec {
    Ba {
        n: usize,
        attach: usize,
    },
    /// Either `p` or `avg_degree` (p = avg_degree / (n - 1)).
    Er {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        avg_degree: Option<f64>,
    },
    Ws {
        n: usize,
        k_nbrs: usize,
        rewire: f64,
    },
    File {
        path: PathBuf,
        #[serde(default)]
        directed: bool,
    },
}

impl GraphSpec {
    /// The raw graph for `seed` (before component extraction).
    pub fn build(&self, seed: u64) -> Result<Graph> {
        match self {
            GraphSpec::Ba { n, attach } => graph::gen_ba(*n, *attach, seed),
            GraphSpec::Er { n, p, avg_degree } => match (p, avg_degree) {
                (Some(p), None) => graph::gen_er(*n, *p, seed),
                (None, Some(avg)) => graph::gen_er_avg_degree(*n, *avg, seed),
                _ => Err(Error::Config(
                    "erdos-renyi needs exactly one of p and avg_degree".into(),
                )),
            },
            GraphSpec::Ws { n, k_nbrs, rewire } => graph::gen_ws(*n, *k_nbrs, *rewire, seed),
            GraphSpec::File { path, directed } => {
                let file = File::open(path)?;
                graph::load_edge_list(BufReader::new(file), *directed)
            }
        }
    }

    fn depends_on_seed(&self) -> bool {
        !matches!(self, GraphSpec::File { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    K,
    M,
    L,
    Lambda,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::K => "k",
            SweepParam::M => "m",
            SweepParam::L => "l",
            SweepParam::Lambda => "lambda",
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" => Ok(SweepParam::K),
            "m" => Ok(SweepParam::M),
            "l" => Ok(SweepParam::L),
            "lambda" => Ok(SweepParam::Lambda),
            other => Err(Error::Config(format!("unknown sweep parameter {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<Size>,
}

fn default_metric() -> LocalMetric {
    LocalMetric::Ego
}
fn default_h() -> u32 {
    DEFAULT_RADIUS
}
fn default_builder() -> Builder {
    Builder::Hiclose
}
fn default_lambda() -> f64 {
    LassoOptions::default().lambda
}
fn default_nonneg() -> bool {
    true
}
fn default_tol() -> f64 {
    LassoOptions::default().tol
}
fn default_max_iter() -> usize {
    LassoOptions::default().max_iter
}
fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

/// Full description of an experiment. Fractions in `m`, `l` and `k` refer
/// to the node count of the largest component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub graph: GraphSpec,
    #[serde(default = "default_metric")]
    pub metric: LocalMetric,
    #[serde(default = "default_h")]
    pub h: u32,
    #[serde(default = "default_builder")]
    pub builder: Builder,
    pub m: Size,
    pub l: Size,
    pub k: Size,
    /// DICeNod column weight; derived from `l` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_nonneg")]
    pub nonneg: bool,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        if self.h < 1 {
            return Err(Error::Config("h must be at least 1".into()));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::Config("lambda must be positive".into()));
        }
        self.m.validate("m")?;
        self.l.validate("l")?;
        self.k.validate("k")?;
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::Config("sweep values must not be empty".into()));
            }
            if sweep.param != SweepParam::Lambda {
                for v in &sweep.values {
                    v.validate(sweep.param.name())?;
                }
            }
        }
        Ok(())
    }

    fn points(&self) -> Vec<(String, String, PointParams)> {
        let base = PointParams {
            m: self.m,
            l: self.l,
            k: self.k,
            lambda: self.lambda,
        };
        match &self.sweep {
            None => vec![("none".into(), String::new(), base)],
            Some(sweep) => sweep
                .values
                .iter()
                .map(|&v| {
                    let mut p = base;
                    match sweep.param {
                        SweepParam::K => p.k = v,
                        SweepParam::M => p.m = v,
                        SweepParam::L => p.l = v,
                        SweepParam::Lambda => p.lambda = v.as_f64(),
                    }
                    (sweep.param.name().to_string(), v.to_string(), p)
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PointParams {
    m: Size,
    l: Size,
    k: Size,
    lambda: f64,
}

/// Outcome of one (sweep point, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub sweep_param: String,
    pub value: String,
    pub seed: u64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub nodes: usize,
    pub m: usize,
    pub l: usize,
    pub k: usize,
    /// Correlation of the signal with closeness over the true top-k.
    pub pearson: Option<f64>,
    pub feasible_fraction: f64,
    pub solver_iterations: usize,
    pub solver_converged: bool,
}

/// Aggregate over the seeds of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub sweep_param: String,
    pub value: String,
    pub runs: Vec<RunRecord>,
    pub precision: Summary,
    pub recall: Summary,
    pub f_measure: Summary,
}

impl EvalReport {
    fn from_runs(sweep_param: String, value: String, runs: Vec<RunRecord>) -> Self {
        let pick = |f: fn(&RunRecord) -> f64| runs.iter().map(f).collect::<Vec<_>>();
        EvalReport {
            precision: Summary::of(&pick(|r| r.precision)),
            recall: Summary::of(&pick(|r| r.recall)),
            f_measure: Summary::of(&pick(|r| r.f_measure)),
            sweep_param,
            value,
            runs,
        }
    }
}

pub const RUNS_CSV_HEADER: &str = "sweep_param,value,seed,precision,recall,f_measure";
pub const SUMMARY_CSV_HEADER: &str = "sweep_param,value,precision_mean,precision_std_lo,precision_std_hi,recall_mean,recall_std_lo,recall_std_hi,f_measure_mean,f_measure_std_lo,f_measure_std_hi";

/// Per-run rows.
pub fn write_runs_csv<W: Write>(reports: &[EvalReport], mut out: W) -> Result<()> {
    writeln!(out, "{RUNS_CSV_HEADER}")?;
    for rep in reports {
        for r in &rep.runs {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.sweep_param, r.value, r.seed, r.precision, r.recall, r.f_measure
            )?;
        }
    }
    Ok(())
}

/// One aggregated row per sweep point.
pub fn write_summary_csv<W: Write>(reports: &[EvalReport], mut out: W) -> Result<()> {
    writeln!(out, "{SUMMARY_CSV_HEADER}")?;
    for rep in reports {
        write!(out, "{},{}", rep.sweep_param, rep.value)?;
        for s in [rep.precision, rep.recall, rep.f_measure] {
            write!(out, ",{},{},{}", s.mean, s.std_lo, s.std_hi)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Graph-level data shared by every sweep point of one seed.
struct Prepared {
    graph: Graph,
    closeness: NodeScores,
    signal: NodeScores,
}

fn prepare(cfg: &SweepConfig, seed: u64) -> Result<Prepared> {
    let graph = largest_connected_component(&cfg.graph.build(seed)?);
    let closeness = closeness_exact(&graph)?;
    let signal = cfg.metric.compute(&graph, cfg.h)?;
    Ok(Prepared {
        graph,
        closeness,
        signal,
    })
}

/// Scores one recovery against the closeness ground truth.
pub struct RecoveryScore {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// Top-k of `x_hat` against the top-k closeness nodes.
pub fn score_recovery(x_hat: &[f64], closeness: &[f64], k: usize) -> Result<RecoveryScore> {
    let detected = top_k(x_hat, k)?.nodes();
    let truth = top_k(closeness, k)?.nodes();
    let (precision, recall) = precision_recall(&detected, &truth)?;
    Ok(RecoveryScore {
        precision,
        recall,
        f_measure: f_measure(precision, recall),
    })
}

fn run_point(
    cfg: &SweepConfig,
    prep: &Prepared,
    seed: u64,
    label: &(String, String, PointParams),
) -> Result<RunRecord> {
    let (param, value, p) = label;
    let g = &prep.graph;
    let n = g.node_count();
    let (m, l, k) = (p.m.resolve(n), p.l.resolve(n), p.k.resolve(n));
    if k < 1 || k > n {
        return Err(Error::Config(format!("k resolves to {k} for {n} nodes")));
    }
    let ms = cfg.builder.build(g, &prep.signal, m, l, cfg.d, seed)?;
    let feasible_fraction = verify_feasibility(g, &ms).fraction;
    let opts = LassoOptions {
        lambda: p.lambda,
        nonneg: cfg.nonneg,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        solver: cfg.solver,
    };
    let rec = lasso_solve(&ms, &opts)?;
    let score = score_recovery(&rec.x_hat, prep.closeness.as_slice(), k)?;
    let pearson = if k >= 2 {
        topk_pearson(prep.signal.as_slice(), prep.closeness.as_slice(), k).ok()
    } else {
        None
    };
    Ok(RunRecord {
        sweep_param: param.clone(),
        value: value.clone(),
        seed,
        precision: score.precision,
        recall: score.recall,
        f_measure: score.f_measure,
        nodes: n,
        m,
        l,
        k,
        pearson,
        feasible_fraction,
        solver_iterations: rec.iterations,
        solver_converged: rec.converged,
    })
}

pub fn run_experiment(cfg: &SweepConfig) -> Result<Vec<EvalReport>> {
    run_experiment_with_checkpoint(cfg, None)
}

/// Runs every (sweep point, seed) pair. Completed runs are appended to the
/// checkpoint file as JSON lines; runs already present there are reused, so
/// an interrupted sweep resumes where it stopped. The checkpoint must come
/// from the same configuration.
pub fn run_experiment_with_checkpoint(
    cfg: &SweepConfig,
    checkpoint: Option<&Path>,
) -> Result<Vec<EvalReport>> {
    cfg.validate()?;
    let points = cfg.points();

    let mut done: BTreeMap<(String, u64), RunRecord> = BTreeMap::new();
    if let Some(path) = checkpoint.filter(|p| p.exists()) {
        for (idx, line) in BufReader::new(File::open(path)?).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: RunRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("checkpoint: {e}"),
            })?;
            done.insert((rec.value.clone(), rec.seed), rec);
        }
    }
    let writer = match checkpoint {
        Some(path) => Some(Mutex::new(
            OpenOptions::new().create(true).append(true).open(path)?,
        )),
        None => None,
    };

    let pending_seeds: Vec<u64> = cfg
        .seeds
        .iter()
        .copied()
        .filter(|&s| {
            points
                .iter()
                .any(|(_, v, _)| !done.contains_key(&(v.clone(), s)))
        })
        .collect();

    // a file graph is shared by every seed
    let shared = if cfg.graph.depends_on_seed() || pending_seeds.is_empty() {
        None
    } else {
        Some(prepare(cfg, pending_seeds[0])?)
    };

    let fresh: Vec<RunRecord> = pending_seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<RunRecord>> {
            let owned;
            let prep = match &shared {
                Some(p) => p,
                None => {
                    owned = prepare(cfg, seed)?;
                    &owned
                }
            };
            points
                .par_iter()
                .filter(|(_, v, _)| !done.contains_key(&(v.clone(), seed)))
                .map(|point| {
                    let rec = run_point(cfg, prep, seed, point)?;
                    if let Some(w) = &writer {
                        let line = serde_json::to_string(&rec)?;
                        let mut file = w.lock().expect("checkpoint writer poisoned");
                        writeln!(file, "{line}")?;
                        file.flush()?;
                    }
                    Ok(rec)
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    for rec in fresh {
        done.insert((rec.value.clone(), rec.seed), rec);
    }

    let reports = points
        .into_iter()
        .map(|(param, value, _)| {
            let runs = cfg
                .seeds
                .iter()
                .map(|&s| {
                    done.get(&(value.clone(), s)).cloned().ok_or_else(|| {
                        Error::Config(format!("missing run for {param}={value}, seed {s}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(EvalReport::from_runs(param, value, runs))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SweepConfig {
        SweepConfig::from_toml(
            r#"
            m = 0.4
            l = 0.25
            k = 0.15
            seeds = [1, 2]
            [graph]
            model = "ba"
            n = 120
            attach = 3
            "#,
        )
        .unwrap()
    }

    #[test]
    fn size_resolution_rounds_half_up() {
        assert_eq!(Size::Fraction(0.4).resolve(500), 200);
        assert_eq!(Size::Fraction(0.25).resolve(500), 125);
        assert_eq!(Size::Fraction(0.15).resolve(500), 75);
        assert_eq!(Size::Fraction(0.35).resolve(500), 175);
        assert_eq!(Size::Fraction(0.5).resolve(3), 2);
        assert_eq!(Size::Count(17).resolve(500), 17);
        assert_eq!("17".parse::<Size>().unwrap(), Size::Count(17));
        assert_eq!("0.2".parse::<Size>().unwrap(), Size::Fraction(0.2));
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = small_cfg();
        assert_eq!(cfg.h, 2);
        assert_eq!(cfg.builder, Builder::Hiclose);
        assert_eq!(cfg.lambda, 1.0);
        assert!(cfg.nonneg);
        let back = SweepConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
        let bad = "m = 1.5\nl = 0.2\nk = 0.1\n[graph]\nmodel = \"ba\"\nn = 50\nattach = 2\n";
        assert!(SweepConfig::from_toml(bad).is_err());
        let bad =
            "m = 0.5\nl = 0.2\nk = 0.1\nseeds = []\n[graph]\nmodel = \"ba\"\nn = 50\nattach = 2\n";
        assert!(SweepConfig::from_toml(bad).is_err());
        let unknown =
            "m = 0.5\nl = 0.2\nk = 0.1\nbogus = 1\n[graph]\nmodel = \"ba\"\nn = 50\nattach = 2\n";
        assert!(SweepConfig::from_toml(unknown).is_err());
    }

    #[test]
    fn experiment_is_deterministic() {
        let cfg = small_cfg();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].runs.len(), 2);
        for r in &a[0].runs {
            assert_eq!((r.m, r.l, r.k), (48, 30, 18));
            assert_eq!(r.feasible_fraction, 1.0);
            // equal-size sets
            assert_eq!(r.precision, r.recall);
            assert_eq!(r.precision, r.f_measure);
        }
    }

    #[test]
    fn checkpoint_resume_matches_fresh_run() {
        let mut cfg = small_cfg();
        cfg.sweep = Some(Sweep {
            param: SweepParam::K,
            values: vec![Size::Fraction(0.1), Size::Fraction(0.2)],
        });
        let dir = std::env::temp_dir().join(format!("egoclose-ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("runs.jsonl");
        let _ = std::fs::remove_file(&path);

        let full = run_experiment(&cfg).unwrap();
        // simulate an interrupted sweep: keep only the first completed run
        run_experiment_with_checkpoint(&cfg, Some(&path)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, format!("{}\n", text.lines().next().unwrap())).unwrap();
        let resumed = run_experiment_with_checkpoint(&cfg, Some(&path)).unwrap();
        assert_eq!(resumed, full);
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 4);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn csv_writers_emit_headers() {
        let reports = run_experiment(&small_cfg()).unwrap();
        let mut runs = Vec::new();
        write_runs_csv(&reports, &mut runs).unwrap();
        let runs = String::from_utf8(runs).unwrap();
        assert_eq!(runs.lines().next().unwrap(), RUNS_CSV_HEADER);
        assert_eq!(runs.lines().count(), 3);
        let mut summary = Vec::new();
        write_summary_csv(&reports, &mut summary).unwrap();
        let summary = String::from_utf8(summary).unwrap();
        assert_eq!(summary.lines().nth(1).unwrap().split(',').count(), 11);
    }
}

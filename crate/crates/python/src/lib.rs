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

//! Python bindings: graphs, local metrics, measurement construction,
//! sparse recovery and evaluation.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use egoclose::eval;
use egoclose::experiment::{run_experiment, SweepConfig};
use egoclose::graph::{self, NetworkStats};
use egoclose::measure::verify_feasibility;
use egoclose::recovery::{self, kkt_residual, kkt_residual_nonneg};
use egoclose::{Builder, LassoOptions, LocalMetric, NodeScores, Solver};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(err: egoclose::Error) -> PyErr {
    use egoclose::Error as E;
    match err {
        E::Io(e) => PyOSError::new_err(e.to_string()),
        E::Disconnected | E::UndefinedCorrelation(_) => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn io_err(err: std::io::Error) -> PyErr {
    PyOSError::new_err(err.to_string())
}

/// Undirected simple graph with contiguous node ids.
#[pyclass(name = "Graph", module = "egoclose_py", frozen)]
struct PyGraph {
    inner: egoclose::Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(node_count: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        let inner = egoclose::Graph::from_edges(node_count, edges).map_err(to_py)?;
        Ok(PyGraph { inner })
    }

    /// Reads a whitespace-separated edge list; ids are remapped to
    /// `0..n` in ascending order and kept as labels.
    #[staticmethod]
    #[pyo3(signature = (path, directed = false))]
    fn read_edge_list(path: &str, directed: bool) -> PyResult<Self> {
        let file = File::open(path).map_err(io_err)?;
        let inner = graph::load_edge_list(BufReader::new(file), directed).map_err(to_py)?;
        Ok(PyGraph { inner })
    }

    #[staticmethod]
    fn barabasi_albert(n: usize, attach: usize, seed: u64) -> PyResult<Self> {
        Ok(PyGraph {
            inner: graph::gen_ba(n, attach, seed).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (n, seed, p = None, avg_degree = None))]
    fn erdos_renyi(n: usize, seed: u64, p: Option<f64>, avg_degree: Option<f64>) -> PyResult<Self> {
        let inner = match (p, avg_degree) {
            (Some(p), None) => graph::gen_er(n, p, seed),
            (None, Some(avg)) => graph::gen_er_avg_degree(n, avg, seed),
            _ => {
                return Err(PyValueError::new_err(
                    "give exactly one of p and avg_degree",
                ))
            }
        };
        Ok(PyGraph {
            inner: inner.map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn watts_strogatz(n: usize, k_nbrs: usize, rewire: f64, seed: u64) -> PyResult<Self> {
        Ok(PyGraph {
            inner: graph::gen_ws(n, k_nbrs, rewire, seed).map_err(to_py)?,
        })
    }

    fn write_edge_list(&self, path: &str) -> PyResult<()> {
        let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
        graph::write_edge_list(&self.inner, &mut out).map_err(to_py)?;
        out.flush().map_err(io_err)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn max_degree(&self) -> usize {
        self.inner.max_degree()
    }

    fn neighbors(&self, u: usize) -> PyResult<Vec<usize>> {
        self.check(u)?;
        Ok(self.inner.neighbors(u).to_vec())
    }

    fn degree(&self, u: usize) -> PyResult<usize> {
        self.check(u)?;
        Ok(self.inner.degree(u))
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    fn labels(&self) -> Vec<u64> {
        self.inner.labels().to_vec()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn largest_connected_component(&self) -> PyGraph {
        PyGraph {
            inner: graph::largest_connected_component(&self.inner),
        }
    }

    /// Hop distances from `source`; `None` marks unreachable nodes.
    fn bfs_distances(&self, source: usize) -> PyResult<Vec<Option<u32>>> {
        graph::bfs_distances(&self.inner, source).map_err(to_py)
    }

    /// Network statistics as a dict; distances come from `sample_sources`
    /// random BFS roots when given.
    #[pyo3(signature = (sample_sources = None, seed = 42))]
    fn stats<'py>(
        &self,
        py: Python<'py>,
        sample_sources: Option<usize>,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let s: NetworkStats = match sample_sources {
            Some(k) => graph::network_stats_sampled(&self.inner, k, seed),
            None => graph::network_stats(&self.inner),
        }
        .map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("nodes", s.nodes)?;
        d.set_item("edges", s.edges)?;
        d.set_item("avg_degree", s.avg_degree)?;
        d.set_item("avg_clustering", s.avg_clustering)?;
        d.set_item("diameter", s.diameter)?;
        d.set_item("effective_diameter_90", s.effective_diameter_90)?;
        d.set_item("sampled_sources", s.sampled_sources)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(nodes={}, edges={})",
            self.inner.node_count(),
            self.inner.edge_count()
        )
    }
}

impl PyGraph {
    fn check(&self, u: usize) -> PyResult<()> {
        self.inner.check_node(u).map_err(to_py)
    }
}

#[pyfunction]
fn closeness_exact(g: &PyGraph) -> PyResult<Vec<f64>> {
    Ok(graph::closeness_exact(&g.inner).map_err(to_py)?.into_vec())
}

/// Local score of every node: `ego`, `daccer`, `dist-exact` or `degree`.
#[pyfunction]
#[pyo3(signature = (g, metric = "ego", h = 2))]
fn local_metric(g: &PyGraph, metric: &str, h: u32) -> PyResult<Vec<f64>> {
    let metric: LocalMetric = metric.parse().map_err(to_py)?;
    Ok(metric.compute(&g.inner, h).map_err(to_py)?.into_vec())
}

#[pyfunction]
#[pyo3(signature = (g, h = 2))]
fn ego_closeness(g: &PyGraph, h: u32) -> PyResult<Vec<f64>> {
    local_metric(g, "ego", h)
}

/// Binary measurement rows with their aggregated values.
#[pyclass(name = "MeasurementSystem", module = "egoclose_py", frozen)]
struct PyMeasurementSystem {
    inner: egoclose::MeasurementSystem,
}

#[pymethods]
impl PyMeasurementSystem {
    #[new]
    #[pyo3(signature = (rows, y, node_count))]
    fn new(rows: Vec<Vec<usize>>, y: Vec<f64>, node_count: usize) -> PyResult<Self> {
        let inner = egoclose::MeasurementSystem {
            rows: rows
                .into_iter()
                .map(|mut r| {
                    r.sort_unstable();
                    r
                })
                .collect(),
            y,
            node_count,
            walk_length: None,
        };
        inner.validate().map_err(to_py)?;
        Ok(PyMeasurementSystem { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, node_count, walk_length = None))]
    fn read(path: &str, node_count: usize, walk_length: Option<usize>) -> PyResult<Self> {
        let file = File::open(path).map_err(io_err)?;
        let inner =
            egoclose::MeasurementSystem::read_rows(BufReader::new(file), node_count, walk_length)
                .map_err(to_py)?;
        Ok(PyMeasurementSystem { inner })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
        self.inner.write_rows(&mut out).map_err(to_py)?;
        out.flush().map_err(io_err)
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<usize>> {
        self.inner.rows.clone()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.inner.y.clone()
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count
    }

    #[getter]
    fn num_measurements(&self) -> usize {
        self.inner.num_measurements()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    fn multiply(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        if x.len() != self.inner.node_count {
            return Err(PyValueError::new_err("x length must equal node_count"));
        }
        Ok(self.inner.multiply(&x))
    }

    /// Per-row connectivity of the supports in `g`.
    fn feasibility(&self, g: &PyGraph) -> Vec<bool> {
        verify_feasibility(&g.inner, &self.inner).per_row
    }

    fn __repr__(&self) -> String {
        format!(
            "MeasurementSystem(m={}, n={}, nnz={})",
            self.inner.num_measurements(),
            self.inner.node_count,
            self.inner.nnz()
        )
    }
}

/// `m` measurements of `signal`; `builder` is `hiclose`, `rw`, `topcent`
/// or `dicenod`.
#[pyfunction]
#[pyo3(signature = (g, signal, m, l, builder = "hiclose", d = None, seed = 42))]
fn build_measurements(
    g: &PyGraph,
    signal: Vec<f64>,
    m: usize,
    l: usize,
    builder: &str,
    d: Option<f64>,
    seed: u64,
) -> PyResult<PyMeasurementSystem> {
    let builder: Builder = builder.parse().map_err(to_py)?;
    let signal = NodeScores::new(signal).map_err(to_py)?;
    let inner = builder
        .build(&g.inner, &signal, m, l, d, seed)
        .map_err(to_py)?;
    Ok(PyMeasurementSystem { inner })
}

/// Minimizes `lam * ||x||_1 + ||A x - y||^2`. Returns a dict with
/// `x_hat`, `objective`, `iterations`, `converged`, `solver`.
#[pyfunction]
#[pyo3(signature = (ms, lam = 1.0, nonneg = true, tol = 1e-8, max_iter = 100_000, solver = "auto"))]
fn lasso_solve<'py>(
    py: Python<'py>,
    ms: &PyMeasurementSystem,
    lam: f64,
    nonneg: bool,
    tol: f64,
    max_iter: usize,
    solver: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let solver: Solver = solver.parse().map_err(to_py)?;
    let opts = LassoOptions {
        lambda: lam,
        nonneg,
        tol,
        max_iter,
        solver,
    };
    let r = py
        .detach(|| recovery::lasso_solve(&ms.inner, &opts))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("x_hat", r.x_hat)?;
    d.set_item("objective", r.objective_value)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("converged", r.converged)?;
    d.set_item("solver", r.solver.name())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(name = "kkt_residual", signature = (ms, x, lam = 1.0, nonneg = false))]
fn py_kkt_residual(ms: &PyMeasurementSystem, x: Vec<f64>, lam: f64, nonneg: bool) -> PyResult<f64> {
    if x.len() != ms.inner.node_count {
        return Err(PyValueError::new_err("x length must equal node_count"));
    }
    Ok(if nonneg {
        kkt_residual_nonneg(&ms.inner, &x, lam)
    } else {
        kkt_residual(&ms.inner, &x, lam)
    })
}

/// The `k` largest entries as `(node, score)`, ties to the smaller id.
#[pyfunction]
fn top_k(scores: Vec<f64>, k: usize) -> PyResult<Vec<(usize, f64)>> {
    Ok(recovery::top_k(&scores, k).map_err(to_py)?.0)
}

#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    eval::pearson(&x, &y).map_err(to_py)
}

#[pyfunction]
fn log_pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    eval::log_pearson(&x, &y).map_err(to_py)
}

/// Pearson correlation over the `k` nodes ranked highest by `global`.
#[pyfunction]
fn topk_pearson(local: Vec<f64>, global: Vec<f64>, k: usize) -> PyResult<f64> {
    eval::topk_pearson(&local, &global, k).map_err(to_py)
}

#[pyfunction]
fn precision_recall(detected: Vec<usize>, truth: Vec<usize>) -> PyResult<(f64, f64)> {
    eval::precision_recall(&detected, &truth).map_err(to_py)
}

#[pyfunction]
fn f_measure(precision: f64, recall: f64) -> f64 {
    eval::f_measure(precision, recall)
}

/// Runs an experiment described by TOML text. Returns one dict per sweep
/// point with per-seed `runs` and mean/std summaries.
#[pyfunction]
fn run_experiment_toml<'py>(py: Python<'py>, config: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = SweepConfig::from_toml(config).map_err(to_py)?;
    let reports = py.detach(|| run_experiment(&cfg)).map_err(to_py)?;
    reports
        .into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("sweep_param", r.sweep_param)?;
            d.set_item("value", r.value)?;
            for (name, s) in [
                ("precision", r.precision),
                ("recall", r.recall),
                ("f_measure", r.f_measure),
            ] {
                d.set_item(format!("{name}_mean"), s.mean)?;
                d.set_item(format!("{name}_std_lo"), s.std_lo)?;
                d.set_item(format!("{name}_std_hi"), s.std_hi)?;
            }
            let runs = r
                .runs
                .into_iter()
                .map(|run| {
                    let rd = PyDict::new(py);
                    rd.set_item("seed", run.seed)?;
                    rd.set_item("precision", run.precision)?;
                    rd.set_item("recall", run.recall)?;
                    rd.set_item("f_measure", run.f_measure)?;
                    rd.set_item("m", run.m)?;
                    rd.set_item("l", run.l)?;
                    rd.set_item("k", run.k)?;
                    rd.set_item("feasible_fraction", run.feasible_fraction)?;
                    Ok(rd)
                })
                .collect::<PyResult<Vec<_>>>()?;
            d.set_item("runs", runs)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn egoclose_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", egoclose::VERSION)?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyMeasurementSystem>()?;
    m.add_function(wrap_pyfunction!(closeness_exact, m)?)?;
    m.add_function(wrap_pyfunction!(local_metric, m)?)?;
    m.add_function(wrap_pyfunction!(ego_closeness, m)?)?;
    m.add_function(wrap_pyfunction!(build_measurements, m)?)?;
    m.add_function(wrap_pyfunction!(lasso_solve, m)?)?;
    m.add_function(wrap_pyfunction!(py_kkt_residual, m)?)?;
    m.add_function(wrap_pyfunction!(top_k, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(log_pearson, m)?)?;
    m.add_function(wrap_pyfunction!(topk_pearson, m)?)?;
    m.add_function(wrap_pyfunction!(precision_recall, m)?)?;
    m.add_function(wrap_pyfunction!(f_measure, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment_toml, m)?)?;
    Ok(())
}

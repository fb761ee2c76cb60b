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

//! Sparse recovery by l1-regularized least squares and top-k extraction.
//!
//! Minimizes `lambda * ||x||_1 + ||A x - y||_2^2`, optionally over `x >= 0`.
//! Two solvers are available: a dense interior-point method that reaches
//! the optimum to near machine precision, and accelerated proximal gradient,
//! which only needs products with `A` and `A^T` and so scales to systems too
//! large to hold densely. [`Solver::Auto`] picks by problem size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::measure::MeasurementSystem;

mod fista;
mod interior;

pub use fista::spectral_norm_sq;

/// Largest `min(m, N)` and `m * N` (with `N` the number of variables) for
/// which [`Solver::Auto`] chooses the dense interior-point method.
pub const DENSE_MAX_DIM: usize = 4000;
pub const DENSE_MAX_ENTRIES: usize = 40_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    #[default]
    Auto,
    InteriorPoint,
    ProximalGradient,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Auto => "auto",
            Solver::InteriorPoint => "interior-point",
            Solver::ProximalGradient => "proximal-gradient",
        }
    }

    /// The concrete solver used for `ms`.
    pub fn resolve(self, ms: &MeasurementSystem, nonneg: bool) -> Solver {
        if self != Solver::Auto {
            return self;
        }
        let m = ms.num_measurements();
        let vars = if nonneg {
            ms.node_count
        } else {
            2 * ms.node_count
        };
        if m.min(vars) <= DENSE_MAX_DIM && m.saturating_mul(vars) <= DENSE_MAX_ENTRIES {
            Solver::InteriorPoint
        } else {
            Solver::ProximalGradient
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Solver::Auto),
            "interior-point" | "ipm" => Ok(Solver::InteriorPoint),
            "proximal-gradient" | "fista" => Ok(Solver::ProximalGradient),
            _ => Err(Error::invalid(format!("unknown solver '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassoOptions {
    pub lambda: f64,
    pub nonneg: bool,
    /// Relative objective change that counts as converged.
    pub tol: f64,
    /// Iteration cap for the proximal-gradient solver.
    pub max_iter: usize,
    #[serde(default)]
    pub solver: Solver,
}

impl Default for LassoOptions {
    fn default() -> Self {
        LassoOptions {
            lambda: 1.0,
            nonneg: true,
            tol: 1e-8,
            max_iter: 100_000,
            solver: Solver::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub x_hat: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub solver: Solver,
}

pub(crate) fn objective(x: &[f64], ax: &[f64], y: &[f64], lambda: f64) -> f64 {
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    let rss: f64 = ax.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    lambda * l1 + rss
}

/// `2 A^T (A x - y)`
pub(crate) fn gradient(ms: &MeasurementSystem, ax: &[f64]) -> Vec<f64> {
    let residual: Vec<f64> = ax.iter().zip(&ms.y).map(|(a, b)| 2.0 * (a - b)).collect();
    ms.transpose_multiply(&residual)
}

pub fn lasso_solve(ms: &MeasurementSystem, opts: &LassoOptions) -> Result<RecoveryResult> {
    if ms.num_measurements() == 0 {
        return Err(Error::InvalidMeasurements("no measurements".into()));
    }
    ms.validate()?;
    if !(opts.lambda > 0.0 && opts.lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be positive (got {})",
            opts.lambda
        )));
    }
    if !(opts.tol >= 0.0) {
        return Err(Error::invalid("tolerance must be non-negative"));
    }
    Ok(match opts.solver.resolve(ms, opts.nonneg) {
        Solver::ProximalGradient => fista::solve(ms, opts),
        _ => interior::solve(ms, opts),
    })
}

/// Largest violation of the optimality conditions of
/// `lambda * ||x||_1 + ||A x - y||^2` at `x`.
pub fn kkt_residual(ms: &MeasurementSystem, x: &[f64], lambda: f64) -> f64 {
    let grad = gradient(ms, &ms.multiply(x));
    x.iter()
        .zip(&grad)
        .map(|(&xj, &gj)| {
            if xj != 0.0 {
                (gj + lambda * xj.signum()).abs()
            } else {
                (gj.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// As [`kkt_residual`], for the problem restricted to `x >= 0`.
pub fn kkt_residual_nonneg(ms: &MeasurementSystem, x: &[f64], lambda: f64) -> f64 {
    let grad = gradient(ms, &ms.multiply(x));
    x.iter()
        .zip(&grad)
        .map(|(&xj, &gj)| {
            if xj > 0.0 {
                (gj + lambda).abs()
            } else {
                (-gj - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// `(node, score)` pairs in descending score order; ties go to the smaller
/// node id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedNodes(pub Vec<(NodeId, f64)>);

impl RankedNodes {
    pub fn nodes(&self) -> Vec<NodeId> {
        self.0.iter().map(|&(u, _)| u).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn top_k(scores: &[f64], k: usize) -> Result<RankedNodes> {
    if k < 1 || k > scores.len() {
        return Err(Error::invalid(format!(
            "k must lie in 1..={} (got {k})",
            scores.len()
        )));
    }
    let mut order: Vec<NodeId> = (0..scores.len()).collect();
    let cmp = |a: &NodeId, b: &NodeId| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b));
    if k < order.len() {
        order.select_nth_unstable_by(k - 1, cmp);
        order.truncate(k);
    }
    order.sort_unstable_by(cmp);
    Ok(RankedNodes(
        order.into_iter().map(|u| (u, scores[u])).collect(),
    ))
}

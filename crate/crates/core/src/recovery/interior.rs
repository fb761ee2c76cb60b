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

//! Primal-dual interior-point method for the l1-regularized least-squares
//! problem posed as a bound-constrained quadratic program.
//!
//! With `x >= 0` the problem is `min 1/2 x'Hx + g'x` where `H = 2 A'A` and
//! `g = lambda - 2 A'y`; without the sign constraint `x` is split into
//! positive and negative parts. Each Newton system `(H + X^-1 Z) dx = r` is
//! solved densely, through the `m x m` Woodbury form when there are fewer
//! measurements than variables. The iterate is finished by a Newton step on
//! the identified support.

use nalgebra::{DMatrix, DVector};

use super::{objective, LassoOptions, RecoveryResult, Solver};
use crate::measure::MeasurementSystem;

const MAX_ITERATIONS: usize = 200;
const STEP_FRACTION: f64 = 0.995;
const REFINEMENT_STEPS: usize = 2;
const POLISH_ROUNDS: usize = 50;

/// Dense problem data, scaled so that `max |y| = 1`.
struct Qp {
    /// Signed incidence matrix, `m x N`.
    b: DMatrix<f64>,
    bt: DMatrix<f64>,
    g: DVector<f64>,
    y: DVector<f64>,
    /// Number of graph nodes; `N = 2 n` when the sign is free.
    n: usize,
}

impl Qp {
    fn new(ms: &MeasurementSystem, lambda: f64, nonneg: bool, scale: f64) -> Self {
        let n = ms.node_count;
        let vars = if nonneg { n } else { 2 * n };
        let m = ms.num_measurements();
        let mut b = DMatrix::zeros(m, vars);
        for (i, row) in ms.rows.iter().enumerate() {
            for &j in row {
                b[(i, j)] = 1.0;
                if !nonneg {
                    b[(i, n + j)] = -1.0;
                }
            }
        }
        let y = DVector::from_iterator(m, ms.y.iter().map(|v| v / scale));
        let bt = b.transpose();
        let g = (&bt * &y) * -2.0 + DVector::from_element(vars, lambda / scale);
        Qp { b, bt, g, y, n }
    }

    fn vars(&self) -> usize {
        self.g.len()
    }

    /// `H v = 2 B'B v`
    fn hess(&self, v: &DVector<f64>) -> DVector<f64> {
        (&self.bt * (&self.b * v)) * 2.0
    }

    fn kkt(&self, x: &DVector<f64>) -> f64 {
        let grad = self.hess(x) + &self.g;
        x.iter()
            .zip(grad.iter())
            .map(|(&xj, &gj)| if xj > 0.0 { gj.abs() } else { (-gj).max(0.0) })
            .fold(0.0, f64::max)
    }
}

/// Factorization of `D + H` for one interior-point iteration.
enum Newton {
    Woodbury {
        chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
        dinv: DVector<f64>,
    },
    Full(nalgebra::Cholesky<f64, nalgebra::Dyn>),
}

impl Newton {
    fn factor(qp: &Qp, gram: Option<&DMatrix<f64>>, d: &DVector<f64>) -> Option<Self> {
        match gram {
            Some(h) => {
                let mut k = h.clone();
                for j in 0..d.len() {
                    k[(j, j)] += d[j];
                }
                k.cholesky().map(Newton::Full)
            }
            None => {
                // (D + 2B'B)^-1 = D^-1 - D^-1 B' (I/2 + B D^-1 B')^-1 B D^-1
                let dinv = d.map(|v| 1.0 / v);
                let mut scaled = qp.b.clone();
                for (j, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= dinv[j];
                }
                let mut mm = &scaled * &qp.bt;
                for i in 0..mm.nrows() {
                    mm[(i, i)] += 0.5;
                }
                mm.cholesky().map(|chol| Newton::Woodbury { chol, dinv })
            }
        }
    }

    fn apply_inverse(&self, qp: &Qp, r: &DVector<f64>) -> DVector<f64> {
        match self {
            Newton::Full(chol) => chol.solve(r),
            Newton::Woodbury { chol, dinv } => {
                let w = chol.solve(&(&qp.b * r.component_mul(dinv)));
                (r - &qp.bt * w).component_mul(dinv)
            }
        }
    }

    fn solve(&self, qp: &Qp, d: &DVector<f64>, r: &DVector<f64>) -> DVector<f64> {
        let mut dx = self.apply_inverse(qp, r);
        for _ in 0..REFINEMENT_STEPS {
            let resid = r - (d.component_mul(&dx) + qp.hess(&dx));
            dx += self.apply_inverse(qp, &resid);
        }
        dx
    }
}

/// Largest `a` in `(0, 1]` keeping `v + a dv >= 0`.
fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, &d)| d < 0.0)
        .map(|(&vi, &d)| -vi / d)
        .fold(1.0, f64::min)
}

/// Smallest correction of `x` on `support` that zeroes the gradient there
/// (a pseudo-inverse step, since the support columns may be dependent).
fn support_step(qp: &Qp, x: &DVector<f64>, support: &[usize]) -> Option<DVector<f64>> {
    let bp = qp.b.select_columns(support);
    let xp = DVector::from_iterator(support.len(), support.iter().map(|&j| x[j]));
    let gp = DVector::from_iterator(support.len(), support.iter().map(|&j| qp.g[j]));
    // B_P' B_P step = -(grad_P) / 2, solved through the SVD of B_P so the
    // conditioning is not squared when forming the system
    let half_residual = (bp.transpose() * (&bp * &xp) * 2.0 + gp) * -0.5;
    let dims = bp.nrows().max(bp.ncols()) as f64;
    let svd = bp.svd(false, true);
    let sigma = svd.singular_values;
    let v_t = svd.v_t?;
    let cutoff = sigma.max() * dims * f64::EPSILON;
    let mut coeffs = &v_t * half_residual;
    for (c, &s) in coeffs.iter_mut().zip(sigma.iter()) {
        *c = if s > cutoff { *c / (s * s) } else { 0.0 };
    }
    let step = v_t.transpose() * coeffs;
    let mut out = DVector::zeros(qp.vars());
    for (k, &j) in support.iter().enumerate() {
        out[j] = xp[k] + step[k];
    }
    Some(out)
}

/// Active-set finishing from a point near the optimum: alternate support
/// steps, backing off to the boundary whenever a step leaves the feasible
/// set, and grow the support by the most violating coordinate.
fn polish(qp: &Qp, start: &DVector<f64>, max_rounds: usize) -> DVector<f64> {
    let mut x = start.clone();
    let mut support: Vec<usize> = (0..qp.vars()).filter(|&j| x[j] > 0.0).collect();
    for _ in 0..max_rounds {
        if support.is_empty() {
            break;
        }
        let Some(target) = support_step(qp, &x, &support) else {
            break;
        };
        let blocked = support.iter().any(|&j| !(target[j] > 0.0));
        if blocked {
            let alpha = support
                .iter()
                .filter(|&&j| !(target[j] > 0.0))
                .map(|&j| x[j] / (x[j] - target[j]))
                .fold(1.0, f64::min);
            x = &x + (&target - &x) * alpha;
            for &j in &support {
                if !(x[j] > 0.0) || (target[j] <= 0.0 && x[j] <= f64::EPSILON * x.amax()) {
                    x[j] = 0.0;
                }
            }
            support.retain(|&j| x[j] > 0.0);
            continue;
        }
        x = target;
        let grad = qp.hess(&x) + &qp.g;
        let entering = (0..qp.vars())
            .filter(|&j| x[j] == 0.0 && grad[j] < 0.0)
            .min_by(|&a, &b| grad[a].total_cmp(&grad[b]));
        match entering {
            Some(j) if -grad[j] > f64::EPSILON * qp.g.amax() * 16.0 => {
                support.push(j);
                support.sort_unstable();
            }
            _ => break,
        }
    }
    x
}

pub(super) fn solve(ms: &MeasurementSystem, opts: &LassoOptions) -> RecoveryResult {
    let n = ms.node_count;
    let scale = ms.y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 || ms.nnz() == 0 {
        let x_hat = vec![0.0; n];
        let objective_value = objective(&x_hat, &vec![0.0; ms.y.len()], &ms.y, opts.lambda);
        return RecoveryResult {
            x_hat,
            objective_value,
            iterations: 0,
            converged: true,
            solver: Solver::InteriorPoint,
        };
    }
    let qp = Qp::new(ms, opts.lambda, opts.nonneg, scale);
    let vars = qp.vars();
    let gram = (qp.b.nrows() >= vars).then(|| &qp.bt * &qp.b * 2.0);
    let eps = (opts.tol * 1e-2).max(1e-15);
    let g_norm = qp.g.amax();

    let mut x = DVector::from_element(vars, 1.0);
    let mut z = DVector::from_element(vars, 1.0);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let hx = qp.hess(&x);
        let rd = &hx + &qp.g - &z;
        let mu = x.dot(&z) / vars as f64;
        let fx = 0.5 * x.dot(&hx) + qp.g.dot(&x) + qp.y.norm_squared();
        if rd.amax() <= eps * (1.0 + g_norm) && vars as f64 * mu <= eps * (1.0 + fx.abs()) {
            converged = true;
            break;
        }
        iterations += 1;
        let d = z.component_div(&x);
        let Some(newton) = Newton::factor(&qp, gram.as_ref(), &d) else {
            break;
        };

        // predictor
        let dx_aff = newton.solve(&qp, &d, &(-&rd - &z));
        let dz_aff = -&z - d.component_mul(&dx_aff);
        let a_aff = max_step(&x, &dx_aff).min(max_step(&z, &dz_aff));
        let mu_aff = (&x + &dx_aff * a_aff).dot(&(&z + &dz_aff * a_aff)) / vars as f64;
        let sigma = (mu_aff / mu).powi(3).min(1.0);

        // corrector
        let rc = x.component_mul(&z) + dx_aff.component_mul(&dz_aff)
            - DVector::from_element(vars, sigma * mu);
        let rc_x = rc.component_div(&x);
        let dx = newton.solve(&qp, &d, &(-&rd - &rc_x));
        let dz = -rc_x - d.component_mul(&dx);
        let alpha = (STEP_FRACTION * max_step(&x, &dx).min(max_step(&z, &dz))).min(1.0);
        if !(alpha > 1e-12) {
            break;
        }
        x += dx * alpha;
        z += dz * alpha;
    }

    let support: Vec<usize> = (0..vars).filter(|&j| x[j] > z[j]).collect();
    let mut cleaned = DVector::zeros(vars);
    for &j in &support {
        cleaned[j] = x[j];
    }
    let mut best = x;
    let mut best_kkt = qp.kkt(&best);
    let polished = polish(&qp, &cleaned, POLISH_ROUNDS);
    for candidate in [cleaned, polished] {
        let kkt = qp.kkt(&candidate);
        if kkt <= best_kkt {
            best = candidate;
            best_kkt = kkt;
        }
    }

    let x_hat: Vec<f64> = (0..n)
        .map(|j| {
            let v = if opts.nonneg {
                best[j]
            } else {
                best[j] - best[qp.n + j]
            };
            v * scale
        })
        .collect();
    let objective_value = objective(&x_hat, &ms.multiply(&x_hat), &ms.y, opts.lambda);
    RecoveryResult {
        x_hat,
        objective_value,
        iterations,
        converged,
        solver: Solver::InteriorPoint,
    }
}

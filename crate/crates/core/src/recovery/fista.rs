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

//! Accelerated proximal gradient with monotone restarts.
//!
//! The run stops once both the relative objective decrease and the
//! proximal-gradient residual (relative to the gradient at zero) fall below
//! `tol`. Momentum is reset whenever a step would increase the objective or
//! the gradient-based test fires, which keeps the accepted iterates
//! monotone.

use super::{gradient, objective, LassoOptions, RecoveryResult, Solver};
use crate::measure::MeasurementSystem;

const POWER_ITERATIONS: usize = 50;
const LIPSCHITZ_MARGIN: f64 = 1.1;

/// Estimate of `||A||_2^2` by power iteration on `A^T A` from the all-ones
/// vector.
pub fn spectral_norm_sq(ms: &MeasurementSystem) -> f64 {
    let n = ms.node_count;
    if n == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = ms.transpose_multiply(&ms.multiply(&v));
        let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        estimate = norm;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
    }
    estimate
}

fn shrink(v: f64, threshold: f64, nonneg: bool) -> f64 {
    if nonneg {
        (v - threshold).max(0.0)
    } else if v > threshold {
        v - threshold
    } else if v < -threshold {
        v + threshold
    } else {
        0.0
    }
}

pub(super) fn solve(ms: &MeasurementSystem, opts: &LassoOptions) -> RecoveryResult {
    let n = ms.node_count;
    let lambda = opts.lambda;
    let mut lipschitz = 2.0 * LIPSCHITZ_MARGIN * spectral_norm_sq(ms);

    let mut x = vec![0.0; n];
    let mut ax = vec![0.0; ms.num_measurements()];
    let mut fx = objective(&x, &ax, &ms.y, lambda);
    if lipschitz == 0.0 {
        // every row is empty: nothing to fit
        return RecoveryResult {
            x_hat: x,
            objective_value: fx,
            iterations: 0,
            converged: true,
            solver: Solver::ProximalGradient,
        };
    }

    // fixed-point residual scale: the gradient magnitude at x = 0
    let grad_scale = gradient(ms, &ax)
        .iter()
        .fold(0.0f64, |acc, g| acc.max(g.abs()))
        .max(lambda);

    let mut z = x.clone();
    let mut az = ax.clone();
    let mut t = 1.0f64;
    let mut momentum = false;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let grad = gradient(ms, &az);
        let step = 1.0 / lipschitz;
        let x_new: Vec<f64> = z
            .iter()
            .zip(&grad)
            .map(|(zi, gi)| shrink(zi - step * gi, lambda * step, opts.nonneg))
            .collect();
        let ax_new = ms.multiply(&x_new);
        let f_new = objective(&x_new, &ax_new, &ms.y, lambda);

        // increases at the rounding level of the objective are noise
        if f_new > fx + 4.0 * f64::EPSILON * fx.abs() {
            if momentum {
                // restart from the last accepted point
                z.clone_from(&x);
                az.clone_from(&ax);
                t = 1.0;
                momentum = false;
            } else {
                // a plain step went uphill: the curvature bound was too small
                lipschitz *= 2.0;
            }
            continue;
        }

        // Objective change alone stalls once the objective is flat to
        // machine precision (x is then only accurate to ~sqrt(eps)), so the
        // proximal-gradient residual must be small as well.
        let decrease = fx - f_new;
        let mapping = lipschitz
            * z.iter()
                .zip(&x_new)
                .fold(0.0f64, |acc, (zi, xi)| acc.max((zi - xi).abs()));
        converged = decrease <= opts.tol * fx.abs().max(f64::MIN_POSITIVE)
            && mapping <= opts.tol * grad_scale;

        let mut t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mut beta = (t - 1.0) / t_next;
        let turning: f64 = z
            .iter()
            .zip(&x_new)
            .zip(&x)
            .map(|((zi, xn), xi)| (zi - xn) * (xn - xi))
            .sum();
        if turning > 0.0 {
            t_next = 1.0;
            beta = 0.0;
        }
        for i in 0..n {
            z[i] = x_new[i] + beta * (x_new[i] - x[i]);
        }
        for i in 0..az.len() {
            az[i] = ax_new[i] + beta * (ax_new[i] - ax[i]);
        }
        momentum = beta != 0.0;
        t = t_next;
        x = x_new;
        ax = ax_new;
        fx = f_new;
        if converged {
            break;
        }
    }

    RecoveryResult {
        x_hat: x,
        objective_value: fx,
        iterations,
        converged,
        solver: Solver::ProximalGradient,
    }
}

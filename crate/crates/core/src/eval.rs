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

//! Correlation and detection-accuracy measures.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::recovery::top_k;

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation(
            "need at least two observations".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn logs(v: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = v.iter().find(|&&a| !(a > 0.0) || !a.is_finite()) {
        return Err(Error::invalid(format!(
            "log correlation needs strictly positive entries (found {bad})"
        )));
    }
    Ok(v.iter().map(|a| a.ln()).collect())
}

/// Pearson correlation of the elementwise logarithms.
pub fn log_pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    pearson(&logs(x)?, &logs(y)?)
}

/// Shift applied to a vector with zero entries before taking logs.
pub const LOG_SHIFT_RELATIVE: f64 = 1e-9;

/// Log correlation with the zero-entry policy: any vector holding zeros is
/// shifted by `1e-9 * max` first. Returns the coefficient and whether a
/// shift was applied. Negative entries remain an error.
pub fn log_pearson_shifted(x: &[f64], y: &[f64]) -> Result<(f64, bool)> {
    let mut shifted = false;
    let mut prepare = |v: &[f64]| -> Result<Vec<f64>> {
        if v.iter().any(|&a| a < 0.0 || !a.is_finite()) {
            return Err(Error::invalid("log correlation of negative entries"));
        }
        if v.iter().all(|&a| a > 0.0) {
            return Ok(v.to_vec());
        }
        let max = v.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return Err(Error::UndefinedCorrelation("all entries are zero".into()));
        }
        shifted = true;
        let eps = LOG_SHIFT_RELATIVE * max;
        Ok(v.iter().map(|a| a + eps).collect())
    };
    let (x, y) = (prepare(x)?, prepare(y)?);
    Ok((log_pearson(&x, &y)?, shifted))
}

/// Pearson correlation restricted to the `k` nodes ranked highest by
/// `global` (ties to the smaller id).
pub fn topk_pearson(local: &[f64], global: &[f64], k: usize) -> Result<f64> {
    if local.len() != global.len() {
        return Err(Error::invalid("score vectors differ in length"));
    }
    let (a, b) = topk_pairs(local, global, k)?;
    pearson(&a, &b)
}

/// As [`topk_pearson`] on logarithms, with the zero-shift policy.
pub fn topk_log_pearson(local: &[f64], global: &[f64], k: usize) -> Result<(f64, bool)> {
    if local.len() != global.len() {
        return Err(Error::invalid("score vectors differ in length"));
    }
    let (a, b) = topk_pairs(local, global, k)?;
    log_pearson_shifted(&a, &b)
}

fn topk_pairs(local: &[f64], global: &[f64], k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let nodes = top_k(global, k)?.nodes();
    Ok(nodes.iter().map(|&u| (local[u], global[u])).unzip())
}

/// `(precision, recall)` of `detected` against `truth`.
pub fn precision_recall(detected: &[NodeId], truth: &[NodeId]) -> Result<(f64, f64)> {
    let truth: HashSet<NodeId> = truth.iter().copied().collect();
    if truth.is_empty() {
        return Err(Error::invalid("ground-truth set is empty"));
    }
    let detected: HashSet<NodeId> = detected.iter().copied().collect();
    let hits = detected.intersection(&truth).count() as f64;
    let precision = if detected.is_empty() {
        0.0
    } else {
        hits / detected.len() as f64
    };
    Ok((precision, hits / truth.len() as f64))
}

/// Harmonic mean of precision and recall; 0 when both are 0. Equal inputs
/// come back unchanged (the general formula can be off by one ulp).
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision == recall {
        precision
    } else if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Mean with separate spreads above and below it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Root mean square deviation of the values below the mean.
    pub std_lo: f64,
    /// Root mean square deviation of the values above the mean.
    pub std_hi: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        if values.is_empty() {
            return Summary {
                mean: f64::NAN,
                std_lo: f64::NAN,
                std_hi: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let side = |above: bool| {
            let dev: Vec<f64> = values
                .iter()
                .filter(|&&v| if above { v > mean } else { v < mean })
                .map(|v| (v - mean) * (v - mean))
                .collect();
            if dev.is_empty() {
                0.0
            } else {
                (dev.iter().sum::<f64>() / dev.len() as f64).sqrt()
            }
        };
        Summary {
            mean,
            std_lo: side(false),
            std_hi: side(true),
        }
    }
}

// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

/// Gaussian naive Bayes. Index 0 is the bad class, 1 the good class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

const VAR_SMOOTHING: f64 = 1e-9;

pub fn fit_nb(x: &[Vec<f64>], y: &[bool], w: &[f64]) -> GaussianNb {
    let d = x.first().map_or(0, Vec::len);
    let mut weight = [0.0; 2];
    let mut mean = [vec![0.0; d], vec![0.0; d]];
    for ((r, yi), wi) in x.iter().zip(y).zip(w) {
        let c = *yi as usize;
        weight[c] += wi;
        for (m, v) in mean[c].iter_mut().zip(r) {
            *m += wi * v;
        }
    }
    for c in 0..2 {
        if weight[c] > 0.0 {
            mean[c].iter_mut().for_each(|m| *m /= weight[c]);
        }
    }
    let mut var = [vec![0.0; d], vec![0.0; d]];
    for ((r, yi), wi) in x.iter().zip(y).zip(w) {
        let c = *yi as usize;
        for ((s, v), m) in var[c].iter_mut().zip(r).zip(&mean[c]) {
            *s += wi * (v - m).powi(2);
        }
    }
    // Variance floor proportional to the widest feature.
    let spread = (0..d)
        .map(|j| {
            let mu = x.iter().map(|r| r[j]).sum::<f64>() / x.len() as f64;
            x.iter().map(|r| (r[j] - mu).powi(2)).sum::<f64>() / x.len() as f64
        })
        .fold(0.0f64, f64::max);
    let eps = VAR_SMOOTHING * spread.max(1.0);
    for c in 0..2 {
        for s in var[c].iter_mut() {
            *s = if weight[c] > 0.0 { *s / weight[c] } else { 0.0 } + eps;
        }
    }
    let total = weight[0] + weight[1];
    GaussianNb {
        prior: [weight[0] / total, weight[1] / total],
        mean,
        var,
    }
}

impl GaussianNb {
    fn log_joint(&self, c: usize, x: &[f64]) -> f64 {
        let mut l = self.prior[c].ln();
        for ((v, m), s) in x.iter().zip(&self.mean[c]).zip(&self.var[c]) {
            l -= 0.5 * ((2.0 * std::f64::consts::PI * s).ln() + (v - m).powi(2) / s);
        }
        l
    }

    /// Posterior probability of the good class.
    pub fn score(&self, x: &[f64]) -> f64 {
        let (l0, l1) = (self.log_joint(0, x), self.log_joint(1, x));
        super::linear::sigmoid(l1 - l0)
    }
}

// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Linear {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

const LR_MAX_ITER: usize = 20_000;
const LR_TOL: f64 = 1e-8;

/// L2-regularized logistic regression (strength 1/N) by full-batch
/// gradient descent. Returns the fit and whether the gradient tolerance
/// was reached within the iteration cap.
pub fn fit_logistic(x: &[Vec<f64>], y: &[bool], w: &[f64]) -> (Linear, bool) {
    let d = x.first().map_or(0, Vec::len);
    let total: f64 = w.iter().sum();
    let lambda = 1.0 / x.len() as f64;
    // Step from a bound on the Hessian's largest eigenvalue.
    let trace: f64 = x
        .iter()
        .zip(w)
        .map(|(r, wi)| wi * (1.0 + r.iter().map(|v| v * v).sum::<f64>()))
        .sum::<f64>()
        / total;
    let step = 1.0 / (0.25 * trace + lambda);
    let mut model = Linear {
        weights: vec![0.0; d],
        bias: 0.0,
    };
    for _ in 0..LR_MAX_ITER {
        let mut gw = vec![0.0; d];
        let mut gb = 0.0;
        for ((r, yi), wi) in x.iter().zip(y).zip(w) {
            let err = wi * (sigmoid(model.margin(r)) - if *yi { 1.0 } else { 0.0 }) / total;
            gb += err;
            for (g, v) in gw.iter_mut().zip(r) {
                *g += err * v;
            }
        }
        for (g, m) in gw.iter_mut().zip(&model.weights) {
            *g += lambda * m;
        }
        let norm = gw
            .iter()
            .chain(std::iter::once(&gb))
            .fold(0.0f64, |a, g| a.max(g.abs()));
        if norm < LR_TOL {
            return (model, true);
        }
        for (m, g) in model.weights.iter_mut().zip(&gw) {
            *m -= step * g;
        }
        model.bias -= step * gb;
    }
    (model, false)
}

const SVM_LAMBDA: f64 = 0.01;
const SVM_ITER: usize = 2_000;

/// Linear SVM on the regularized hinge loss via full-batch subgradient
/// steps of size 1/(λt); the bias is an extra, regularized input fixed at
/// 1. Returns the average of the second half of the iterates.
pub fn fit_svm(x: &[Vec<f64>], y: &[bool], w: &[f64]) -> Linear {
    let d = x.first().map_or(0, Vec::len);
    let total: f64 = w.iter().sum();
    let mut theta = vec![0.0; d + 1];
    let mut avg = vec![0.0; d + 1];
    let mut kept = 0.0;
    for t in 1..=SVM_ITER {
        let eta = 1.0 / (SVM_LAMBDA * t as f64);
        let mut g: Vec<f64> = theta.iter().map(|v| SVM_LAMBDA * v).collect();
        for ((r, yi), wi) in x.iter().zip(y).zip(w) {
            let s = if *yi { 1.0 } else { -1.0 };
            let m = theta[d] + theta[..d].iter().zip(r).map(|(a, b)| a * b).sum::<f64>();
            if s * m < 1.0 {
                let c = wi * s / total;
                for (gj, v) in g.iter_mut().zip(r) {
                    *gj -= c * v;
                }
                g[d] -= c;
            }
        }
        for (v, gj) in theta.iter_mut().zip(&g) {
            *v -= eta * gj;
        }
        if t > SVM_ITER / 2 {
            for (a, v) in avg.iter_mut().zip(&theta) {
                *a += v;
            }
            kept += 1.0;
        }
    }
    avg.iter_mut().for_each(|a| *a /= kept);
    Linear {
        bias: avg[d],
        weights: avg[..d].to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<Vec<f64>>, Vec<bool>) {
        let x = vec![
            vec![-2.0, -1.0],
            vec![-1.5, -2.0],
            vec![-1.0, -0.5],
            vec![1.0, 0.5],
            vec![1.5, 2.0],
            vec![2.0, 1.0],
        ];
        let y = vec![false, false, false, true, true, true];
        (x, y)
    }

    #[test]
    fn logistic_separates_and_converges() {
        let (x, y) = toy();
        let (m, converged) = fit_logistic(&x, &y, &[1.0; 6]);
        assert!(converged);
        for (r, l) in x.iter().zip(&y) {
            assert_eq!(sigmoid(m.margin(r)) >= 0.5, *l);
        }
    }

    #[test]
    fn svm_separates() {
        let (x, y) = toy();
        let m = fit_svm(&x, &y, &[1.0; 6]);
        for (r, l) in x.iter().zip(&y) {
            assert_eq!(m.margin(r) >= 0.0, *l);
        }
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }
}

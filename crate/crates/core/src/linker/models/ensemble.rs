// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linear::sigmoid;
use super::tree::{normalize, weighted_mean, Grower, Tree, TreeParams};

/// Depth cap for fully grown trees.
pub const MAX_DEPTH: usize = 64;

pub fn fit_decision_tree(x: &[Vec<f64>], y: &[bool], w: &[f64]) -> (Tree, Vec<f64>) {
    let t: Vec<f64> = y.iter().map(|&b| b as u8 as f64).collect();
    let leaf = |rows: &[usize]| weighted_mean(rows, &t, w);
    let grower = Grower {
        x,
        target: &t,
        weight: w,
        params: TreeParams {
            max_depth: MAX_DEPTH,
            min_samples_leaf: 1,
            max_features: None,
        },
        leaf: &leaf,
    };
    let mut importance = vec![0.0; x.first().map_or(0, Vec::len)];
    let tree = grower.grow((0..x.len()).collect(), None, &mut importance);
    normalize(&mut importance);
    (tree, importance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

pub const FOREST_TREES: usize = 100;

/// Bootstrap-aggregated trees with √d features tried per split.
pub fn fit_random_forest(x: &[Vec<f64>], y: &[bool], w: &[f64], seed: u64) -> (Forest, Vec<f64>) {
    let d = x.first().map_or(0, Vec::len);
    let t: Vec<f64> = y.iter().map(|&b| b as u8 as f64).collect();
    let leaf = |rows: &[usize]| weighted_mean(rows, &t, w);
    let grower = Grower {
        x,
        target: &t,
        weight: w,
        params: TreeParams {
            max_depth: MAX_DEPTH,
            min_samples_leaf: 1,
            max_features: Some(((d as f64).sqrt().round() as usize).max(1)),
        },
        leaf: &leaf,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut importance = vec![0.0; d];
    let mut trees = Vec::with_capacity(FOREST_TREES);
    for _ in 0..FOREST_TREES {
        let rows: Vec<usize> = (0..x.len()).map(|_| rng.gen_range(0..x.len())).collect();
        let mut own = vec![0.0; d];
        trees.push(grower.grow(rows, Some(&mut rng), &mut own));
        normalize(&mut own);
        importance.iter_mut().zip(&own).for_each(|(a, b)| *a += b);
    }
    normalize(&mut importance);
    (Forest { trees }, importance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boosted {
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl Boosted {
    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.raw(x))
    }

    fn raw(&self, x: &[f64]) -> f64 {
        self.init + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }
}

pub const BOOST_ROUNDS: usize = 100;
pub const BOOST_DEPTH: usize = 3;
pub const BOOST_RATE: f64 = 0.1;

/// Gradient boosting on logistic loss with Newton-step leaf values.
pub fn fit_gradient_boosting(x: &[Vec<f64>], y: &[bool], w: &[f64]) -> (Boosted, Vec<f64>) {
    let d = x.first().map_or(0, Vec::len);
    let target: Vec<f64> = y.iter().map(|&b| b as u8 as f64).collect();
    let pos: f64 = w.iter().zip(&target).map(|(wi, t)| wi * t).sum();
    let neg: f64 = w.iter().sum::<f64>() - pos;
    let init = (pos.max(1e-12) / neg.max(1e-12)).ln();
    let mut model = Boosted {
        init,
        learning_rate: BOOST_RATE,
        trees: Vec::with_capacity(BOOST_ROUNDS),
    };
    let mut raw = vec![init; x.len()];
    let mut importance = vec![0.0; d];
    for _ in 0..BOOST_ROUNDS {
        let p: Vec<f64> = raw.iter().map(|&f| sigmoid(f)).collect();
        let g: Vec<f64> = target.iter().zip(&p).map(|(t, p)| t - p).collect();
        let h: Vec<f64> = p.iter().map(|p| p * (1.0 - p)).collect();
        let leaf = |rows: &[usize]| {
            let num: f64 = rows.iter().map(|&i| w[i] * g[i]).sum();
            let den: f64 = rows.iter().map(|&i| w[i] * h[i]).sum();
            if den < 1e-12 {
                0.0
            } else {
                num / den
            }
        };
        let grower = Grower {
            x,
            target: &g,
            weight: w,
            params: TreeParams {
                max_depth: BOOST_DEPTH,
                min_samples_leaf: 1,
                max_features: None,
            },
            leaf: &leaf,
        };
        let tree = grower.grow((0..x.len()).collect(), None, &mut importance);
        for (f, r) in raw.iter_mut().zip(x) {
            *f += BOOST_RATE * tree.predict(r);
        }
        model.trees.push(tree);
    }
    normalize(&mut importance);
    (model, importance)
}

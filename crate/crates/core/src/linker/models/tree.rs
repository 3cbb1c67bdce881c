// SPDX-License-Identifier: Apache-2.0

//! Weighted regression trees.
//!
//! A split minimizes the weighted sum of squared deviations of the target.
//! On 0/1 targets that sum is half the weighted Gini impurity, so the same
//! grower serves classification trees and boosting stages.

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, at: usize) -> usize {
            match &t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(t, *left).max(walk(t, *right)),
            }
        }
        walk(self, 0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features tried per split; `None` tries all.
    pub max_features: Option<usize>,
}

pub struct Grower<'a> {
    pub x: &'a [Vec<f64>],
    pub target: &'a [f64],
    pub weight: &'a [f64],
    pub params: TreeParams,
    /// Leaf value from the rows that reach it.
    pub leaf: &'a dyn Fn(&[usize]) -> f64,
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Grower<'_> {
    /// Grows a tree on `rows` (repeats allowed) and adds each split's gain
    /// to `importance`.
    pub fn grow(&self, rows: Vec<usize>, rng: Option<&mut ChaCha8Rng>, importance: &mut [f64]) -> Tree {
        let mut nodes = Vec::new();
        let mut rng = rng;
        self.build(rows, 0, &mut nodes, &mut rng, importance);
        Tree { nodes }
    }

    fn build(
        &self,
        rows: Vec<usize>,
        depth: usize,
        nodes: &mut Vec<Node>,
        rng: &mut Option<&mut ChaCha8Rng>,
        importance: &mut [f64],
    ) -> usize {
        let at = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        if depth < self.params.max_depth && rows.len() >= 2 * self.params.min_samples_leaf.max(1) {
            if let Some(split) = self.best_split(&rows, rng) {
                let (left, right): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| self.x[i][split.feature] <= split.threshold);
                importance[split.feature] += split.gain;
                let l = self.build(left, depth + 1, nodes, rng, importance);
                let r = self.build(right, depth + 1, nodes, rng, importance);
                nodes[at] = Node::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left: l,
                    right: r,
                };
                return at;
            }
        }
        nodes[at] = Node::Leaf {
            value: (self.leaf)(&rows),
        };
        at
    }

    fn best_split(&self, rows: &[usize], rng: &mut Option<&mut ChaCha8Rng>) -> Option<Split> {
        let d = self.x[rows[0]].len();
        let features: Vec<usize> = match (self.params.max_features, rng.as_deref_mut()) {
            (Some(m), Some(r)) if m < d => {
                let mut f = index::sample(r, d, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        };
        let sse = |w: f64, wt: f64, wt2: f64| if w > 0.0 { wt2 - wt * wt / w } else { 0.0 };
        let (mut w_all, mut wt_all, mut wt2_all) = (0.0, 0.0, 0.0);
        for &i in rows {
            let (w, t) = (self.weight[i], self.target[i]);
            w_all += w;
            wt_all += w * t;
            wt2_all += w * t * t;
        }
        let parent = sse(w_all, wt_all, wt2_all);
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<Split> = None;
        let mut order = rows.to_vec();
        for f in features {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let (mut w, mut wt, mut wt2) = (0.0, 0.0, 0.0);
            for k in 0..order.len() - 1 {
                let i = order[k];
                w += self.weight[i];
                wt += self.weight[i] * self.target[i];
                wt2 += self.weight[i] * self.target[i] * self.target[i];
                let (here, next) = (self.x[i][f], self.x[order[k + 1]][f]);
                if here == next || k + 1 < min_leaf || order.len() - k - 1 < min_leaf {
                    continue;
                }
                let gain = parent - sse(w, wt, wt2) - sse(w_all - w, wt_all - wt, wt2_all - wt2);
                if gain > best.as_ref().map_or(1e-12, |b| b.gain + 1e-12) {
                    best = Some(Split {
                        feature: f,
                        threshold: here + (next - here) / 2.0,
                        gain,
                    });
                }
            }
        }
        best
    }
}

pub fn weighted_mean(rows: &[usize], target: &[f64], weight: &[f64]) -> f64 {
    let w: f64 = rows.iter().map(|&i| weight[i]).sum();
    if w <= 0.0 {
        return 0.0;
    }
    rows.iter().map(|&i| weight[i] * target[i]).sum::<f64>() / w
}

/// Scales to unit sum; all-zero stays all-zero.
pub fn normalize(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    }
}

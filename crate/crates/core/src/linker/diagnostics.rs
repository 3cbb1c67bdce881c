// SPDX-License-Identifier: Apache-2.0

//! Feature correlation, principal components and per-model importance.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::scaler::Scaler;
use crate::error::{Error, Result};

/// Ranks from 1 with tied values sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut k = 0;
    while k < order.len() {
        let mut end = k;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[k]] {
            end += 1;
        }
        let rank = (k + end) as f64 / 2.0 + 1.0;
        for &i in &order[k..=end] {
            ranks[i] = rank;
        }
        k = end + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

/// Spearman's rho for every feature pair; `None` where a feature is constant.
pub fn spearman_matrix(rows: &[Vec<f64>]) -> Vec<Vec<Option<f64>>> {
    let d = rows.first().map_or(0, Vec::len);
    let ranks: Vec<Vec<f64>> = (0..d)
        .map(|j| average_ranks(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect();
    (0..d)
        .map(|a| (0..d).map(|b| pearson(&ranks[a], &ranks[b])).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    /// Unit eigenvectors, largest variance first.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

impl Pca {
    /// Smallest number of components reaching `share` of the variance.
    pub fn components_for(&self, share: f64) -> usize {
        let mut acc = 0.0;
        for (i, r) in self.explained_variance_ratio.iter().enumerate() {
            acc += r;
            if acc >= share - 1e-12 {
                return i + 1;
            }
        }
        self.explained_variance_ratio.len()
    }
}

/// Eigen-decomposition of the covariance of standardized features.
pub fn pca(rows: &[Vec<f64>]) -> Result<Pca> {
    if rows.len() < 3 {
        return Err(Error::DegenerateData(format!(
            "PCA needs at least 3 rows, got {}",
            rows.len()
        )));
    }
    let scaled = Scaler::fit(rows).transform(rows);
    let d = scaled[0].len();
    let n = scaled.len();
    let m = DMatrix::from_fn(n, d, |i, j| scaled[i][j]);
    let cov = (m.transpose() * &m) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateData("all features are constant".into()));
    }
    let components = order
        .iter()
        .map(|&k| {
            let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            // Sign convention: largest-magnitude entry positive.
            let pivot = v
                .iter()
                .copied()
                .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            if pivot < 0.0 {
                v.iter().map(|x| -x).collect()
            } else {
                v
            }
        })
        .collect();
    Ok(Pca {
        components,
        explained_variance_ratio: values.iter().map(|v| v / total).collect(),
        explained_variance: values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub spearman: Vec<Vec<Option<f64>>>,
    pub pca: Pca,
}

pub fn diagnostics(rows: &[Vec<f64>]) -> Result<Diagnostics> {
    Ok(Diagnostics {
        pca: pca(rows)?,
        spearman: spearman_matrix(rows),
    })
}

// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

/// Per-feature standardization with sample (n−1) variance. Features with no
/// spread map to 0 and are flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub degenerate: Vec<bool>,
}

impl Scaler {
    pub fn fit(rows: &[Vec<f64>]) -> Scaler {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n.max(1.0));
        let mut var = vec![0.0; d];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (x - m).powi(2);
            }
        }
        let std: Vec<f64> = var
            .iter()
            .map(|v| if rows.len() > 1 { (v / (n - 1.0)).sqrt() } else { 0.0 })
            .collect();
        let degenerate = std.iter().map(|s| !(s.is_finite() && *s > 1e-12)).collect();
        Scaler { mean, std, degenerate }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, x)| {
                if self.degenerate[j] {
                    0.0
                } else {
                    (x - self.mean[j]) / self.std[j]
                }
            })
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

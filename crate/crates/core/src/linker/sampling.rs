// SPDX-License-Identifier: Apache-2.0

//! Class rebalancing for training rows.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SMOTE_K: usize = 5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    #[default]
    None,
    RandomOver,
    RandomUnder,
    Smote,
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerKind::None => "none",
            SamplerKind::RandomOver => "random_over",
            SamplerKind::RandomUnder => "random_under",
            SamplerKind::Smote => "smote",
        })
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "none" => Ok(SamplerKind::None),
            "random_over" | "over" | "ros" => Ok(SamplerKind::RandomOver),
            "random_under" | "under" | "rus" => Ok(SamplerKind::RandomUnder),
            "smote" => Ok(SamplerKind::Smote),
            _ => Err(Error::InvalidArgument(format!("unknown sampler {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    pub k_neighbors: usize,
    pub seed: u64,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec {
            kind: SamplerKind::None,
            k_neighbors: DEFAULT_SMOTE_K,
            seed: 0,
        }
    }
}

impl SamplerSpec {
    pub fn new(kind: SamplerKind, seed: u64) -> Self {
        SamplerSpec {
            kind,
            seed,
            ..Default::default()
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Balances the two classes. Original rows keep their order; new rows are
/// appended. The smaller class is the minority; equal classes are returned
/// unchanged.
pub fn resample(x: &[Vec<f64>], y: &[bool], spec: &SamplerSpec) -> Result<(Vec<Vec<f64>>, Vec<bool>)> {
    if spec.kind == SamplerKind::None {
        return Ok((x.to_vec(), y.to_vec()));
    }
    let pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    let (minority, majority, minority_label) = if pos.len() <= neg.len() {
        (pos, neg, true)
    } else {
        (neg, pos, false)
    };
    if minority.is_empty() {
        return Err(Error::InsufficientMinority { needed: 1, found: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let deficit = majority.len() - minority.len();
    let (mut xs, mut ys) = (x.to_vec(), y.to_vec());
    match spec.kind {
        SamplerKind::None => unreachable!(),
        SamplerKind::RandomOver => {
            for _ in 0..deficit {
                let i = minority[rng.gen_range(0..minority.len())];
                xs.push(x[i].clone());
                ys.push(minority_label);
            }
        }
        SamplerKind::RandomUnder => {
            let mut keep = vec![true; y.len()];
            let mut drop: Vec<usize> = index::sample(&mut rng, majority.len(), deficit).into_vec();
            drop.sort_unstable();
            for j in drop {
                keep[majority[j]] = false;
            }
            xs = (0..y.len()).filter(|&i| keep[i]).map(|i| x[i].clone()).collect();
            ys = (0..y.len()).filter(|&i| keep[i]).map(|i| y[i]).collect();
        }
        SamplerKind::Smote => {
            if minority.len() < 2 {
                return Err(Error::InsufficientMinority {
                    needed: 2,
                    found: minority.len(),
                });
            }
            let k = spec.k_neighbors.clamp(1, minority.len() - 1);
            let neighbours: Vec<Vec<usize>> = minority
                .iter()
                .map(|&i| {
                    let mut others: Vec<usize> = minority.iter().copied().filter(|&j| j != i).collect();
                    others.sort_by(|&a, &b| sq_dist(&x[i], &x[a]).total_cmp(&sq_dist(&x[i], &x[b])).then(a.cmp(&b)));
                    others.truncate(k);
                    others
                })
                .collect();
            for _ in 0..deficit {
                let m = rng.gen_range(0..minority.len());
                let base = &x[minority[m]];
                let nn = &x[neighbours[m][rng.gen_range(0..k)]];
                let t: f64 = rng.gen();
                xs.push(base.iter().zip(nn).map(|(a, b)| a + t * (b - a)).collect());
                ys.push(minority_label);
            }
        }
    }
    Ok((xs, ys))
}

// SPDX-License-Identifier: Apache-2.0

//! Cross-validation and classification metrics.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::models::{train, TrainSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvKind {
    ShuffleSplit,
    KFold,
    RepeatedKFold,
}

impl fmt::Display for CvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CvKind::ShuffleSplit => "shuffle_split",
            CvKind::KFold => "k_fold",
            CvKind::RepeatedKFold => "repeated_k_fold",
        })
    }
}

impl FromStr for CvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "shuffle_split" | "shuffle" => Ok(CvKind::ShuffleSplit),
            "k_fold" | "kfold" => Ok(CvKind::KFold),
            "repeated_k_fold" | "repeated" => Ok(CvKind::RepeatedKFold),
            _ => Err(Error::InvalidArgument(format!("unknown cross-validation {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvSpec {
    pub kind: CvKind,
    pub splits: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl CvSpec {
    pub fn k_fold(splits: usize, seed: u64) -> Self {
        CvSpec {
            kind: CvKind::KFold,
            splits,
            repeats: 1,
            seed,
        }
    }
}

/// Test share of a shuffle split.
pub const SHUFFLE_TEST_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn k_fold(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<Partition> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = n / k + usize::from(f < n % k);
        let mut test = order[start..start + len].to_vec();
        let mut train: Vec<usize> = order[..start].iter().chain(&order[start + len..]).copied().collect();
        test.sort_unstable();
        train.sort_unstable();
        out.push(Partition { train, test });
        start += len;
    }
    out
}

pub fn partitions(n: usize, cv: &CvSpec) -> Result<Vec<Partition>> {
    if cv.splits < 2 {
        return Err(Error::InvalidArgument(
            "cross-validation needs at least 2 splits".into(),
        ));
    }
    if n < 2 * cv.splits {
        return Err(Error::TooFewRows {
            needed: 2 * cv.splits,
            found: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cv.seed);
    Ok(match cv.kind {
        CvKind::KFold => k_fold(n, cv.splits, &mut rng),
        CvKind::RepeatedKFold => (0..cv.repeats.max(1))
            .flat_map(|_| k_fold(n, cv.splits, &mut rng))
            .collect(),
        CvKind::ShuffleSplit => {
            let n_test = ((n as f64) * SHUFFLE_TEST_FRACTION).ceil() as usize;
            (0..cv.splits)
                .map(|_| {
                    let mut order: Vec<usize> = (0..n).collect();
                    order.shuffle(&mut rng);
                    let mut test = order[..n_test].to_vec();
                    let mut train = order[n_test..].to_vec();
                    test.sort_unstable();
                    train.sort_unstable();
                    Partition { train, test }
                })
                .collect()
        }
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(predicted: &[bool], actual: &[bool]) -> Confusion {
        let mut c = Confusion::default();
        for (p, a) in predicted.iter().zip(actual) {
            match (p, a) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Absent when the evaluated rows hold a single class.
    pub auc: Option<f64>,
    pub confusion: Confusion,
}

impl ClassMetrics {
    pub fn compute(scores: &[f64], predicted: &[bool], actual: &[bool]) -> ClassMetrics {
        let c = Confusion::from_predictions(predicted, actual);
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ClassMetrics {
            precision,
            recall,
            f1,
            accuracy: ratio(c.tp + c.tn, actual.len()),
            auc: roc_auc(scores, actual),
            confusion: c,
        }
    }
}

/// Area under the ROC curve by trapezoids over score-sorted rows; tied
/// scores form one step.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let pos = labels.iter().filter(|b| **b).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp, mut area) = (0usize, 0usize, 0.0);
    let mut k = 0;
    while k < order.len() {
        let (tp0, fp0) = (tp, fp);
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        area += (fp - fp0) as f64 * (tp + tp0) as f64 / 2.0;
    }
    Some(area / (pos * neg) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Mean over folds where AUC is defined.
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub cv: CvSpec,
    pub folds: Vec<ClassMetrics>,
    pub mean: MeanMetrics,
}

pub fn mean_metrics(folds: &[ClassMetrics]) -> MeanMetrics {
    let n = folds.len().max(1) as f64;
    let avg = |f: fn(&ClassMetrics) -> f64| folds.iter().map(f).sum::<f64>() / n;
    let aucs: Vec<f64> = folds.iter().filter_map(|m| m.auc).collect();
    MeanMetrics {
        precision: avg(|m| m.precision),
        recall: avg(|m| m.recall),
        f1: avg(|m| m.f1),
        accuracy: avg(|m| m.accuracy),
        auc: (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64),
    }
}

/// Trains on each training part and scores the untouched test part. Folds
/// run in parallel; results keep fold order.
pub fn cross_validate(x: &[Vec<f64>], y: &[bool], spec: &TrainSpec, cv: &CvSpec) -> Result<CvReport> {
    let parts = partitions(x.len(), cv)?;
    let folds = parts
        .par_iter()
        .map(|p| {
            let tx: Vec<Vec<f64>> = p.train.iter().map(|&i| x[i].clone()).collect();
            let ty: Vec<bool> = p.train.iter().map(|&i| y[i]).collect();
            let model = train(&tx, &ty, spec, &[])?;
            let scores: Vec<f64> = p.test.iter().map(|&i| model.score(&x[i])).collect();
            let predicted: Vec<bool> = scores.iter().map(|s| *s >= model.threshold).collect();
            let actual: Vec<bool> = p.test.iter().map(|&i| y[i]).collect();
            Ok(ClassMetrics::compute(&scores, &predicted, &actual))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvReport {
        cv: *cv,
        mean: mean_metrics(&folds),
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linker::models::ModelKind;
    use rand::Rng;

    #[test]
    fn k_fold_partitions_rows() {
        for cv in [
            CvSpec::k_fold(5, 3),
            CvSpec {
                kind: CvKind::RepeatedKFold,
                splits: 5,
                repeats: 3,
                seed: 1,
            },
        ] {
            let parts = partitions(100, &cv).unwrap();
            assert_eq!(parts.len(), 5 * cv.repeats);
            for chunk in parts.chunks(5) {
                let mut seen = vec![0; 100];
                for p in chunk {
                    assert_eq!(p.test.len(), 20);
                    p.test.iter().for_each(|&i| seen[i] += 1);
                    assert!(p.train.iter().all(|i| !p.test.contains(i)));
                }
                assert!(seen.iter().all(|&c| c == 1));
            }
        }
        let s = partitions(
            10,
            &CvSpec {
                kind: CvKind::ShuffleSplit,
                splits: 4,
                repeats: 1,
                seed: 0,
            },
        )
        .unwrap();
        assert!(s.iter().all(|p| p.test.len() == 2 && p.train.len() == 8));
        assert!(matches!(
            partitions(7, &CvSpec::k_fold(4, 0)),
            Err(Error::TooFewRows { needed: 8, found: 7 })
        ));
    }

    #[test]
    fn auc_edges() {
        assert_eq!(roc_auc(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]), Some(1.0));
        assert_eq!(roc_auc(&[0.1, 0.2, 0.8, 0.9], &[true, true, false, false]), Some(0.0));
        assert_eq!(roc_auc(&[0.5; 4], &[true, false, true, false]), Some(0.5));
        assert_eq!(roc_auc(&[0.5, 0.4], &[true, true]), None);
        // One positive above one negative, one tied with it: 0.75.
        assert_eq!(roc_auc(&[0.9, 0.5, 0.5], &[true, true, false]), Some(0.75));
    }

    #[test]
    fn random_scores_near_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let scores: Vec<f64> = (0..1000).map(|_| rng.gen()).collect();
        let labels: Vec<bool> = (0..1000).map(|i| i % 2 == 0).collect();
        let auc = roc_auc(&scores, &labels).unwrap();
        assert!((auc - 0.5).abs() <= 0.05, "{auc}");
    }

    #[test]
    fn perfect_classifier_scores_one() {
        let x: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![if i >= 20 { 100.0 + i as f64 } else { i as f64 }])
            .collect();
        let y: Vec<bool> = (0..40).map(|i| i >= 20).collect();
        let r = cross_validate(
            &x,
            &y,
            &TrainSpec::new(ModelKind::DecisionTree, 0),
            &CvSpec::k_fold(4, 5),
        )
        .unwrap();
        assert_eq!(r.mean.auc, Some(1.0));
        assert_eq!(r.mean.f1, 1.0);
        let total: usize = r
            .folds
            .iter()
            .map(|f| f.confusion.tp + f.confusion.tn + f.confusion.fp + f.confusion.fn_)
            .sum();
        assert_eq!(total, 40);
    }
}

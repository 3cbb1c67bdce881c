// SPDX-License-Identifier: Apache-2.0

//! The six classifiers and the trained-model document.

pub mod bayes;
pub mod ensemble;
pub mod linear;
pub mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::sampling::{resample, SamplerSpec};
use super::scaler::Scaler;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LogisticRegression,
    DecisionTree,
    RandomForest,
    GradientBoosting,
    NaiveBayes,
    LinearSvm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::LogisticRegression,
        ModelKind::DecisionTree,
        ModelKind::RandomForest,
        ModelKind::GradientBoosting,
        ModelKind::NaiveBayes,
        ModelKind::LinearSvm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::LogisticRegression => "logistic_regression",
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::RandomForest => "random_forest",
            ModelKind::GradientBoosting => "gradient_boosting",
            ModelKind::NaiveBayes => "naive_bayes",
            ModelKind::LinearSvm => "linear_svm",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let kind = match key.as_str() {
            "lr" => ModelKind::LogisticRegression,
            "dt" => ModelKind::DecisionTree,
            "rf" => ModelKind::RandomForest,
            "gb" => ModelKind::GradientBoosting,
            "nb" => ModelKind::NaiveBayes,
            "svm" => ModelKind::LinearSvm,
            _ => *ModelKind::ALL
                .iter()
                .find(|k| k.as_str() == key)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown model {s:?}")))?,
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    LogisticRegression(linear::Linear),
    DecisionTree(tree::Tree),
    RandomForest(ensemble::Forest),
    GradientBoosting(ensemble::Boosted),
    NaiveBayes(bayes::GaussianNb),
    LinearSvm(linear::Linear),
}

impl ModelParams {
    /// Score in [0, 1] for an already scaled row; higher means good linker.
    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            ModelParams::LogisticRegression(m) | ModelParams::LinearSvm(m) => linear::sigmoid(m.margin(x)),
            ModelParams::DecisionTree(t) => t.predict(x),
            ModelParams::RandomForest(f) => f.score(x),
            ModelParams::GradientBoosting(b) => b.score(x),
            ModelParams::NaiveBayes(nb) => nb.score(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSpec {
    pub model: ModelKind,
    pub sampler: SamplerSpec,
    pub cost_sensitive: bool,
    pub seed: u64,
    pub threshold: f64,
}

impl TrainSpec {
    pub fn new(model: ModelKind, seed: u64) -> Self {
        TrainSpec {
            model,
            sampler: SamplerSpec {
                seed,
                ..Default::default()
            },
            cost_sensitive: false,
            seed,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema_version: u32,
    pub kind: ModelKind,
    pub feature_names: Vec<String>,
    pub scaler: Scaler,
    pub params: ModelParams,
    pub threshold: f64,
    /// Weights per label ("good", "bad"); all 1.0 without cost-sensitivity.
    pub class_weights: BTreeMap<String, f64>,
    pub seed: u64,
    pub sampler: SamplerSpec,
    /// False when an iterative fit hit its iteration cap.
    pub converged: bool,
    /// Normalized split gain for trees, |coefficient| share for linear
    /// models, absent for naive Bayes.
    pub importance: Option<Vec<f64>>,
    /// Digest of the training configuration, set by the CLI.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl TrainedModel {
    pub fn score(&self, raw: &[f64]) -> f64 {
        self.params.score(&self.scaler.transform_row(raw))
    }

    pub fn predict(&self, raw: &[f64]) -> bool {
        self.score(raw) >= self.threshold
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TrainedModel> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::unreadable(path, e))?;
        let model: TrainedModel = serde_json::from_str(&text).map_err(|e| Error::unreadable(path, e))?;
        if model.schema_version != SCHEMA_VERSION {
            return Err(Error::unreadable(
                path,
                format!("unsupported schema version {}", model.schema_version),
            ));
        }
        Ok(model)
    }
}

/// w_c = N / (2·N_c) over the given labels.
pub fn class_weights(y: &[bool]) -> (f64, f64) {
    let n = y.len() as f64;
    let good = y.iter().filter(|b| **b).count() as f64;
    let bad = n - good;
    let w = |c: f64| if c > 0.0 { n / (2.0 * c) } else { 0.0 };
    (w(good), w(bad))
}

fn linear_importance(m: &linear::Linear) -> Vec<f64> {
    let mut v: Vec<f64> = m.weights.iter().map(|w| w.abs()).collect();
    tree::normalize(&mut v);
    v
}

/// Fits the scaler on `x`, resamples the scaled rows, then fits the model.
pub fn train(x: &[Vec<f64>], y: &[bool], spec: &TrainSpec, feature_names: &[&str]) -> Result<TrainedModel> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("feature and label counts differ".into()));
    }
    let good = y.iter().filter(|b| **b).count();
    if good == 0 || good == y.len() {
        return Err(Error::DegenerateData("training rows contain a single class".into()));
    }
    if !(0.0..=1.0).contains(&spec.threshold) {
        return Err(Error::InvalidArgument(format!(
            "threshold {} outside [0, 1]",
            spec.threshold
        )));
    }
    let scaler = Scaler::fit(x);
    let scaled = scaler.transform(x);
    let (xs, ys) = resample(&scaled, y, &spec.sampler)?;
    let (w_good, w_bad) = if spec.cost_sensitive {
        class_weights(&ys)
    } else {
        (1.0, 1.0)
    };
    let w: Vec<f64> = ys.iter().map(|&g| if g { w_good } else { w_bad }).collect();

    let mut converged = true;
    let (params, importance) = match spec.model {
        ModelKind::LogisticRegression => {
            let (m, ok) = linear::fit_logistic(&xs, &ys, &w);
            converged = ok;
            let imp = linear_importance(&m);
            (ModelParams::LogisticRegression(m), Some(imp))
        }
        ModelKind::LinearSvm => {
            let m = linear::fit_svm(&xs, &ys, &w);
            let imp = linear_importance(&m);
            (ModelParams::LinearSvm(m), Some(imp))
        }
        ModelKind::DecisionTree => {
            let (t, imp) = ensemble::fit_decision_tree(&xs, &ys, &w);
            (ModelParams::DecisionTree(t), Some(imp))
        }
        ModelKind::RandomForest => {
            let (f, imp) = ensemble::fit_random_forest(&xs, &ys, &w, spec.seed);
            (ModelParams::RandomForest(f), Some(imp))
        }
        ModelKind::GradientBoosting => {
            let (b, imp) = ensemble::fit_gradient_boosting(&xs, &ys, &w);
            (ModelParams::GradientBoosting(b), Some(imp))
        }
        ModelKind::NaiveBayes => (ModelParams::NaiveBayes(bayes::fit_nb(&xs, &ys, &w)), None),
    };
    if !converged {
        log::warn!("{} hit its iteration cap", spec.model);
    }
    Ok(TrainedModel {
        schema_version: SCHEMA_VERSION,
        kind: spec.model,
        feature_names: feature_names.iter().map(|s| s.to_string()).collect(),
        scaler,
        params,
        threshold: spec.threshold,
        class_weights: BTreeMap::from([("bad".to_owned(), w_bad), ("good".to_owned(), w_good)]),
        seed: spec.seed,
        sampler: spec.sampler,
        converged,
        importance,
        config_hash: None,
    })
}

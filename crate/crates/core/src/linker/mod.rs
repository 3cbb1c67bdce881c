// SPDX-License-Identifier: Apache-2.0

//! Good/bad linker classification of bug-fixing commits.
//!
//! A commit of a fixing set is a good linker when SZZ, started from it,
//! reaches a true inducing commit-set. Features describe the commit and its
//! place in the set; trained models become input filters for aggregation.

pub mod cv;
pub mod diagnostics;
pub mod features;
pub mod filter;
pub mod labels;
pub mod models;
pub mod sampling;
pub mod scaler;

use std::collections::BTreeMap;

use crate::commitset::Dataset;
use crate::error::Result;
use crate::history::{RepositoryHistory, TimestampKind};

pub use cv::{cross_validate, roc_auc, ClassMetrics, Confusion, CvKind, CvReport, CvSpec};
pub use diagnostics::{diagnostics, pca, spearman_matrix, Diagnostics, Pca};
pub use features::{extract_features, extract_features_with, FeatureRow, FeatureVector, RowKey, FEATURE_NAMES};
pub use filter::{make_input_filter, oracle_filter_bound, restrict_outputs, LinkerFilter};
pub use labels::{label_commits, LabelScheme, LinkerLabel, ProvenanceMap};
pub use models::{train, ModelKind, TrainSpec, TrainedModel};
pub use sampling::{resample, SamplerKind, SamplerSpec};
pub use scaler::Scaler;

/// Features of every commit of every link's fixing set, in dataset order.
pub fn feature_rows(history: &RepositoryHistory, dataset: &Dataset, clock: TimestampKind) -> Result<Vec<FeatureRow>> {
    let mut rows = Vec::new();
    for link in &dataset.links {
        let set = dataset.fixing_set(link);
        for commit in &set.commits {
            rows.push(FeatureRow {
                key: RowKey {
                    bug_id: link.bug_id.clone(),
                    commit: commit.clone(),
                },
                fixing_set: set.id.to_string(),
                features: extract_features_with(history, set, commit, clock)?,
            });
        }
    }
    Ok(rows)
}

/// Labeled matrix for training; excluded and unlabeled rows are skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    pub keys: Vec<RowKey>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
}

impl TrainingSet {
    pub fn new(rows: &[FeatureRow], labels: &BTreeMap<RowKey, LinkerLabel>) -> TrainingSet {
        let mut out = TrainingSet::default();
        for row in rows {
            let good = match labels.get(&row.key) {
                Some(LinkerLabel::Good) => true,
                Some(LinkerLabel::Bad) => false,
                _ => continue,
            };
            out.keys.push(row.key.clone());
            out.x.push(row.features.to_vec());
            out.y.push(good);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Linker models as SZZ input filters.

use std::collections::{BTreeMap, BTreeSet};

use super::features::{extract_features_with, RowKey};
use super::labels::{label_commits, LabelScheme, LinkerLabel, ProvenanceMap};
use super::models::TrainedModel;
use crate::commitset::{AggregatedCandidates, CommitSet, Dataset, InputFilter, SetId};
use crate::error::Result;
use crate::eval::{evaluate, FilteredReport, PerspectiveId};
use crate::history::{CommitId, RepositoryHistory, TimestampKind};
use crate::variants::VariantId;

/// Accepts a commit when the model scores it at or above its threshold.
pub struct LinkerFilter {
    pub model: TrainedModel,
    pub clock: TimestampKind,
}

impl InputFilter for LinkerFilter {
    fn accept(&self, history: &RepositoryHistory, set: &CommitSet, commit: &CommitId) -> Result<bool> {
        let f = extract_features_with(history, set, commit, self.clock)?;
        Ok(self.model.predict(&f.to_array()))
    }
}

pub fn make_input_filter(model: TrainedModel) -> LinkerFilter {
    LinkerFilter {
        model,
        clock: TimestampKind::Committer,
    }
}

/// Applies a per-(fixing set, commit) decision to finished aggregations.
pub fn restrict_outputs(
    outputs: &BTreeMap<SetId, AggregatedCandidates>,
    mut keep: impl FnMut(&SetId, &CommitId) -> bool,
) -> BTreeMap<SetId, AggregatedCandidates> {
    outputs
        .iter()
        .map(|(id, agg)| (id.clone(), agg.restrict(|c| keep(id, c))))
        .collect()
}

/// Evaluates every variant with only its good linkers kept: the best a
/// perfect linker classifier could achieve.
pub fn oracle_filter_bound(
    dataset: &Dataset,
    provenance: &ProvenanceMap,
    perspective: PerspectiveId,
) -> Result<BTreeMap<VariantId, FilteredReport>> {
    let mut out = BTreeMap::new();
    for (&variant, outputs) in provenance {
        let labels = label_commits(dataset, provenance, LabelScheme::Single(variant))?;
        let good: BTreeSet<(SetId, CommitId)> = dataset
            .links
            .iter()
            .flat_map(|l| {
                dataset.fixing_set(l).commits.iter().filter_map(|c| {
                    let key = RowKey {
                        bug_id: l.bug_id.clone(),
                        commit: c.clone(),
                    };
                    (labels.get(&key) == Some(&LinkerLabel::Good)).then(|| (l.fixing_set.clone(), c.clone()))
                })
            })
            .collect();
        let restricted = restrict_outputs(outputs, |s, c| good.contains(&(s.clone(), c.clone())));
        let report = evaluate(dataset, &restricted, perspective, None)?;
        out.insert(variant, FilteredReport::new(report));
    }
    Ok(out)
}

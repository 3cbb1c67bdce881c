// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::features::RowKey;
use crate::commitset::{AggregatedCandidates, Dataset, SetId};
use crate::error::{Error, Result};
use crate::variants::VariantId;

/// Unfiltered aggregation results: variant → fixing set → candidates.
pub type ProvenanceMap = BTreeMap<VariantId, BTreeMap<SetId, AggregatedCandidates>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkerLabel {
    Good,
    Bad,
    Excluded,
}

impl LinkerLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkerLabel::Good => "good",
            LinkerLabel::Bad => "bad",
            LinkerLabel::Excluded => "excluded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelScheme {
    Single(VariantId),
    AllVariants,
}

impl LabelScheme {
    pub fn variants(self) -> Vec<VariantId> {
        match self {
            LabelScheme::Single(v) => vec![v],
            LabelScheme::AllVariants => VariantId::ALL.to_vec(),
        }
    }
}

impl fmt::Display for LabelScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelScheme::Single(v) => write!(f, "single:{v}"),
            LabelScheme::AllVariants => f.write_str("all"),
        }
    }
}

impl FromStr for LabelScheme {
    type Err = Error;

    /// `all`, or `single:<variant>`, or a bare variant name.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("all") || t.eq_ignore_ascii_case("all_variants") {
            return Ok(LabelScheme::AllVariants);
        }
        let v = t.strip_prefix("single:").unwrap_or(t);
        Ok(LabelScheme::Single(v.parse()?))
    }
}

/// Whether `commit` of the fixing set reaches a true inducing set under
/// one variant's aggregation.
fn good_under(agg: &AggregatedCandidates, commit: &crate::history::CommitId, truth: &BTreeSet<&SetId>) -> bool {
    agg.contributing
        .iter()
        .any(|(set, prov)| truth.contains(set) && prov.iter().any(|p| &p.input == commit))
}

pub fn label_commits(
    dataset: &Dataset,
    provenance: &ProvenanceMap,
    scheme: LabelScheme,
) -> Result<BTreeMap<RowKey, LinkerLabel>> {
    let variants = scheme.variants();
    let mut labels = BTreeMap::new();
    for link in &dataset.links {
        let truth: BTreeSet<&SetId> = link.inducing_sets.iter().collect();
        let mut aggs = Vec::with_capacity(variants.len());
        for v in &variants {
            let agg =
                provenance
                    .get(v)
                    .and_then(|m| m.get(&link.fixing_set))
                    .ok_or_else(|| Error::MissingProvenance {
                        variant: v.to_string(),
                        set: link.fixing_set.to_string(),
                    })?;
            aggs.push(agg);
        }
        for commit in &dataset.fixing_set(link).commits {
            let mut verdicts = BTreeSet::new();
            for (v, agg) in variants.iter().zip(&aggs) {
                if !agg.inputs.contains(commit) {
                    return Err(Error::MissingProvenance {
                        variant: v.to_string(),
                        set: format!("{} (commit {commit})", link.fixing_set),
                    });
                }
                verdicts.insert(good_under(agg, commit, &truth));
            }
            let label = match (verdicts.contains(&true), verdicts.contains(&false)) {
                (true, false) => LinkerLabel::Good,
                (false, true) => LinkerLabel::Bad,
                _ => LinkerLabel::Excluded,
            };
            labels.insert(
                RowKey {
                    bug_id: link.bug_id.clone(),
                    commit: commit.clone(),
                },
                label,
            );
        }
    }
    Ok(labels)
}

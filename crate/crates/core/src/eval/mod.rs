// SPDX-License-Identifier: Apache-2.0

//! Scoring aggregated candidates against ground-truth links.

mod overlap;
mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commitset::{AggregatedCandidates, Dataset, LinkRecord, SetId};
use crate::error::{Error, Result};
use crate::ingest::LinkabilityFlags;
use crate::variants::VariantId;

pub use overlap::{overlap, OverlapCell, OverlapKind, OverlapMatrix};
pub use report::{render_filtered_table, render_table, write_csv, FilteredReport, TableRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PerspectiveId {
    /// Every link.
    #[serde(rename = "P1_all_sets")]
    P1AllSets,
    /// Links whose fixing and inducing sets are single commits.
    #[serde(rename = "P2_singleton_sets")]
    P2SingletonSets,
    /// Links with exactly one inducing set, both sides real commit-sets.
    #[serde(rename = "P3_external_sets")]
    P3ExternalSets,
}

impl PerspectiveId {
    pub fn as_str(self) -> &'static str {
        match self {
            PerspectiveId::P1AllSets => "P1_all_sets",
            PerspectiveId::P2SingletonSets => "P2_singleton_sets",
            PerspectiveId::P3ExternalSets => "P3_external_sets",
        }
    }

    /// `None` when `link` satisfies the perspective, else the reason.
    pub fn violation(self, dataset: &Dataset, link: &LinkRecord) -> Option<String> {
        let fixing = dataset.fixing_set(link);
        match self {
            PerspectiveId::P1AllSets => None,
            PerspectiveId::P2SingletonSets => {
                if fixing.commits.len() != 1 {
                    return Some(format!("fixing set has {} commits", fixing.commits.len()));
                }
                if link.inducing_sets.is_empty() {
                    return Some("no inducing set".into());
                }
                link.inducing_sets.iter().find_map(|id| match dataset.index.lookup(id) {
                    Some(s) if s.commits.len() == 1 => None,
                    Some(s) => Some(format!("inducing set {id} has {} commits", s.commits.len())),
                    None => Some(format!("inducing set {id} is not indexed")),
                })
            }
            PerspectiveId::P3ExternalSets => {
                if link.inducing_sets.len() != 1 {
                    return Some(format!("{} inducing sets", link.inducing_sets.len()));
                }
                if fixing.is_virtual || link.inducing_sets[0].is_virtual() {
                    return Some("virtual commit-set".into());
                }
                None
            }
        }
    }

    /// Copy of `dataset` holding only the links valid under this perspective.
    pub fn select(self, dataset: &Dataset) -> Dataset {
        let mut out = dataset.clone();
        out.retain(|l| self.violation(dataset, l).is_none());
        out
    }
}

impl fmt::Display for PerspectiveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PerspectiveId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.split('_').next().unwrap_or_default() {
            "p1" | "1" => Ok(PerspectiveId::P1AllSets),
            "p2" | "2" => Ok(PerspectiveId::P2SingletonSets),
            "p3" | "3" => Ok(PerspectiveId::P3ExternalSets),
            _ => Err(Error::InvalidArgument(format!("unknown perspective {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkScore {
    pub bug_id: String,
    pub tp: BTreeSet<SetId>,
    pub fp: BTreeSet<SetId>,
    #[serde(rename = "fn")]
    pub fn_: BTreeSet<SetId>,
    pub jaccard_distance: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub discarded: bool,
}

pub fn jaccard_distance<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    1.0 - a.intersection(b).count() as f64 / union as f64
}

pub fn score_link(truth: &LinkRecord, predicted: &AggregatedCandidates) -> Result<LinkScore> {
    if truth.fixing_set != predicted.fixing_set {
        return Err(Error::MismatchedFixingSet {
            truth: truth.fixing_set.to_string(),
            predicted: predicted.fixing_set.to_string(),
        });
    }
    let expected: BTreeSet<SetId> = truth.inducing_sets.iter().cloned().collect();
    let got = &predicted.candidate_sets;
    Ok(LinkScore {
        bug_id: truth.bug_id.clone(),
        tp: got.intersection(&expected).cloned().collect(),
        fp: got.difference(&expected).cloned().collect(),
        fn_: expected.difference(got).cloned().collect(),
        jaccard_distance: jaccard_distance(got, &expected),
        discarded: predicted.discarded(),
    })
}

/// Micro-averaged metrics from pooled counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    pub fn from_counts(identified: usize, correct: usize, relevant: usize) -> Metrics {
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let precision = ratio(correct, identified);
        let recall = ratio(correct, relevant);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics { precision, recall, f1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub variant: VariantId,
    pub perspective: PerspectiveId,
    pub n_links: usize,
    pub identified: usize,
    pub correct: usize,
    pub relevant: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub avg_jaccard_distance: f64,
    pub per_link: Vec<LinkScore>,
}

impl EvalReport {
    pub fn from_scores(variant: VariantId, perspective: PerspectiveId, per_link: Vec<LinkScore>) -> EvalReport {
        let identified = per_link.iter().map(|s| s.tp.len() + s.fp.len()).sum();
        let correct = per_link.iter().map(|s| s.tp.len()).sum();
        let relevant = per_link.iter().map(|s| s.tp.len() + s.fn_.len()).sum();
        let m = Metrics::from_counts(identified, correct, relevant);
        let avg_jaccard_distance = if per_link.is_empty() {
            0.0
        } else {
            per_link.iter().map(|s| s.jaccard_distance).sum::<f64>() / per_link.len() as f64
        };
        EvalReport {
            variant,
            perspective,
            n_links: per_link.len(),
            identified,
            correct,
            relevant,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            avg_jaccard_distance,
            per_link,
        }
    }

    /// Report over the links accepted by `keep`, with per-link scores unchanged.
    pub fn subset(&self, mut keep: impl FnMut(&LinkScore) -> bool) -> EvalReport {
        let kept = self.per_link.iter().filter(|s| keep(s)).cloned().collect();
        EvalReport::from_scores(self.variant, self.perspective, kept)
    }

    pub fn discarded(&self) -> usize {
        self.per_link.iter().filter(|s| s.discarded).count()
    }
}

/// `outputs` maps fixing-set id to the aggregation for that set. With
/// `linkability` given, links flagged unlinkable are dropped first.
pub fn evaluate(
    dataset: &Dataset,
    outputs: &BTreeMap<SetId, AggregatedCandidates>,
    perspective: PerspectiveId,
    linkability: Option<&BTreeMap<String, LinkabilityFlags>>,
) -> Result<EvalReport> {
    let mut variant = None;
    let mut pairs = Vec::with_capacity(dataset.links.len());
    for link in &dataset.links {
        if let Some(reason) = perspective.violation(dataset, link) {
            return Err(Error::PerspectiveViolation {
                bug_id: link.bug_id.clone(),
                perspective: perspective.to_string(),
                reason,
            });
        }
        if let Some(flags) = linkability {
            let f = flags
                .get(&link.bug_id)
                .ok_or_else(|| Error::CoverageGap(format!("no linkability flags for {}", link.bug_id)))?;
            if f.unlinkable() {
                continue;
            }
        }
        let out = outputs
            .get(&link.fixing_set)
            .ok_or_else(|| Error::CoverageGap(format!("no output for fixing set {}", link.fixing_set)))?;
        match variant {
            None => variant = Some(out.variant),
            Some(v) if v != out.variant => {
                return Err(Error::InvalidArgument(format!(
                    "outputs mix variants {v} and {}",
                    out.variant
                )))
            }
            _ => {}
        }
        pairs.push((link, out));
    }
    let scores = pairs
        .par_iter()
        .map(|(link, out)| score_link(link, out))
        .collect::<Result<Vec<_>>>()?;
    let variant = variant
        .or_else(|| outputs.values().next().map(|o| o.variant))
        .unwrap_or(VariantId::B);
    Ok(EvalReport::from_scores(variant, perspective, scores))
}

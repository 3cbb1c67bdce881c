// SPDX-License-Identifier: Apache-2.0

//! The five SZZ variants, all expressed over [`blame_lines`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::blame::{blame_lines, BlameOptions, DEFAULT_REFACTORING_THRESHOLD};
use crate::error::{Error, Result};
use crate::history::{CommitId, RepositoryHistory, TimestampKind};

/// B: plain blame. AG: annotation-graph blame. L: largest AG candidate.
/// R: most recent AG candidate. X: blame with an ignore-revisions list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VariantId {
    B,
    AG,
    L,
    R,
    X,
}

impl VariantId {
    pub const ALL: [VariantId; 5] = [VariantId::B, VariantId::AG, VariantId::L, VariantId::R, VariantId::X];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantId::B => "B",
            VariantId::AG => "AG",
            VariantId::L => "L",
            VariantId::R => "R",
            VariantId::X => "X",
        }
    }

    /// Name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            VariantId::B => "B-SZZ",
            VariantId::AG => "AG-SZZ",
            VariantId::L => "L-SZZ",
            VariantId::R => "R-SZZ",
            VariantId::X => "X-SZZ",
        }
    }

    pub fn single_candidate(self) -> bool {
        matches!(self, VariantId::L | VariantId::R)
    }
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariantId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase();
        let key = key.strip_suffix("-SZZ").unwrap_or(&key);
        match key {
            "B" => Ok(VariantId::B),
            "AG" => Ok(VariantId::AG),
            "L" => Ok(VariantId::L),
            "R" => Ok(VariantId::R),
            "X" | "PYDRILLER" | "PYDR" => Ok(VariantId::X),
            _ => Err(Error::UnknownVariant(s.to_owned())),
        }
    }
}

/// How L-SZZ measures "largest".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LargestBy {
    /// Total added plus removed lines of the candidate commit.
    #[default]
    CandidateSize,
    /// Number of traced lines resolved to the candidate.
    TracedLines,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantConfig {
    pub skip_list: BTreeSet<CommitId>,
    pub refactoring_threshold: usize,
    pub recency: TimestampKind,
    pub largest_by: LargestBy,
}

impl Default for VariantConfig {
    fn default() -> Self {
        VariantConfig {
            skip_list: BTreeSet::new(),
            refactoring_threshold: DEFAULT_REFACTORING_THRESHOLD,
            recency: TimestampKind::Committer,
            largest_by: LargestBy::CandidateSize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub fixing_commit: CommitId,
    pub variant: VariantId,
    pub candidates: BTreeSet<CommitId>,
    pub per_candidate_touch_count: BTreeMap<CommitId, usize>,
}

pub fn run_variant(
    history: &RepositoryHistory,
    fixing: &CommitId,
    variant: VariantId,
    config: &VariantConfig,
) -> Result<CandidateReport> {
    let options = match variant {
        VariantId::B => BlameOptions::plain(),
        VariantId::X => BlameOptions::skip(config.skip_list.clone()),
        VariantId::AG | VariantId::L | VariantId::R => BlameOptions::graph(),
    }
    .with_threshold(config.refactoring_threshold);
    let mut counts = blame_lines(history, fixing, &options)?.origin_counts();

    if variant.single_candidate() {
        // Ascending id order plus a strict comparison keeps the smallest id
        // among ties.
        let mut best: Option<(i64, &CommitId)> = None;
        for id in counts.keys() {
            let commit = history.commit(id)?;
            let score = match (variant, config.largest_by) {
                (VariantId::R, _) => config.recency.of(commit),
                (_, LargestBy::CandidateSize) => commit.changed_lines() as i64,
                (_, LargestBy::TracedLines) => counts[id] as i64,
            };
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, id));
            }
        }
        let keep = best.map(|(_, id)| id.clone());
        counts.retain(|id, _| Some(id) == keep.as_ref());
    }

    Ok(CandidateReport {
        fixing_commit: fixing.clone(),
        variant,
        candidates: counts.keys().cloned().collect(),
        per_candidate_touch_count: counts,
    })
}

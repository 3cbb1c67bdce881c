// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::commitset::CommitSet;
use crate::error::{Error, Result};
use crate::history::{Commit, CommitId, RepositoryHistory, TimestampKind};

pub const FEATURE_NAMES: [&str; 8] = [
    "Addition",
    "Deletion",
    "Files",
    "CS Addition",
    "CS Deletion",
    "CS Files",
    "Order",
    "CS Shared Files",
];

pub const N_FEATURES: usize = FEATURE_NAMES.len();

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub addition: f64,
    pub deletion: f64,
    pub files: f64,
    pub cs_addition: f64,
    pub cs_deletion: f64,
    pub cs_files: f64,
    pub order: f64,
    pub cs_shared_files: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; N_FEATURES] {
        [
            self.addition,
            self.deletion,
            self.files,
            self.cs_addition,
            self.cs_deletion,
            self.cs_files,
            self.order,
            self.cs_shared_files,
        ]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.to_array().to_vec()
    }
}

/// Added lines, deleted lines and files of one commit. Binary files count
/// as touched files but carry no lines.
fn sizes(commit: &Commit) -> (usize, usize, usize) {
    let text = commit.changes.iter().filter(|c| !c.is_binary);
    let added = text.clone().map(|c| c.added_lines()).sum();
    let deleted = text.map(|c| c.deleted_lines()).sum();
    (added, deleted, commit.changes.len())
}

fn ratio(part: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        part as f64 / total as f64
    }
}

pub fn extract_features(history: &RepositoryHistory, set: &CommitSet, commit: &CommitId) -> Result<FeatureVector> {
    extract_features_with(history, set, commit, TimestampKind::Committer)
}

/// `clock` picks the timestamp that orders the set for the Order feature.
pub fn extract_features_with(
    history: &RepositoryHistory,
    set: &CommitSet,
    commit: &CommitId,
    clock: TimestampKind,
) -> Result<FeatureVector> {
    let position = set
        .commits
        .iter()
        .position(|c| c == commit)
        .ok_or_else(|| Error::CommitNotInSet {
            commit: commit.to_string(),
            set: set.id.to_string(),
        })?;
    let members = set
        .commits
        .iter()
        .map(|c| history.commit(c))
        .collect::<Result<Vec<_>>>()?;
    let own = sizes(members[position]);
    let (mut add_total, mut del_total, mut files_total) = (0, 0, 0);
    for m in &members {
        let (a, d, f) = sizes(m);
        add_total += a;
        del_total += d;
        files_total += f;
    }

    // Stable sort keeps integration order among equal timestamps.
    let mut by_time: Vec<usize> = (0..members.len()).collect();
    by_time.sort_by_key(|&i| clock.of(members[i]));
    let rank = by_time.iter().position(|&i| i == position).expect("member");
    let order = if members.len() > 1 {
        rank as f64 / (members.len() - 1) as f64
    } else {
        0.0
    };

    let own_paths: BTreeSet<&str> = members[position].touched_paths().collect();
    let shared = members
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != position)
        .any(|(_, m)| m.touched_paths().any(|p| own_paths.contains(p)));

    Ok(FeatureVector {
        addition: own.0 as f64,
        deletion: own.1 as f64,
        files: own.2 as f64,
        cs_addition: ratio(own.0, add_total),
        cs_deletion: ratio(own.1, del_total),
        cs_files: ratio(own.2, files_total),
        order,
        cs_shared_files: if shared { 1.0 } else { 0.0 },
    })
}

/// One bug-fixing commit of one link.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RowKey {
    pub bug_id: String,
    pub commit: CommitId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub key: RowKey,
    pub fixing_set: String,
    pub features: FeatureVector,
}

/// Writes rows with an optional label column; header uses the feature names.
/// Label text for a row, if any.
pub type LabelLookup<'a> = dyn Fn(&RowKey) -> Option<String> + 'a;

pub fn write_feature_csv(rows: &[FeatureRow], labels: Option<&LabelLookup<'_>>, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["bug_id", "fixing_set", "commit"];
    header.extend(FEATURE_NAMES);
    if labels.is_some() {
        header.push("label");
    }
    w.write_record(&header)?;
    for row in rows {
        let mut record = vec![
            row.key.bug_id.clone(),
            row.fixing_set.clone(),
            row.key.commit.to_string(),
        ];
        record.extend(row.features.to_array().iter().map(|x| x.to_string()));
        if let Some(label_of) = labels {
            record.push(label_of(&row.key).unwrap_or_default());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::commitset::{CommitSet, Dataset, LinkRecord};
use crate::error::{Error, Result};
use crate::history::RepositoryHistory;

/// Reasons a link cannot be recovered by line tracing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkabilityFlags {
    /// The fix only adds lines.
    pub ghost_fix: bool,
    /// Fixing and inducing sets touch disjoint files.
    pub no_shared_files: bool,
    /// No inducing set exists.
    pub extrinsic: bool,
}

impl LinkabilityFlags {
    pub fn unlinkable(&self) -> bool {
        self.ghost_fix || self.no_shared_files || self.extrinsic
    }
}

fn touched_paths(history: &RepositoryHistory, set: &CommitSet) -> Result<BTreeSet<String>> {
    let mut paths = BTreeSet::new();
    for id in &set.commits {
        paths.extend(history.commit(id)?.touched_paths().map(str::to_owned));
    }
    Ok(paths)
}

pub fn compute_linkability(
    history: &RepositoryHistory,
    dataset: &Dataset,
    record: &LinkRecord,
) -> Result<LinkabilityFlags> {
    let fixing = dataset.fixing_set(record);
    let mut ghost_fix = true;
    for id in &fixing.commits {
        let commit = history.commit(id)?;
        ghost_fix &= commit
            .changes
            .iter()
            .flat_map(|c| &c.hunks)
            .all(|h| h.old_lines.is_empty());
    }
    let extrinsic = record.inducing_sets.is_empty();
    let no_shared_files = if extrinsic {
        false
    } else {
        let fix_paths = touched_paths(history, fixing)?;
        let mut shared = false;
        for id in &record.inducing_sets {
            let set = dataset
                .index
                .lookup(id)
                .ok_or_else(|| Error::InvalidDataset(format!("unknown set {id}")))?;
            shared |= !touched_paths(history, &set)?.is_disjoint(&fix_paths);
        }
        !shared
    };
    Ok(LinkabilityFlags {
        ghost_fix,
        no_shared_files,
        extrinsic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::{ChangeKind, Commit, CommitId, FileChange, Hunk};

    fn commit(id: &str, parent: Option<&str>, kind: ChangeKind, path: &str, hunk: Hunk) -> Commit {
        Commit {
            id: id.into(),
            parents: parent.map(CommitId::from).into_iter().collect(),
            author_timestamp: 0,
            committer_timestamp: 0,
            message: String::new(),
            changes: vec![FileChange {
                path_before: (kind != ChangeKind::Added).then(|| path.to_owned()),
                path_after: Some(path.to_owned()),
                kind,
                hunks: vec![hunk],
                is_binary: false,
            }],
        }
    }

    fn h(old_start: usize, old: &[&str], new_start: usize, new: &[&str]) -> Hunk {
        Hunk {
            old_start,
            old_lines: old.iter().map(|s| s.to_string()).collect(),
            new_start,
            new_lines: new.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn history() -> RepositoryHistory {
        RepositoryHistory::new(vec![
            commit("a1", None, ChangeKind::Added, "a.c", h(1, &[], 1, &["x", "y"])),
            commit("b1", Some("a1"), ChangeKind::Added, "b.c", h(1, &[], 1, &["p"])),
            commit(
                "ghost",
                Some("b1"),
                ChangeKind::Modified,
                "a.c",
                h(3, &[], 3, &["1", "2", "3", "4"]),
            ),
            commit(
                "fixb",
                Some("ghost"),
                ChangeKind::Modified,
                "b.c",
                h(1, &["p"], 1, &["q"]),
            ),
        ])
        .unwrap()
    }

    fn set(id: &str, c: &str) -> CommitSet {
        CommitSet::new(id, vec![c.into()])
    }

    #[test]
    fn flags() {
        let hist = history();
        let mut ds = Dataset::default();
        ds.push("ghost".into(), set("G", "ghost"), vec![set("A", "a1")])
            .unwrap();
        ds.push("apart".into(), set("F", "fixb"), vec![set("A", "a1")]).unwrap();
        ds.push("ext".into(), set("F2", "b1"), vec![]).unwrap();

        let f = compute_linkability(&hist, &ds, &ds.links[0]).unwrap();
        assert!(f.ghost_fix && !f.no_shared_files && !f.extrinsic);
        let f = compute_linkability(&hist, &ds, &ds.links[1]).unwrap();
        assert!(!f.ghost_fix && f.no_shared_files);
        let f = compute_linkability(&hist, &ds, &ds.links[2]).unwrap();
        assert!(f.extrinsic && !f.no_shared_files && f.unlinkable());
    }

    #[test]
    fn unknown_commit() {
        let hist = history();
        let mut ds = Dataset::default();
        ds.push("x".into(), set("X", "nope"), vec![]).unwrap();
        assert!(matches!(
            compute_linkability(&hist, &ds, &ds.links[0]),
            Err(Error::UnknownCommit(_))
        ));
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Commit history with line-level diffs.
//!
//! Every [`Commit`] carries its diff against its FIRST parent. File contents
//! are never stored: [`RepositoryHistory::snapshot`] rebuilds them by
//! replaying hunks along the first-parent chain, memoizing per touching
//! commit. The same representation backs both the `git` adapter and the
//! JSON fixture format used by tests.

mod fixture;
mod git;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};
use std::fmt;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fixture::{read_fixture, write_fixture};
pub use git::GitBackend;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommitId(String);

impl CommitId {
    pub fn new(value: impl Into<String>) -> Self {
        CommitId(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CommitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CommitId {
    fn from(value: &str) -> Self {
        CommitId(value.to_owned())
    }
}

impl From<String> for CommitId {
    fn from(value: String) -> Self {
        CommitId(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeKind {
    Added,
    Deleted,
    Modified,
    Renamed,
}

/// One contiguous edit.
///
/// `old_start` is the 1-based line of the first removed line; for a pure
/// insertion it is the old-file line the new lines are inserted before
/// (`old_len + 1` appends). `new_start` follows the same rule on the new side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hunk {
    pub old_start: usize,
    #[serde(default)]
    pub old_lines: Vec<String>,
    pub new_start: usize,
    #[serde(default)]
    pub new_lines: Vec<String>,
}

impl Hunk {
    pub fn changed_lines(&self) -> usize {
        self.old_lines.len() + self.new_lines.len()
    }

    fn net(&self) -> isize {
        self.new_lines.len() as isize - self.old_lines.len() as isize
    }

    /// New-side position range `[start, end)` covered by added lines.
    pub fn new_range(&self) -> std::ops::Range<usize> {
        self.new_start..self.new_start + self.new_lines.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    #[serde(default)]
    pub path_before: Option<String>,
    #[serde(default)]
    pub path_after: Option<String>,
    pub kind: ChangeKind,
    #[serde(default)]
    pub hunks: Vec<Hunk>,
    #[serde(default)]
    pub is_binary: bool,
}

impl FileChange {
    /// Path used when comparing file sets: the new path, or the old one for
    /// deletions.
    pub fn path(&self) -> &str {
        self.path_after
            .as_deref()
            .or(self.path_before.as_deref())
            .unwrap_or_default()
    }

    pub fn added_lines(&self) -> usize {
        self.hunks.iter().map(|h| h.new_lines.len()).sum()
    }

    pub fn deleted_lines(&self) -> usize {
        self.hunks.iter().map(|h| h.old_lines.len()).sum()
    }

    pub fn changed_lines(&self) -> usize {
        self.hunks.iter().map(Hunk::changed_lines).sum()
    }

    /// Maps a 1-based position in the new file to the old file.
    ///
    /// Returns `Err(hunk_index)` when the position lies on a line added by
    /// this change.
    pub fn map_to_old(&self, new_pos: usize) -> std::result::Result<usize, usize> {
        let mut shift: isize = 0;
        for (i, hunk) in self.hunks.iter().enumerate() {
            if hunk.new_range().contains(&new_pos) {
                return Err(i);
            }
            if new_pos < hunk.new_start {
                break;
            }
            shift += hunk.net();
        }
        Ok((new_pos as isize - shift) as usize)
    }

    fn validate(&self, commit: &CommitId) -> Result<()> {
        let bad = |msg: &str| {
            Err(Error::CorruptHistory(format!(
                "commit {commit}, file {}: {msg}",
                self.path()
            )))
        };
        match self.kind {
            ChangeKind::Added if self.path_before.is_some() || self.path_after.is_none() => {
                return bad("added file must have only path_after");
            }
            ChangeKind::Deleted if self.path_after.is_some() || self.path_before.is_none() => {
                return bad("deleted file must have only path_before");
            }
            ChangeKind::Modified
                if self.path_before.is_none() || self.path_after.is_none() || self.path_before != self.path_after =>
            {
                return bad("modified file must keep its path");
            }
            ChangeKind::Renamed
                if self.path_before.is_none() || self.path_after.is_none() || self.path_before == self.path_after =>
            {
                return bad("renamed file must have two distinct paths");
            }
            _ => {}
        }
        if self.is_binary && !self.hunks.is_empty() {
            return bad("binary change carries hunks");
        }
        let mut cursor = 1usize;
        let mut shift: isize = 0;
        for hunk in &self.hunks {
            if hunk.old_lines.is_empty() && hunk.new_lines.is_empty() {
                return bad("empty hunk");
            }
            if hunk.old_start < cursor {
                return bad("hunks overlap or are unsorted");
            }
            if hunk.new_start as isize != hunk.old_start as isize + shift {
                return bad("hunk new_start inconsistent with preceding hunks");
            }
            cursor = hunk.old_start + hunk.old_lines.len();
            shift += hunk.net();
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commit {
    pub id: CommitId,
    #[serde(default)]
    pub parents: Vec<CommitId>,
    #[serde(rename = "author_ts")]
    pub author_timestamp: i64,
    #[serde(rename = "committer_ts")]
    pub committer_timestamp: i64,
    #[serde(default)]
    pub message: String,
    #[serde(default)]
    pub changes: Vec<FileChange>,
}

impl Commit {
    pub fn first_parent(&self) -> Option<&CommitId> {
        self.parents.first()
    }

    /// Total added plus removed lines over every non-binary file.
    pub fn changed_lines(&self) -> usize {
        self.changes.iter().map(FileChange::changed_lines).sum()
    }

    /// The change that produced `path` in this commit, if any.
    pub fn change_producing(&self, path: &str) -> Option<&FileChange> {
        self.changes.iter().find(|c| c.path_after.as_deref() == Some(path))
    }

    /// The change that removed `path` (deleted or renamed away), if any.
    fn change_removing(&self, path: &str) -> Option<&FileChange> {
        self.changes
            .iter()
            .find(|c| c.path_before.as_deref() == Some(path) && c.path_after.as_deref() != Some(path))
    }

    pub fn touched_paths(&self) -> impl Iterator<Item = &str> {
        self.changes.iter().map(FileChange::path)
    }
}

/// Which timestamp orders commits for "most recent" decisions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimestampKind {
    Author,
    #[default]
    Committer,
}

impl TimestampKind {
    pub fn of(self, commit: &Commit) -> i64 {
        match self {
            TimestampKind::Author => commit.author_timestamp,
            TimestampKind::Committer => commit.committer_timestamp,
        }
    }
}

#[derive(Debug, Clone)]
enum FileState {
    Text(Arc<Vec<String>>),
    Binary,
}

/// Loaded, validated, immutable history.
#[derive(Debug)]
pub struct RepositoryHistory {
    commits: HashMap<CommitId, Commit>,
    topo: Vec<CommitId>,
    snapshots: Mutex<HashMap<(CommitId, String), FileState>>,
}

impl PartialEq for RepositoryHistory {
    fn eq(&self, other: &Self) -> bool {
        self.topo == other.topo && self.commits == other.commits
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Restrict the `git` backend to the first-parent chain of `HEAD`.
    pub first_parent_only: bool,
}

/// Loads a history from a git working tree (directory) or a JSON fixture
/// (file).
pub fn load_history(source: &Path, options: LoadOptions) -> Result<RepositoryHistory> {
    let meta = std::fs::metadata(source).map_err(|e| Error::unreadable(source, e))?;
    if meta.is_dir() {
        GitBackend::locate()?.load(source, options)
    } else {
        RepositoryHistory::new(read_fixture(source)?)
    }
}

impl RepositoryHistory {
    /// Builds a history, checking ids, parents, acyclicity and diff shape.
    /// Commit order in `commits` breaks ties in the topological order.
    pub fn new(commits: Vec<Commit>) -> Result<Self> {
        let mut index: HashMap<CommitId, usize> = HashMap::with_capacity(commits.len());
        for (i, c) in commits.iter().enumerate() {
            if c.id.as_str().is_empty() {
                return Err(Error::CorruptHistory("empty commit id".into()));
            }
            if index.insert(c.id.clone(), i).is_some() {
                return Err(Error::CorruptHistory(format!("duplicate commit {}", c.id)));
            }
        }
        let mut indegree = vec![0usize; commits.len()];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); commits.len()];
        for (i, c) in commits.iter().enumerate() {
            for p in &c.parents {
                let Some(&pi) = index.get(p) else {
                    return Err(Error::CorruptHistory(format!(
                        "commit {} has dangling parent {p}",
                        c.id
                    )));
                };
                indegree[i] += 1;
                children[pi].push(i);
            }
            for change in &c.changes {
                change.validate(&c.id)?;
            }
        }

        let mut ready: BinaryHeap<Reverse<usize>> = indegree
            .iter()
            .enumerate()
            .filter(|(_, d)| **d == 0)
            .map(|(i, _)| Reverse(i))
            .collect();
        let mut topo = Vec::with_capacity(commits.len());
        while let Some(Reverse(i)) = ready.pop() {
            topo.push(i);
            for &child in &children[i] {
                indegree[child] -= 1;
                if indegree[child] == 0 {
                    ready.push(Reverse(child));
                }
            }
        }
        if topo.len() != commits.len() {
            return Err(Error::CorruptHistory("ancestry contains a cycle".into()));
        }
        let topo = topo.into_iter().map(|i| commits[i].id.clone()).collect();
        let commits = commits.into_iter().map(|c| (c.id.clone(), c)).collect();
        Ok(RepositoryHistory {
            commits,
            topo,
            snapshots: Mutex::new(HashMap::new()),
        })
    }

    pub fn len(&self) -> usize {
        self.commits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commits.is_empty()
    }

    pub fn contains(&self, id: &CommitId) -> bool {
        self.commits.contains_key(id)
    }

    pub fn commit(&self, id: &CommitId) -> Result<&Commit> {
        self.commits.get(id).ok_or_else(|| Error::UnknownCommit(id.to_string()))
    }

    /// Commits in topological order, parents first.
    pub fn topological_order(&self) -> &[CommitId] {
        &self.topo
    }

    pub fn commits(&self) -> impl Iterator<Item = &Commit> {
        self.topo.iter().map(|id| &self.commits[id])
    }

    /// Transitive closure over all parent edges, excluding `id`.
    pub fn ancestors(&self, id: &CommitId) -> Result<BTreeSet<CommitId>> {
        let start = self.commit(id)?;
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<&CommitId> = start.parents.iter().collect();
        while let Some(next) = queue.pop_front() {
            if seen.insert(next.clone()) {
                queue.extend(self.commits[next].parents.iter());
            }
        }
        Ok(seen)
    }

    /// `id` followed by its first-parent ancestors, newest first.
    pub fn first_parent_chain<'a>(&'a self, id: &CommitId) -> Result<FirstParentChain<'a>> {
        let start = self.commit(id)?;
        Ok(FirstParentChain {
            history: self,
            next: Some(start),
        })
    }

    /// File content at `id`, split into lines.
    pub fn snapshot(&self, id: &CommitId, path: &str) -> Result<Arc<Vec<String>>> {
        match self.file_state(id, path)? {
            Some(FileState::Text(lines)) => Ok(lines),
            Some(FileState::Binary) => Err(Error::BinaryContent {
                commit: id.to_string(),
                path: path.to_owned(),
            }),
            None => Err(Error::FileAbsentAtCommit {
                commit: id.to_string(),
                path: path.to_owned(),
            }),
        }
    }

    /// Like [`snapshot`](Self::snapshot) but yields `None` for absent or
    /// binary files.
    pub fn text_at(&self, id: &CommitId, path: &str) -> Result<Option<Arc<Vec<String>>>> {
        Ok(match self.file_state(id, path)? {
            Some(FileState::Text(lines)) => Some(lines),
            _ => None,
        })
    }

    fn file_state(&self, id: &CommitId, path: &str) -> Result<Option<FileState>> {
        self.commit(id)?;
        // Walk back to the nearest commit that produced or removed `path`,
        // collecting the producing changes that have to be replayed.
        let mut pending: Vec<(&Commit, &FileChange)> = Vec::new();
        let mut cursor = Some(self.commit(id)?);
        let mut current_path = path.to_owned();
        let mut base: Option<FileState> = None;
        while let Some(commit) = cursor {
            if let Some(hit) = self
                .snapshots
                .lock()
                .expect("snapshot cache poisoned")
                .get(&(commit.id.clone(), current_path.clone()))
            {
                base = Some(hit.clone());
                break;
            }
            if let Some(change) = commit.change_producing(&current_path) {
                pending.push((commit, change));
                match change.kind {
                    ChangeKind::Added => break,
                    ChangeKind::Renamed => {
                        current_path = change.path_before.clone().unwrap_or_default();
                    }
                    _ => {}
                }
            } else if commit.change_removing(&current_path).is_some() {
                break;
            }
            cursor = commit.first_parent().map(|p| &self.commits[p]);
        }

        if pending.is_empty() && base.is_none() {
            return Ok(None);
        }
        let needs_base = pending
            .last()
            .map(|(_, c)| c.kind != ChangeKind::Added)
            .unwrap_or(false);
        let mut state = match base {
            Some(state) => state,
            None if needs_base => {
                let (commit, change) = pending.last().unwrap();
                return Err(Error::CorruptHistory(format!(
                    "commit {} modifies {} which is absent in its parent",
                    commit.id,
                    change.path_before.as_deref().unwrap_or_default()
                )));
            }
            None => FileState::Text(Arc::new(Vec::new())),
        };
        for (commit, change) in pending.into_iter().rev() {
            state = if change.is_binary {
                FileState::Binary
            } else {
                match (&state, change.kind) {
                    (_, ChangeKind::Added) => FileState::Text(Arc::new(apply_hunks(&[], change, &commit.id)?)),
                    (FileState::Text(old), _) => FileState::Text(Arc::new(apply_hunks(old, change, &commit.id)?)),
                    (FileState::Binary, _) if change.hunks.is_empty() => FileState::Binary,
                    (FileState::Binary, _) => {
                        return Err(Error::CorruptHistory(format!(
                            "commit {} applies text hunks to binary file {}",
                            commit.id,
                            change.path()
                        )))
                    }
                }
            };
            self.snapshots.lock().expect("snapshot cache poisoned").insert(
                (commit.id.clone(), change.path_after.clone().unwrap_or_default()),
                state.clone(),
            );
        }
        Ok(Some(state))
    }
}

/// Applies one file change's hunks to `old`, checking removed text.
pub fn apply_hunks(old: &[String], change: &FileChange, commit: &CommitId) -> Result<Vec<String>> {
    let mut out = Vec::with_capacity(old.len() + change.added_lines());
    let mut next_old = 1usize;
    for hunk in &change.hunks {
        if hunk.old_start > old.len() + 1 {
            return Err(Error::CorruptHistory(format!(
                "commit {commit}: hunk at line {} beyond end of {} ({} lines)",
                hunk.old_start,
                change.path(),
                old.len()
            )));
        }
        out.extend_from_slice(&old[next_old - 1..hunk.old_start - 1]);
        let removed_end = hunk.old_start - 1 + hunk.old_lines.len();
        if removed_end > old.len() || old[hunk.old_start - 1..removed_end] != hunk.old_lines[..] {
            return Err(Error::CorruptHistory(format!(
                "commit {commit}: removed lines of {} at line {} do not match the parent",
                change.path(),
                hunk.old_start
            )));
        }
        out.extend(hunk.new_lines.iter().cloned());
        next_old = removed_end + 1;
    }
    out.extend_from_slice(&old[(next_old - 1).min(old.len())..]);
    Ok(out)
}

pub struct FirstParentChain<'a> {
    history: &'a RepositoryHistory,
    next: Option<&'a Commit>,
}

impl<'a> Iterator for FirstParentChain<'a> {
    type Item = &'a Commit;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next?;
        self.next = current.first_parent().map(|p| &self.history.commits[p]);
        Some(current)
    }
}

/// Splits text on LF, dropping CR and the empty tail after a final newline.
pub fn split_lines(text: &str) -> Vec<String> {
    let mut lines: Vec<String> = text
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_owned())
        .collect();
    if lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines
}

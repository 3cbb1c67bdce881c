// SPDX-License-Identifier: Apache-2.0

//! Backward line tracing.
//!
//! Lines removed or modified by a fixing commit are located in the fixing
//! commit's first parent and walked back along the first-parent chain. At
//! every commit that touches the file, a tracked position is either shifted
//! through the commit's hunks or lands inside an added range, in which case
//! that commit is the line's origin. Skip and graph modes make some of
//! those landings transparent instead.

mod classify;
mod skiplist;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::{ChangeKind, Commit, CommitId, FileChange, Hunk, RepositoryHistory};

pub use classify::{classify_file, classify_line, LineClass};
pub use skiplist::{parse_skip_list, read_skip_list, resolve_skip_list};

pub const DEFAULT_REFACTORING_THRESHOLD: usize = 150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlameMode {
    Plain,
    Skip,
    Graph,
}

impl FromStr for BlameMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plain" => Ok(BlameMode::Plain),
            "skip" => Ok(BlameMode::Skip),
            "graph" => Ok(BlameMode::Graph),
            other => Err(Error::InvalidArgument(format!("unknown blame mode {other:?}"))),
        }
    }
}

impl fmt::Display for BlameMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlameMode::Plain => "plain",
            BlameMode::Skip => "skip",
            BlameMode::Graph => "graph",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlameOptions {
    pub mode: BlameMode,
    /// Revisions made transparent in skip mode.
    pub skip_list: BTreeSet<CommitId>,
    /// Target lines of these classes are not traced.
    pub ignore_classes: BTreeSet<LineClass>,
    /// Per-file changed-line count above which graph mode treats a commit
    /// as a refactoring.
    pub refactoring_threshold: usize,
}

impl BlameOptions {
    pub fn plain() -> Self {
        BlameOptions {
            mode: BlameMode::Plain,
            skip_list: BTreeSet::new(),
            ignore_classes: BTreeSet::new(),
            refactoring_threshold: DEFAULT_REFACTORING_THRESHOLD,
        }
    }

    pub fn skip(skip_list: BTreeSet<CommitId>) -> Self {
        BlameOptions {
            mode: BlameMode::Skip,
            skip_list,
            ..Self::plain()
        }
    }

    pub fn graph() -> Self {
        BlameOptions {
            mode: BlameMode::Graph,
            ignore_classes: [LineClass::Blank, LineClass::Comment].into(),
            ..Self::plain()
        }
    }

    pub fn with_threshold(mut self, threshold: usize) -> Self {
        self.refactoring_threshold = threshold;
        self
    }
}

/// A line in a specific file version.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LineRef {
    pub commit: CommitId,
    pub path: String,
    pub line_no: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlameEntry {
    pub line: LineRef,
    pub class: LineClass,
    /// Last commit that touched the line; `None` when untraceable.
    pub origin: Option<CommitId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlameResult {
    pub fixing: CommitId,
    pub mode: BlameMode,
    /// Sorted by path, then line number.
    pub entries: Vec<BlameEntry>,
}

impl BlameResult {
    /// Distinct traceable origins with the number of lines resolved to each.
    pub fn origin_counts(&self) -> BTreeMap<CommitId, usize> {
        let mut counts = BTreeMap::new();
        for origin in self.entries.iter().filter_map(|e| e.origin.as_ref()) {
            *counts.entry(origin.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn untraceable(&self) -> usize {
        self.entries.iter().filter(|e| e.origin.is_none()).count()
    }
}

/// True when some file of `commit` has more than `threshold` changed lines.
pub fn detect_refactoring(history: &RepositoryHistory, commit: &CommitId, threshold: usize) -> Result<bool> {
    Ok(is_refactoring(history.commit(commit)?, threshold))
}

fn is_refactoring(commit: &Commit, threshold: usize) -> bool {
    commit
        .changes
        .iter()
        .any(|c| !c.is_binary && c.changed_lines() > threshold)
}

pub fn blame_lines(history: &RepositoryHistory, fixing: &CommitId, options: &BlameOptions) -> Result<BlameResult> {
    let fix = history.commit(fixing)?;
    let mut result = BlameResult {
        fixing: fixing.clone(),
        mode: options.mode,
        entries: Vec::new(),
    };
    let Some(parent_id) = fix.first_parent() else {
        return Ok(result);
    };
    let parent = history.commit(parent_id)?;

    let mut by_path: BTreeMap<&str, Vec<&Hunk>> = BTreeMap::new();
    for change in &fix.changes {
        if change.is_binary {
            continue;
        }
        let Some(before) = change.path_before.as_deref() else {
            continue;
        };
        by_path
            .entry(before)
            .or_default()
            .extend(change.hunks.iter().filter(|h| !h.old_lines.is_empty()));
    }

    for (path, hunks) in by_path {
        if hunks.is_empty() {
            continue;
        }
        let Some(lines) = history.text_at(parent_id, path)? else {
            continue;
        };
        let classes = classify_file(&lines, path);
        let first = result.entries.len();
        let mut tracked = Vec::new();
        for hunk in hunks {
            for (i, text) in hunk.old_lines.iter().enumerate() {
                let line_no = hunk.old_start + i;
                let class = classes.get(line_no - 1).copied().unwrap_or(LineClass::Code);
                if options.ignore_classes.contains(&class) {
                    continue;
                }
                tracked.push(Tracked {
                    entry: result.entries.len() - first,
                    pos: line_no,
                });
                result.entries.push(BlameEntry {
                    line: LineRef {
                        commit: parent_id.clone(),
                        path: path.to_owned(),
                        line_no,
                        text: text.clone(),
                    },
                    class,
                    origin: None,
                });
            }
        }
        trace_file(history, parent, path, tracked, options, &mut result.entries[first..])?;
    }
    Ok(result)
}

struct Tracked {
    entry: usize,
    pos: usize,
}

fn trace_file(
    history: &RepositoryHistory,
    start: &Commit,
    path: &str,
    mut active: Vec<Tracked>,
    options: &BlameOptions,
    out: &mut [BlameEntry],
) -> Result<()> {
    let mut path = path.to_owned();
    for commit in history.first_parent_chain(&start.id)? {
        if active.is_empty() {
            break;
        }
        let Some(change) = commit.change_producing(&path) else {
            continue;
        };
        let transparent = match options.mode {
            BlameMode::Plain => false,
            BlameMode::Skip => options.skip_list.contains(&commit.id),
            BlameMode::Graph => is_refactoring(commit, options.refactoring_threshold),
        };
        let mut alignments: HashMap<usize, Vec<Option<usize>>> = HashMap::new();
        active.retain_mut(|item| {
            let hunk_index = match change.map_to_old(item.pos) {
                Ok(old) => {
                    item.pos = old;
                    return true;
                }
                Err(i) => i,
            };
            let hunk = &change.hunks[hunk_index];
            let offset = item.pos - hunk.new_start;
            if options.mode == BlameMode::Graph {
                let aligned = alignments
                    .entry(hunk_index)
                    .or_insert_with(|| whitespace_alignment(hunk));
                if let Some(old) = aligned[offset] {
                    item.pos = hunk.old_start + old;
                    return true;
                }
            }
            if transparent {
                if let Some(last) = hunk.old_lines.len().checked_sub(1) {
                    item.pos = hunk.old_start + offset.min(last);
                    return true;
                }
                return false;
            }
            out[item.entry].origin = Some(commit.id.clone());
            false
        });
        match change.kind {
            ChangeKind::Added => break,
            ChangeKind::Renamed => path = renamed_from(change),
            _ => {}
        }
    }
    Ok(())
}

fn renamed_from(change: &FileChange) -> String {
    change.path_before.clone().unwrap_or_default()
}

fn normalize(text: &str) -> String {
    text.split_whitespace().collect()
}

/// For each added line of `hunk`, the index of a removed line that differs
/// from it only in whitespace, aligned by longest common subsequence.
fn whitespace_alignment(hunk: &Hunk) -> Vec<Option<usize>> {
    let old: Vec<String> = hunk.old_lines.iter().map(|l| normalize(l)).collect();
    let new: Vec<String> = hunk.new_lines.iter().map(|l| normalize(l)).collect();
    let (n, m) = (old.len(), new.len());
    let mut table = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[i][j] = if old[i] == new[j] {
                table[i + 1][j + 1] + 1
            } else {
                table[i + 1][j].max(table[i][j + 1])
            };
        }
    }
    let mut aligned = vec![None; m];
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if old[i] == new[j] {
            aligned[j] = Some(i);
            i += 1;
            j += 1;
        } else if table[i + 1][j] >= table[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    aligned
}

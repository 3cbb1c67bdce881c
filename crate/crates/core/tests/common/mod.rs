// SPDX-License-Identifier: Apache-2.0

//! Shared test support: snapshot-built histories, a seeded random history
//! generator and an independent forward-replay blame oracle.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use szz_core::commitset::{CommitSet, Dataset};
use szz_core::history::{ChangeKind, Commit, CommitId, FileChange, Hunk, RepositoryHistory};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub type Tree = BTreeMap<String, Vec<String>>;

/// One state of the working tree plus how it was reached.
#[derive(Debug, Clone)]
pub struct Step {
    pub id: String,
    pub timestamp: i64,
    pub tree: Tree,
    /// `(old, new)` path pairs renamed in this step.
    pub renames: Vec<(String, String)>,
}

impl Step {
    pub fn new(id: &str, timestamp: i64, tree: Tree) -> Step {
        Step {
            id: id.to_owned(),
            timestamp,
            tree,
            renames: Vec::new(),
        }
    }
}

pub fn tree(files: &[(&str, &[&str])]) -> Tree {
    files
        .iter()
        .map(|(p, lines)| (p.to_string(), lines.iter().map(|s| s.to_string()).collect()))
        .collect()
}

/// Minimal line diff by longest common subsequence.
pub fn diff(old: &[String], new: &[String]) -> Vec<Hunk> {
    let (n, m) = (old.len(), new.len());
    let mut lcs = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if old[i] == new[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    let mut hunks = Vec::new();
    let (mut i, mut j) = (0, 0);
    let mut open: Option<Hunk> = None;
    let flush = |open: &mut Option<Hunk>, hunks: &mut Vec<Hunk>| {
        if let Some(h) = open.take() {
            hunks.push(h);
        }
    };
    while i < n || j < m {
        if i < n && j < m && old[i] == new[j] {
            flush(&mut open, &mut hunks);
            i += 1;
            j += 1;
            continue;
        }
        let h = open.get_or_insert_with(|| Hunk {
            old_start: i + 1,
            old_lines: Vec::new(),
            new_start: j + 1,
            new_lines: Vec::new(),
        });
        if j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j]) {
            h.new_lines.push(new[j].clone());
            j += 1;
        } else {
            h.old_lines.push(old[i].clone());
            i += 1;
        }
    }
    flush(&mut open, &mut hunks);
    hunks
}

/// Linear history whose commit diffs are computed from consecutive trees.
pub fn build_commits(steps: &[Step]) -> Vec<Commit> {
    let empty = Tree::new();
    let mut commits = Vec::new();
    for (k, step) in steps.iter().enumerate() {
        let prev = if k == 0 { &empty } else { &steps[k - 1].tree };
        let renamed_from: BTreeMap<&str, &str> = step.renames.iter().map(|(a, b)| (b.as_str(), a.as_str())).collect();
        let renamed_away: BTreeSet<&str> = step.renames.iter().map(|(a, _)| a.as_str()).collect();
        let mut changes = Vec::new();
        for (path, lines) in &step.tree {
            if let Some(old_path) = renamed_from.get(path.as_str()) {
                changes.push(FileChange {
                    path_before: Some(old_path.to_string()),
                    path_after: Some(path.clone()),
                    kind: ChangeKind::Renamed,
                    hunks: diff(&prev[*old_path], lines),
                    is_binary: false,
                });
                continue;
            }
            match prev.get(path) {
                None => changes.push(FileChange {
                    path_before: None,
                    path_after: Some(path.clone()),
                    kind: ChangeKind::Added,
                    hunks: diff(&[], lines),
                    is_binary: false,
                }),
                Some(old) if old != lines => changes.push(FileChange {
                    path_before: Some(path.clone()),
                    path_after: Some(path.clone()),
                    kind: ChangeKind::Modified,
                    hunks: diff(old, lines),
                    is_binary: false,
                }),
                Some(_) => {}
            }
        }
        for (path, old) in prev {
            if !step.tree.contains_key(path) && !renamed_away.contains(path.as_str()) {
                changes.push(FileChange {
                    path_before: Some(path.clone()),
                    path_after: None,
                    kind: ChangeKind::Deleted,
                    hunks: diff(old, &[]),
                    is_binary: false,
                });
            }
        }
        commits.push(Commit {
            id: CommitId::new(&step.id),
            parents: if k == 0 {
                vec![]
            } else {
                vec![CommitId::new(&steps[k - 1].id)]
            },
            author_timestamp: step.timestamp,
            committer_timestamp: step.timestamp,
            message: String::new(),
            changes,
        });
    }
    commits
}

pub fn build_history(steps: &[Step]) -> RepositoryHistory {
    RepositoryHistory::new(build_commits(steps)).expect("generated history is valid")
}

#[derive(Debug, Clone, Copy)]
pub struct GenLimits {
    pub max_commits: usize,
    pub max_files: usize,
    pub max_lines: usize,
}

pub const SMALL: GenLimits = GenLimits {
    max_commits: 12,
    max_files: 5,
    max_lines: 60,
};

fn random_line(rng: &mut ChaCha8Rng) -> String {
    // A small vocabulary forces repeated lines.
    format!("v{}", rng.gen_range(0..10))
}

fn random_lines(rng: &mut ChaCha8Rng, max: usize) -> Vec<String> {
    let n = rng.gen_range(1..=max.min(8));
    (0..n).map(|_| random_line(rng)).collect()
}

fn mutate_file(rng: &mut ChaCha8Rng, lines: &mut Vec<String>, max_lines: usize) {
    for _ in 0..rng.gen_range(1..=3) {
        match rng.gen_range(0..3) {
            0 if lines.len() < max_lines => {
                let at = rng.gen_range(0..=lines.len());
                let room = max_lines - lines.len();
                let k = rng.gen_range(1..=room.min(4));
                for _ in 0..k {
                    lines.insert(at, random_line(rng));
                }
            }
            1 if lines.len() > 1 => {
                let at = rng.gen_range(0..lines.len());
                let k = rng.gen_range(1..=(lines.len() - at).min(3).min(lines.len() - 1));
                lines.drain(at..at + k);
            }
            _ => {
                let at = rng.gen_range(0..lines.len());
                lines[at] = random_line(rng);
            }
        }
    }
}

/// Seeded linear history with adds, edits, deletions and renames.
pub fn random_steps(seed: u64, limits: GenLimits) -> Vec<Step> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_commits = rng.gen_range(2..=limits.max_commits);
    let mut steps: Vec<Step> = Vec::new();
    let mut next_file = 0;
    for k in 0..n_commits {
        let mut tree = steps.last().map(|s| s.tree.clone()).unwrap_or_default();
        let mut renames = Vec::new();
        let ops = rng.gen_range(1..=2);
        for _ in 0..ops {
            let choice = if tree.is_empty() { 0 } else { rng.gen_range(0..10) };
            match choice {
                0 | 1 if tree.len() < limits.max_files => {
                    tree.insert(format!("f{next_file}.txt"), random_lines(&mut rng, limits.max_lines));
                    next_file += 1;
                }
                2 if tree.len() > 1 => {
                    let paths: Vec<String> = tree.keys().cloned().collect();
                    tree.remove(paths.choose(&mut rng).unwrap());
                }
                3 if renames.is_empty()
                    && steps
                        .last()
                        .is_some_and(|s| tree.keys().any(|p| s.tree.contains_key(p))) =>
                {
                    let prev = &steps.last().unwrap().tree;
                    let paths: Vec<String> = tree.keys().filter(|p| prev.contains_key(*p)).cloned().collect();
                    let from = paths.choose(&mut rng).unwrap().clone();
                    let to = format!("f{next_file}.txt");
                    next_file += 1;
                    let mut lines = tree.remove(&from).unwrap();
                    if rng.gen_bool(0.5) {
                        mutate_file(&mut rng, &mut lines, limits.max_lines);
                    }
                    tree.insert(to.clone(), lines);
                    renames.push((from, to));
                }
                _ => {
                    let paths: Vec<String> = tree.keys().cloned().collect();
                    let p = paths.choose(&mut rng).unwrap().clone();
                    mutate_file(&mut rng, tree.get_mut(&p).unwrap(), limits.max_lines);
                }
            }
        }
        // A rename target edited again in the same step is still one rename.
        renames.retain(|(_, to)| tree.contains_key(to));
        steps.push(Step {
            id: format!("c{k}"),
            timestamp: 1_000 + 10 * k as i64,
            tree,
            renames,
        });
    }
    steps
}

/// Independent last-writer replay: carries an origin tag with every line
/// from the first commit forward, then reads the tags of the lines each
/// commit removes. Returns the plain-blame candidate set of every commit.
pub fn last_writer_candidates(commits: &[Commit]) -> BTreeMap<CommitId, BTreeSet<CommitId>> {
    let mut state: BTreeMap<String, Vec<(String, CommitId)>> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for c in commits {
        let mut next = state.clone();
        let mut found = BTreeSet::new();
        for ch in &c.changes {
            if let Some(before) = &ch.path_before {
                next.remove(before);
            }
        }
        for ch in &c.changes {
            let old: Vec<(String, CommitId)> = ch.path_before.as_ref().map(|p| state[p].clone()).unwrap_or_default();
            let mut new = Vec::new();
            let mut cursor = 0;
            for h in &ch.hunks {
                let start = h.old_start - 1;
                new.extend_from_slice(&old[cursor..start]);
                for (k, text) in h.old_lines.iter().enumerate() {
                    assert_eq!(&old[start + k].0, text, "replay out of sync at {}", c.id);
                    found.insert(old[start + k].1.clone());
                }
                new.extend(h.new_lines.iter().map(|t| (t.clone(), c.id.clone())));
                cursor = start + h.old_lines.len();
            }
            new.extend_from_slice(&old[cursor..]);
            if let Some(after) = &ch.path_after {
                next.insert(after.clone(), new);
            }
        }
        state = next;
        out.insert(c.id.clone(), found);
    }
    out
}

/// Prefixes every line with two spaces from step `at` onward, inserting a
/// whitespace-only commit `w` before it.
pub fn with_reindent(steps: &[Step], at: usize) -> Vec<Step> {
    let indent = |t: &Tree| -> Tree {
        t.iter()
            .map(|(p, ls)| (p.clone(), ls.iter().map(|l| format!("  {l}")).collect()))
            .collect()
    };
    let mut out: Vec<Step> = steps[..at].to_vec();
    let base = &steps[at - 1];
    out.push(Step::new("w", base.timestamp + 1, indent(&base.tree)));
    for s in &steps[at..] {
        out.push(Step {
            tree: indent(&s.tree),
            ..s.clone()
        });
    }
    out
}

/// Synthetic benchmark: a random history cut into pull-request-like
/// commit-sets, with one link per set whose commits reach anything. The
/// truth is the set of one blamed commit, so sibling commits that blame
/// elsewhere are bad linkers; every fifth link points at an unrelated
/// earlier set instead.
pub fn synthetic_benchmark(seed: u64, limits: GenLimits) -> (RepositoryHistory, Dataset) {
    let steps = random_steps(seed, limits);
    let commits = build_commits(&steps);
    let blamed = last_writer_candidates(&commits);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);

    let mut sets: Vec<CommitSet> = Vec::new();
    let mut k = 0;
    while k < commits.len() {
        let size = rng.gen_range(1..=3).min(commits.len() - k);
        let ids = commits[k..k + size].iter().map(|c| c.id.clone()).collect();
        sets.push(CommitSet::new(format!("PR{}", sets.len() + 1), ids));
        k += size;
    }
    let set_of = |c: &CommitId| sets.iter().position(|s| s.contains(c)).unwrap();

    let mut dataset = Dataset::default();
    let mut links = 0;
    for (si, set) in sets.iter().enumerate() {
        let reaching: Vec<&CommitId> = set.commits.iter().filter(|c| !blamed[*c].is_empty()).collect();
        if reaching.is_empty() {
            continue;
        }
        links += 1;
        let truth = if links % 5 == 0 && si > 0 {
            rng.gen_range(0..si)
        } else {
            let from = reaching[rng.gen_range(0..reaching.len())];
            let cands: Vec<&CommitId> = blamed[from].iter().collect();
            set_of(cands[rng.gen_range(0..cands.len())])
        };
        if truth == si {
            continue;
        }
        dataset
            .push(format!("bug-{si}"), set.clone(), vec![sets[truth].clone()])
            .unwrap();
    }
    for s in &sets {
        if s.commits.iter().all(|c| dataset.index.set_of(c).is_none()) {
            dataset.index.insert(s.clone()).unwrap();
        }
    }
    (RepositoryHistory::new(commits).unwrap(), dataset)
}

pub const BENCH: GenLimits = GenLimits {
    max_commits: 40,
    max_files: 5,
    max_lines: 60,
};

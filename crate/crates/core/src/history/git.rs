// SPDX-License-Identifier: Apache-2.0

//! Adapter over the `git` command line. Nothing else in the crate spawns
//! the tool.

use std::path::{Path, PathBuf};
use std::process::Command;

use super::{split_lines, ChangeKind, Commit, CommitId, FileChange, Hunk, LoadOptions, RepositoryHistory};
use crate::error::{Error, Result};

const RECORD: char = '\u{1e}';
const FIELD: char = '\u{1f}';

#[derive(Debug, Clone)]
pub struct GitBackend {
    program: PathBuf,
}

impl GitBackend {
    /// Finds `git` on `PATH` (or `$SZZ_GIT`) and checks that it runs.
    pub fn locate() -> Result<Self> {
        let program = std::env::var_os("SZZ_GIT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("git"));
        Self::with_program(program)
    }

    pub fn with_program(program: impl Into<PathBuf>) -> Result<Self> {
        let program = program.into();
        let status = Command::new(&program)
            .arg("--version")
            .output()
            .map_err(|e| Error::BackendUnavailable(format!("{}: {e}", program.display())))?;
        if !status.status.success() {
            return Err(Error::BackendUnavailable(format!(
                "{} --version exited with {}",
                program.display(),
                status.status
            )));
        }
        Ok(GitBackend { program })
    }

    pub fn load(&self, repo: &Path, options: LoadOptions) -> Result<RepositoryHistory> {
        let mut cmd = Command::new(&self.program);
        cmd.arg("-C")
            .arg(repo)
            .args(["-c", "core.quotePath=false", "log", "--reverse", "--topo-order"]);
        if options.first_parent_only {
            cmd.arg("--first-parent");
        }
        cmd.args([
            "--format=%x1e%H%x1f%P%x1f%at%x1f%ct%x1f%B%x1f",
            "-p",
            "-U0",
            "-M50%",
            "--diff-merges=first-parent",
            "--no-color",
            "--no-ext-diff",
            "--src-prefix=a/",
            "--dst-prefix=b/",
            "HEAD",
            "--",
        ]);
        log::debug!("running {cmd:?}");
        let output = cmd.output().map_err(|e| Error::BackendUnavailable(e.to_string()))?;
        if !output.status.success() {
            return Err(Error::unreadable(repo, String::from_utf8_lossy(&output.stderr).trim()));
        }
        let text = String::from_utf8_lossy(&output.stdout);
        let mut commits = parse_log(&text)?;
        if options.first_parent_only {
            for c in &mut commits {
                c.parents.truncate(1);
            }
        }
        log::info!("loaded {} commits from {}", commits.len(), repo.display());
        RepositoryHistory::new(commits)
    }
}

fn parse_log(text: &str) -> Result<Vec<Commit>> {
    let mut commits = Vec::new();
    for record in text.split(RECORD).filter(|r| !r.trim().is_empty()) {
        let fields: Vec<&str> = record.splitn(6, FIELD).collect();
        if fields.len() != 6 {
            return Err(Error::CorruptHistory(format!(
                "unparseable git log record: {:.60}",
                record
            )));
        }
        let ts = |s: &str| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| Error::CorruptHistory(format!("bad timestamp {s:?}")))
        };
        commits.push(Commit {
            id: CommitId::new(fields[0].trim()),
            parents: fields[1].split_whitespace().map(CommitId::new).collect(),
            author_timestamp: ts(fields[2])?,
            committer_timestamp: ts(fields[3])?,
            message: fields[4].trim_end().to_owned(),
            changes: parse_patch(fields[5])?,
        });
    }
    Ok(commits)
}

fn strip_prefix_path(raw: &str, prefix: &str) -> Option<String> {
    let raw = raw.trim_end_matches('\t');
    if raw == "/dev/null" {
        None
    } else {
        Some(raw.strip_prefix(prefix).unwrap_or(raw).to_owned())
    }
}

fn parse_range(spec: &str) -> Result<(usize, usize)> {
    let bad = || Error::CorruptHistory(format!("bad hunk range {spec:?}"));
    let spec = &spec[1..];
    let (start, count) = match spec.split_once(',') {
        Some((s, c)) => (s, c),
        None => (spec, "1"),
    };
    let start: usize = start.parse().map_err(|_| bad())?;
    let count: usize = count.parse().map_err(|_| bad())?;
    // Zero-length sides name the line *after which* the edit sits.
    Ok((if count == 0 { start + 1 } else { start }, count))
}

fn parse_patch(patch: &str) -> Result<Vec<FileChange>> {
    let mut changes = Vec::new();
    let mut current: Option<FileChange> = None;
    let mut lines = patch.split('\n').peekable();
    while let Some(line) = lines.next() {
        if let Some(rest) = line.strip_prefix("diff --git ") {
            changes.extend(current.take());
            // Best-effort split; ---/+++ and rename headers override it.
            let (before, after) = match rest.find(" b/") {
                Some(i) => (&rest[..i], &rest[i + 1..]),
                None => (rest, rest),
            };
            current = Some(FileChange {
                path_before: strip_prefix_path(before, "a/"),
                path_after: strip_prefix_path(after, "b/"),
                kind: ChangeKind::Modified,
                hunks: Vec::new(),
                is_binary: false,
            });
            continue;
        }
        let Some(change) = current.as_mut() else {
            continue;
        };
        if line.starts_with("new file mode") {
            change.kind = ChangeKind::Added;
            change.path_before = None;
        } else if line.starts_with("deleted file mode") {
            change.kind = ChangeKind::Deleted;
            change.path_after = None;
        } else if let Some(p) = line.strip_prefix("rename from ") {
            change.kind = ChangeKind::Renamed;
            change.path_before = Some(p.to_owned());
        } else if let Some(p) = line.strip_prefix("rename to ") {
            change.kind = ChangeKind::Renamed;
            change.path_after = Some(p.to_owned());
        } else if line.starts_with("Binary files ") {
            change.is_binary = true;
        } else if let Some(p) = line.strip_prefix("--- ") {
            if change.kind != ChangeKind::Added {
                change.path_before = strip_prefix_path(p, "a/");
            }
        } else if let Some(p) = line.strip_prefix("+++ ") {
            if change.kind != ChangeKind::Deleted {
                change.path_after = strip_prefix_path(p, "b/");
            }
        } else if let Some(header) = line.strip_prefix("@@ ") {
            let mut parts = header.split_whitespace();
            let (old_start, old_count) = parse_range(parts.next().unwrap_or("-"))?;
            let (new_start, new_count) = parse_range(parts.next().unwrap_or("+"))?;
            let mut hunk = Hunk {
                old_start,
                old_lines: Vec::with_capacity(old_count),
                new_start,
                new_lines: Vec::with_capacity(new_count),
            };
            while hunk.old_lines.len() < old_count || hunk.new_lines.len() < new_count {
                let Some(body) = lines.next() else {
                    return Err(Error::CorruptHistory("truncated hunk".into()));
                };
                let text = || split_lines(&body[1..]).pop().unwrap_or_default();
                match body.as_bytes().first() {
                    Some(b'-') => hunk.old_lines.push(text()),
                    Some(b'+') => hunk.new_lines.push(text()),
                    Some(b'\\') => {}
                    _ => return Err(Error::CorruptHistory(format!("bad hunk line {body:?}"))),
                }
            }
            if lines.peek().is_some_and(|l| l.starts_with('\\')) {
                lines.next();
            }
            change.hunks.push(hunk);
        }
    }
    changes.extend(current);
    Ok(changes)
}

// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::history::{CommitId, RepositoryHistory};

/// Parses an ignore-revisions file: one revision per line, `#` starts a
/// comment, blank lines are skipped.
pub fn parse_skip_list(text: &str) -> BTreeSet<CommitId> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or_default().trim())
        .filter(|l| !l.is_empty())
        .map(CommitId::new)
        .collect()
}

pub fn read_skip_list(path: &Path) -> Result<BTreeSet<CommitId>> {
    let text = std::fs::read_to_string(path).map_err(|_| Error::EmptySkipFile(path.to_owned()))?;
    Ok(parse_skip_list(&text))
}

/// Expands abbreviated revisions to full ids when the prefix is unique in
/// `history`. Unknown entries are kept verbatim; they simply never match.
pub fn resolve_skip_list(history: &RepositoryHistory, entries: &BTreeSet<CommitId>) -> BTreeSet<CommitId> {
    entries
        .iter()
        .map(|entry| {
            if history.contains(entry) {
                return entry.clone();
            }
            let mut matches = history
                .topological_order()
                .iter()
                .filter(|id| id.as_str().starts_with(entry.as_str()));
            match (matches.next(), matches.next()) {
                (Some(only), None) => only.clone(),
                _ => entry.clone(),
            }
        })
        .collect()
}

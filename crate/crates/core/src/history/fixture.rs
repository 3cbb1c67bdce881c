// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;

use super::Commit;
use crate::error::{Error, Result};

/// Reads a synthetic-history fixture: a JSON list of commits.
pub fn read_fixture(path: &Path) -> Result<Vec<Commit>> {
    let text = fs::read_to_string(path).map_err(|e| Error::unreadable(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::unreadable(path, e))
}

pub fn write_fixture(path: &Path, commits: &[Commit]) -> Result<()> {
    let text = serde_json::to_string_pretty(commits)?;
    fs::write(path, text)?;
    Ok(())
}

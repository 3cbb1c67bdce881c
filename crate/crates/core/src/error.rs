// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure classes, mapped onto process exit codes by the CLI and
/// onto status codes by the C ABI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Backend,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("version-control backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("corrupt history: {0}")]
    CorruptHistory(String),
    #[error("cannot read {path}: {reason}")]
    UnreadableSource { path: PathBuf, reason: String },
    #[error("unknown commit {0}")]
    UnknownCommit(String),
    #[error("file {path} is absent at commit {commit}")]
    FileAbsentAtCommit { commit: String, path: String },
    #[error("file {path} is binary at commit {commit}")]
    BinaryContent { commit: String, path: String },
    #[error("skip list {0} is empty or unreadable")]
    EmptySkipFile(PathBuf),
    #[error("unknown SZZ variant {0:?}")]
    UnknownVariant(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("pull-request provider unreachable: {0}")]
    ProviderUnreachable(String),
    #[error("pull-request provider rate limit hit")]
    RateLimited,
    #[error("prediction for fixing set {predicted} scored against link with fixing set {truth}")]
    MismatchedFixingSet { truth: String, predicted: String },
    #[error("no output for fixing set {0}")]
    CoverageGap(String),
    #[error("link {bug_id} violates perspective {perspective}: {reason}")]
    PerspectiveViolation {
        bug_id: String,
        perspective: String,
        reason: String,
    },
    #[error("commit {commit} is not part of commit-set {set}")]
    CommitNotInSet { commit: String, set: String },
    #[error("missing provenance for variant {variant} on fixing set {set}")]
    MissingProvenance { variant: String, set: String },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("need at least {needed} minority rows, found {found}")]
    InsufficientMinority { needed: usize, found: usize },
    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::BackendUnavailable(_) | Error::ProviderUnreachable(_) | Error::RateLimited => ErrorClass::Backend,
            Error::InvalidArgument(_) | Error::UnknownVariant(_) => ErrorClass::Usage,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn unreadable(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        Error::UnreadableSource {
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}

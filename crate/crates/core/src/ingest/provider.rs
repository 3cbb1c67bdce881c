// SPDX-License-Identifier: Apache-2.0

//! Commit → pull-request association queries.
//!
//! Responses follow the shape of a GraphQL `associatedPullRequests` lookup.
//! [`RecordedProvider`] replays a response-cache file so everything runs
//! offline; [`HttpProvider`] talks to a live endpoint and can be wrapped in
//! a [`RecordingProvider`] to produce such a cache.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::CommitId;

pub const TOKEN_ENV: &str = "SZZ_PROVIDER_TOKEN";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RepoLocator {
    pub owner: String,
    pub name: String,
}

impl FromStr for RepoLocator {
    type Err = Error;

    /// Accepts `owner/name` or a hosting URL ending in `owner/name[.git]`.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_end_matches('/');
        let trimmed = trimmed.strip_suffix(".git").unwrap_or(trimmed);
        let mut parts = trimmed.rsplit('/');
        match (parts.next(), parts.next()) {
            (Some(name), Some(owner)) if !name.is_empty() && !owner.is_empty() => {
                let owner = owner.rsplit(':').next().unwrap_or(owner);
                Ok(RepoLocator {
                    owner: owner.to_owned(),
                    name: name.to_owned(),
                })
            }
            _ => Err(Error::InvalidDataset(format!("bad repository locator {s:?}"))),
        }
    }
}

impl fmt::Display for RepoLocator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.owner, self.name)
    }
}

/// Request key used by response-cache files: `owner/name@commit`.
pub fn request_key(repo: &RepoLocator, commit: &CommitId) -> String {
    format!("{repo}@{commit}")
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderResponse {
    #[serde(default)]
    pub data: Option<ResponseData>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<ResponseError>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseData {
    pub repository: Option<RepositoryNode>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepositoryNode {
    pub object: Option<CommitNode>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CommitNode {
    pub associated_pull_requests: Connection<PullRequestNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connection<T> {
    pub nodes: Vec<T>,
}

impl<T> Default for Connection<T> {
    fn default() -> Self {
        Connection { nodes: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullRequestNode {
    pub number: u64,
    pub commits: Connection<PullRequestCommit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullRequestCommit {
    pub commit: Oid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Oid {
    pub oid: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseError {
    #[serde(default, rename = "type")]
    pub kind: Option<String>,
    #[serde(default)]
    pub message: String,
}

impl ProviderResponse {
    pub fn missing_repository() -> Self {
        ProviderResponse {
            data: Some(ResponseData { repository: None }),
            errors: vec![ResponseError {
                kind: Some("NOT_FOUND".into()),
                message: "Could not resolve to a Repository".into(),
            }],
        }
    }

    /// A response listing the given pull requests (possibly none).
    pub fn with_pull_requests(prs: &[(u64, &[&str])]) -> Self {
        let nodes = prs
            .iter()
            .map(|(number, commits)| PullRequestNode {
                number: *number,
                commits: Connection {
                    nodes: commits
                        .iter()
                        .map(|c| PullRequestCommit {
                            commit: Oid { oid: c.to_string() },
                        })
                        .collect(),
                },
            })
            .collect();
        ProviderResponse {
            data: Some(ResponseData {
                repository: Some(RepositoryNode {
                    object: Some(CommitNode {
                        associated_pull_requests: Connection { nodes },
                    }),
                }),
            }),
            errors: Vec::new(),
        }
    }

    pub fn is_rate_limited(&self) -> bool {
        self.errors.iter().any(|e| e.kind.as_deref() == Some("RATE_LIMITED"))
    }
}

pub trait PullRequestProvider: Sync {
    fn associated_pull_requests(&self, repo: &RepoLocator, commit: &CommitId) -> Result<ProviderResponse>;
}

/// Replays a response-cache file (JSON map of request key → response).
#[derive(Debug, Default)]
pub struct RecordedProvider {
    responses: BTreeMap<String, ProviderResponse>,
}

impl RecordedProvider {
    pub fn new(responses: BTreeMap<String, ProviderResponse>) -> Self {
        RecordedProvider { responses }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::unreadable(path, e))?;
        let responses = serde_json::from_str(&text).map_err(|e| Error::unreadable(path, e))?;
        Ok(RecordedProvider { responses })
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl PullRequestProvider for RecordedProvider {
    fn associated_pull_requests(&self, repo: &RepoLocator, commit: &CommitId) -> Result<ProviderResponse> {
        let key = request_key(repo, commit);
        let response = self
            .responses
            .get(&key)
            .ok_or_else(|| Error::ProviderUnreachable(format!("no recorded response for {key}")))?;
        if response.is_rate_limited() {
            return Err(Error::RateLimited);
        }
        Ok(response.clone())
    }
}

const QUERY: &str = "query($owner: String!, $name: String!, $oid: GitObjectID!) { \
repository(owner: $owner, name: $name) { object(oid: $oid) { ... on Commit { \
associatedPullRequests(first: 10) { nodes { number commits(first: 250) { nodes { commit { oid } } } } } } } } }";

/// Live GraphQL endpoint. The bearer token comes from [`TOKEN_ENV`].
pub struct HttpProvider {
    endpoint: String,
    token: Option<String>,
    agent: ureq::Agent,
}

impl HttpProvider {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpProvider {
            endpoint: endpoint.into(),
            token: std::env::var(TOKEN_ENV).ok(),
            agent: ureq::Agent::new_with_defaults(),
        }
    }
}

impl PullRequestProvider for HttpProvider {
    fn associated_pull_requests(&self, repo: &RepoLocator, commit: &CommitId) -> Result<ProviderResponse> {
        let body = serde_json::json!({
            "query": QUERY,
            "variables": {"owner": repo.owner, "name": repo.name, "oid": commit.as_str()},
        });
        let mut request = self.agent.post(&self.endpoint);
        if let Some(token) = &self.token {
            request = request.header("Authorization", &format!("bearer {token}"));
        }
        let mut response = match request.send_json(&body) {
            Ok(r) => r,
            Err(ureq::Error::StatusCode(429 | 403)) => return Err(Error::RateLimited),
            Err(e) => return Err(Error::ProviderUnreachable(e.to_string())),
        };
        let parsed: ProviderResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| Error::ProviderUnreachable(format!("bad response body: {e}")))?;
        if parsed.is_rate_limited() {
            return Err(Error::RateLimited);
        }
        Ok(parsed)
    }
}

/// Passes queries through and keeps every successful response so they can
/// be saved as a response-cache file.
pub struct RecordingProvider<P> {
    inner: P,
    recorded: Mutex<BTreeMap<String, ProviderResponse>>,
}

impl<P: PullRequestProvider> RecordingProvider<P> {
    pub fn new(inner: P) -> Self {
        RecordingProvider {
            inner,
            recorded: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let recorded = self.recorded.lock().expect("recording poisoned");
        std::fs::write(path, serde_json::to_string_pretty(&*recorded)?)?;
        Ok(())
    }
}

impl<P: PullRequestProvider> PullRequestProvider for RecordingProvider<P> {
    fn associated_pull_requests(&self, repo: &RepoLocator, commit: &CommitId) -> Result<ProviderResponse> {
        let response = self.inner.associated_pull_requests(repo, commit)?;
        self.recorded
            .lock()
            .expect("recording poisoned")
            .insert(request_key(repo, commit), response.clone());
        Ok(response)
    }
}

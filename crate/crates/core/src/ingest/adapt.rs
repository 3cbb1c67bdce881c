// SPDX-License-Identifier: Apache-2.0

//! Lifting commit-level links to pull-request commit-sets.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::provider::{request_key, ProviderResponse, PullRequestProvider, RepoLocator};
use crate::commitset::{CommitSet, Dataset, LinkRecord};
use crate::error::{Error, Result};
use crate::history::CommitId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitLevelLink {
    pub repository: String,
    pub fixing_commit: CommitId,
    pub inducing_commit: CommitId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionStatus {
    Resolved,
    MissingRepository,
    MissingPullRequest,
    ForkAmbiguous,
}

impl ResolutionStatus {
    pub const FAILURES: [ResolutionStatus; 3] = [
        ResolutionStatus::MissingRepository,
        ResolutionStatus::MissingPullRequest,
        ResolutionStatus::ForkAmbiguous,
    ];
}

/// Result of resolving one commit: its pull request, or why there is none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Resolved(CommitSet),
    Failed(ResolutionStatus),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionOutcome {
    pub status: ResolutionStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<LinkRecord>,
}

/// Discard counts per failure status. All three statuses are always present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscardTally(pub BTreeMap<ResolutionStatus, usize>);

impl Default for DiscardTally {
    fn default() -> Self {
        DiscardTally(ResolutionStatus::FAILURES.iter().map(|s| (*s, 0)).collect())
    }
}

impl DiscardTally {
    pub fn get(&self, status: ResolutionStatus) -> usize {
        self.0.get(&status).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }
}

#[derive(Debug, Clone)]
pub struct AdaptOptions {
    pub max_in_flight: usize,
    /// Extra attempts after a rate-limited response.
    pub retries: u32,
    pub backoff: Duration,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        AdaptOptions {
            max_in_flight: 8,
            retries: 3,
            backoff: Duration::from_millis(500),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Adaptation {
    pub dataset: Dataset,
    pub tally: DiscardTally,
    pub outcomes: Vec<ResolutionOutcome>,
}

/// Interprets a provider response for `commit`.
pub fn interpret_response(response: &ProviderResponse) -> Resolution {
    let repository = match response.data.as_ref().and_then(|d| d.repository.as_ref()) {
        Some(r) => r,
        None => return Resolution::Failed(ResolutionStatus::MissingRepository),
    };
    let Some(object) = &repository.object else {
        return Resolution::Failed(ResolutionStatus::MissingPullRequest);
    };
    let mut distinct: Vec<(u64, Vec<CommitId>)> = Vec::new();
    for pr in &object.associated_pull_requests.nodes {
        let commits: Vec<CommitId> = pr
            .commits
            .nodes
            .iter()
            .map(|c| CommitId::new(c.commit.oid.clone()))
            .collect();
        if !distinct.iter().any(|(n, cs)| *n == pr.number && *cs == commits) {
            distinct.push((pr.number, commits));
        }
    }
    match distinct.len() {
        0 => Resolution::Failed(ResolutionStatus::MissingPullRequest),
        1 => {
            let (number, commits) = distinct.pop().expect("one element");
            if commits.is_empty() {
                Resolution::Failed(ResolutionStatus::MissingPullRequest)
            } else {
                Resolution::Resolved(CommitSet::new(format!("PR{number}"), commits))
            }
        }
        _ => Resolution::Failed(ResolutionStatus::ForkAmbiguous),
    }
}

fn query_with_retry(
    provider: &dyn PullRequestProvider,
    repo: &RepoLocator,
    commit: &CommitId,
    options: &AdaptOptions,
) -> Result<ProviderResponse> {
    let mut attempt = 0;
    loop {
        match provider.associated_pull_requests(repo, commit) {
            Err(Error::RateLimited) if attempt < options.retries => {
                let wait = options.backoff * 2u32.saturating_pow(attempt);
                log::warn!("rate limited on {}, retrying in {wait:?}", request_key(repo, commit));
                std::thread::sleep(wait);
                attempt += 1;
            }
            other => return other,
        }
    }
}

pub fn resolve_commit_to_set(
    provider: &dyn PullRequestProvider,
    repo: &RepoLocator,
    commit: &CommitId,
) -> Result<Resolution> {
    let response = query_with_retry(provider, repo, commit, &AdaptOptions::default())?;
    Ok(interpret_response(&response))
}

/// Memoizes resolutions so commits shared between links are queried once.
struct Resolver<'a> {
    provider: &'a dyn PullRequestProvider,
    options: &'a AdaptOptions,
    cache: Mutex<HashMap<String, Resolution>>,
}

impl Resolver<'_> {
    fn resolve(&self, repo: &RepoLocator, commit: &CommitId) -> Result<Resolution> {
        let key = request_key(repo, commit);
        if let Some(hit) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let response = query_with_retry(self.provider, repo, commit, self.options)?;
        let resolution = interpret_response(&response);
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert(key, resolution.clone());
        Ok(resolution)
    }

    /// Inducing side first, then the fixing side.
    fn link(
        &self,
        link: &CommitLevelLink,
    ) -> Result<std::result::Result<(RepoLocator, CommitSet, CommitSet), ResolutionStatus>> {
        let repo: RepoLocator = link.repository.parse()?;
        let inducing = match self.resolve(&repo, &link.inducing_commit)? {
            Resolution::Resolved(set) => set,
            Resolution::Failed(status) => return Ok(Err(status)),
        };
        let fixing = match self.resolve(&repo, &link.fixing_commit)? {
            Resolution::Resolved(set) => set,
            Resolution::Failed(status) => return Ok(Err(status)),
        };
        Ok(Ok((repo, fixing, inducing)))
    }
}

fn qualify(repo: &RepoLocator, set: CommitSet) -> CommitSet {
    CommitSet::new(format!("{repo}#{}", set.id.as_str()), set.commits)
}

/// Keeps a link only if both of its commits resolve to a pull request.
/// Output order follows input order regardless of query completion order.
pub fn adapt_commit_links(
    links: &[CommitLevelLink],
    provider: &dyn PullRequestProvider,
    options: &AdaptOptions,
) -> Result<Adaptation> {
    let resolver = Resolver {
        provider,
        options,
        cache: Mutex::new(HashMap::new()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.max_in_flight.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let resolved: Vec<_> = pool.install(|| links.par_iter().map(|l| resolver.link(l)).collect::<Result<Vec<_>>>())?;

    let mut out = Adaptation::default();
    for (n, (link, result)) in links.iter().zip(resolved).enumerate() {
        match result {
            Ok((repo, fixing, inducing)) => {
                let bug_id = format!("{}:{}", link.repository, n + 1);
                out.dataset
                    .push(bug_id.clone(), qualify(&repo, fixing), vec![qualify(&repo, inducing)])?;
                let record = out.dataset.links.last().expect("just pushed").clone();
                out.outcomes.push(ResolutionOutcome {
                    status: ResolutionStatus::Resolved,
                    record: Some(record),
                });
            }
            Err(status) => {
                *out.tally.0.entry(status).or_default() += 1;
                out.outcomes.push(ResolutionOutcome { status, record: None });
            }
        }
    }
    Ok(out)
}

pub fn parse_links_csv(reader: impl Read) -> Result<Vec<CommitLevelLink>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut links = Vec::new();
    for (n, row) in rdr.deserialize::<CommitLevelLink>().enumerate() {
        let link = row.map_err(|e| Error::InvalidDataset(format!("links row {}: {e}", n + 1)))?;
        if link.fixing_commit.as_str().is_empty() || link.inducing_commit.as_str().is_empty() {
            return Err(Error::InvalidDataset(format!("links row {}: empty commit id", n + 1)));
        }
        links.push(link);
    }
    Ok(links)
}

pub fn read_links_csv(path: &Path) -> Result<Vec<CommitLevelLink>> {
    let file = std::fs::File::open(path).map_err(|e| Error::unreadable(path, e))?;
    parse_links_csv(file)
}

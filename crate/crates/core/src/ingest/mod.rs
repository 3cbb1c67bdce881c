// SPDX-License-Identifier: Apache-2.0

//! Building link datasets from commit-level links.

mod adapt;
mod linkability;
pub mod provider;

pub use adapt::{
    adapt_commit_links, interpret_response, parse_links_csv, read_links_csv, resolve_commit_to_set, AdaptOptions,
    Adaptation, CommitLevelLink, DiscardTally, Resolution, ResolutionOutcome, ResolutionStatus,
};
pub use linkability::{compute_linkability, LinkabilityFlags};
pub use provider::{
    HttpProvider, ProviderResponse, PullRequestProvider, RecordedProvider, RecordingProvider, RepoLocator,
};

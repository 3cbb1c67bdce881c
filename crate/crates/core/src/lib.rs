// SPDX-License-Identifier: Apache-2.0

//! SZZ at commit-set granularity.
//!
//! The crate loads a repository history ([`history`]), traces lines back
//! to the commits that last touched them ([`blame`]), runs five SZZ
//! variants on top of that ([`variants`]), lifts per-commit candidates to
//! commit-sets ([`commitset`]), and scores the result against ground-truth
//! links ([`eval`]). [`ingest`] builds link datasets from commit-level
//! links, and [`linker`] trains the classifier that keeps only commits
//! likely to lead SZZ to the right commit-set.

pub mod blame;
pub mod cli;
pub mod commitset;
pub mod error;
pub mod eval;
pub mod history;
pub mod ingest;
pub mod linker;
pub mod pipeline;
pub mod variants;

pub use error::{Error, Result};

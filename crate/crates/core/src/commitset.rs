// SPDX-License-Identifier: Apache-2.0

//! Commit-sets, ground-truth links, and aggregation of per-commit SZZ
//! candidates into candidate commit-sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::{CommitId, RepositoryHistory};
use crate::variants::{run_variant, VariantConfig, VariantId};

const VIRTUAL_PREFIX: &str = "virtual:";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SetId(String);

impl SetId {
    pub fn new(value: impl Into<String>) -> Self {
        SetId(value.into())
    }

    pub fn virtual_for(commit: &CommitId) -> Self {
        SetId(format!("{VIRTUAL_PREFIX}{commit}"))
    }

    pub fn is_virtual(&self) -> bool {
        self.0.starts_with(VIRTUAL_PREFIX)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SetId {
    fn from(value: &str) -> Self {
        SetId(value.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitSet {
    #[serde(rename = "set_id")]
    pub id: SetId,
    /// Integration order.
    pub commits: Vec<CommitId>,
    #[serde(default, rename = "virtual", skip_serializing_if = "std::ops::Not::not")]
    pub is_virtual: bool,
}

impl CommitSet {
    pub fn new(id: impl Into<String>, commits: Vec<CommitId>) -> Self {
        CommitSet {
            id: SetId::new(id),
            commits,
            is_virtual: false,
        }
    }

    /// Singleton wrapper for a commit that belongs to no real set.
    pub fn virtual_for(commit: &CommitId) -> Self {
        CommitSet {
            id: SetId::virtual_for(commit),
            commits: vec![commit.clone()],
            is_virtual: true,
        }
    }

    pub fn contains(&self, commit: &CommitId) -> bool {
        self.commits.contains(commit)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommitSetIndex {
    by_commit: BTreeMap<CommitId, SetId>,
    sets: BTreeMap<SetId, CommitSet>,
}

impl CommitSetIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a real set. Re-inserting an identical set is a no-op.
    pub fn insert(&mut self, set: CommitSet) -> Result<()> {
        if set.commits.is_empty() {
            return Err(Error::InvalidDataset(format!("commit-set {} is empty", set.id)));
        }
        if set.is_virtual || set.id.is_virtual() {
            return Err(Error::InvalidDataset(format!(
                "commit-set {} uses the reserved virtual prefix",
                set.id
            )));
        }
        if let Some(existing) = self.sets.get(&set.id) {
            if existing.commits == set.commits {
                return Ok(());
            }
            return Err(Error::InvalidDataset(format!(
                "commit-set {} declared twice with different commits",
                set.id
            )));
        }
        for c in &set.commits {
            if let Some(other) = self.by_commit.get(c) {
                return Err(Error::InvalidDataset(format!(
                    "commit {c} belongs to both {other} and {}",
                    set.id
                )));
            }
        }
        for c in &set.commits {
            self.by_commit.insert(c.clone(), set.id.clone());
        }
        self.sets.insert(set.id.clone(), set);
        Ok(())
    }

    pub fn get(&self, id: &SetId) -> Option<&CommitSet> {
        self.sets.get(id)
    }

    pub fn set_of(&self, commit: &CommitId) -> Option<&SetId> {
        self.by_commit.get(commit)
    }

    pub fn sets(&self) -> impl Iterator<Item = &CommitSet> {
        self.sets.values()
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// The real set containing `commit`, or a virtual singleton.
    pub fn resolve_set(&self, commit: &CommitId) -> CommitSet {
        match self.by_commit.get(commit) {
            Some(id) => self.sets[id].clone(),
            None => CommitSet::virtual_for(commit),
        }
    }

    /// Looks a set up by id, synthesizing virtual sets from their id.
    pub fn lookup(&self, id: &SetId) -> Option<CommitSet> {
        if let Some(set) = self.sets.get(id) {
            return Some(set.clone());
        }
        id.as_str()
            .strip_prefix(VIRTUAL_PREFIX)
            .map(|c| CommitSet::virtual_for(&CommitId::new(c)))
    }
}

/// One ground-truth link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub bug_id: String,
    pub fixing_set: SetId,
    /// Empty for extrinsic bugs.
    pub inducing_sets: Vec<SetId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub links: Vec<LinkRecord>,
    pub index: CommitSetIndex,
}

#[derive(Serialize, Deserialize)]
struct LinkLine {
    bug_id: String,
    fixing: CommitSet,
    #[serde(default)]
    inducing: Vec<CommitSet>,
}

impl Dataset {
    pub fn push(&mut self, bug_id: String, fixing: CommitSet, inducing: Vec<CommitSet>) -> Result<()> {
        if self.links.iter().any(|l| l.bug_id == bug_id) {
            return Err(Error::InvalidDataset(format!("duplicate bug id {bug_id}")));
        }
        let record = LinkRecord {
            bug_id,
            fixing_set: fixing.id.clone(),
            inducing_sets: inducing.iter().map(|s| s.id.clone()).collect(),
        };
        self.index.insert(fixing)?;
        for set in inducing {
            self.index.insert(set)?;
        }
        self.links.push(record);
        Ok(())
    }

    pub fn fixing_set(&self, link: &LinkRecord) -> &CommitSet {
        self.index
            .get(&link.fixing_set)
            .expect("dataset links reference indexed sets")
    }

    /// Distinct fixing sets in first-appearance order.
    pub fn fixing_sets(&self) -> Vec<&CommitSet> {
        let mut seen = BTreeSet::new();
        self.links
            .iter()
            .filter(|l| seen.insert(&l.fixing_set))
            .map(|l| self.fixing_set(l))
            .collect()
    }

    /// Keeps only links accepted by `keep`; the index is left intact.
    pub fn retain(&mut self, keep: impl FnMut(&LinkRecord) -> bool) {
        self.links.retain(keep);
    }

    pub fn parse_jsonl(reader: impl BufRead) -> Result<Self> {
        let mut dataset = Dataset::default();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: LinkLine =
                serde_json::from_str(&line).map_err(|e| Error::InvalidDataset(format!("line {}: {e}", n + 1)))?;
            dataset.push(parsed.bug_id, parsed.fixing, parsed.inducing)?;
        }
        Ok(dataset)
    }

    pub fn read_jsonl(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::unreadable(path, e))?;
        Self::parse_jsonl(BufReader::new(file))
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for link in &self.links {
            let line = LinkLine {
                bug_id: link.bug_id.clone(),
                fixing: self.fixing_set(link).clone(),
                inducing: link
                    .inducing_sets
                    .iter()
                    .map(|id| self.index.get(id).expect("indexed").clone())
                    .collect(),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Adds extra real sets (e.g. every pull request of the repository) so
    /// candidates outside the ground truth resolve to their true set.
    pub fn extend_sets(&mut self, reader: impl BufRead) -> Result<()> {
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let set: CommitSet =
                serde_json::from_str(&line).map_err(|e| Error::InvalidDataset(format!("sets line {}: {e}", n + 1)))?;
            self.index.insert(set)?;
        }
        Ok(())
    }
}

/// Decides which commits of a fixing set are fed to SZZ.
pub trait InputFilter: Sync {
    fn accept(&self, history: &RepositoryHistory, set: &CommitSet, commit: &CommitId) -> Result<bool>;
}

impl<F> InputFilter for F
where
    F: Fn(&CommitId) -> bool + Sync,
{
    fn accept(&self, _: &RepositoryHistory, _: &CommitSet, commit: &CommitId) -> Result<bool> {
        Ok(self(commit))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Provenance {
    pub input: CommitId,
    pub candidate: CommitId,
    /// The candidate lies inside the fixing set itself.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub self_link: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregatedCandidates {
    pub fixing_set: SetId,
    pub variant: VariantId,
    /// Commits of the fixing set that SZZ ran on.
    pub inputs: Vec<CommitId>,
    /// Commits of the fixing set rejected by the input filter.
    #[serde(default)]
    pub rejected: Vec<CommitId>,
    pub candidate_sets: BTreeSet<SetId>,
    pub contributing: BTreeMap<SetId, BTreeSet<Provenance>>,
}

impl AggregatedCandidates {
    /// Every commit was filtered out, so SZZ never ran on this set.
    pub fn discarded(&self) -> bool {
        self.inputs.is_empty() && !self.rejected.is_empty()
    }

    /// Candidate sets reached from one input commit.
    pub fn candidates_of(&self, input: &CommitId) -> BTreeSet<SetId> {
        self.contributing
            .iter()
            .filter(|(_, prov)| prov.iter().any(|p| &p.input == input))
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// Same result as re-aggregating with an input filter that accepts
    /// exactly the commits `keep` accepts.
    pub fn restrict(&self, mut keep: impl FnMut(&CommitId) -> bool) -> AggregatedCandidates {
        let mut inputs = Vec::new();
        let mut rejected = self.rejected.clone();
        for c in &self.inputs {
            if keep(c) {
                inputs.push(c.clone());
            } else {
                rejected.push(c.clone());
            }
        }
        let contributing: BTreeMap<SetId, BTreeSet<Provenance>> = self
            .contributing
            .iter()
            .filter_map(|(id, prov)| {
                let kept: BTreeSet<Provenance> = prov.iter().filter(|p| inputs.contains(&p.input)).cloned().collect();
                (!kept.is_empty()).then(|| (id.clone(), kept))
            })
            .collect();
        AggregatedCandidates {
            fixing_set: self.fixing_set.clone(),
            variant: self.variant,
            inputs,
            rejected,
            candidate_sets: contributing.keys().cloned().collect(),
            contributing,
        }
    }
}

pub fn aggregate(
    history: &RepositoryHistory,
    index: &CommitSetIndex,
    fixing_set: &CommitSet,
    variant: VariantId,
    config: &VariantConfig,
    filter: Option<&dyn InputFilter>,
) -> Result<AggregatedCandidates> {
    let mut out = AggregatedCandidates {
        fixing_set: fixing_set.id.clone(),
        variant,
        inputs: Vec::new(),
        rejected: Vec::new(),
        candidate_sets: BTreeSet::new(),
        contributing: BTreeMap::new(),
    };
    for commit in &fixing_set.commits {
        if let Some(filter) = filter {
            if !filter.accept(history, fixing_set, commit)? {
                out.rejected.push(commit.clone());
                continue;
            }
        }
        out.inputs.push(commit.clone());
        let report = run_variant(history, commit, variant, config)?;
        for candidate in report.candidates {
            let set = index.resolve_set(&candidate);
            out.candidate_sets.insert(set.id.clone());
            out.contributing.entry(set.id).or_default().insert(Provenance {
                input: commit.clone(),
                self_link: fixing_set.contains(&candidate),
                candidate,
            });
        }
    }
    Ok(out)
}

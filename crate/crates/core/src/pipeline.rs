// SPDX-License-Identifier: Apache-2.0

//! Dataset-wide fan-out of aggregation and linkability.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::commitset::{aggregate, AggregatedCandidates, Dataset, InputFilter, SetId};
use crate::error::{Error, Result};
use crate::history::RepositoryHistory;
use crate::ingest::{compute_linkability, LinkabilityFlags};
use crate::linker::ProvenanceMap;
use crate::variants::{VariantConfig, VariantId};

/// Runs `f` on a pool of `parallelism` threads (0 picks the default).
pub fn with_parallelism<T: Send>(parallelism: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(pool.install(f))
}

/// Aggregates every distinct fixing set of `dataset`. The result does not
/// depend on scheduling.
pub fn aggregate_dataset(
    history: &RepositoryHistory,
    dataset: &Dataset,
    variant: VariantId,
    config: &VariantConfig,
    filter: Option<&dyn InputFilter>,
) -> Result<BTreeMap<SetId, AggregatedCandidates>> {
    dataset
        .fixing_sets()
        .par_iter()
        .map(|set| {
            Ok((
                set.id.clone(),
                aggregate(history, &dataset.index, set, variant, config, filter)?,
            ))
        })
        .collect()
}

/// Unfiltered aggregations for each requested variant.
pub fn provenance(
    history: &RepositoryHistory,
    dataset: &Dataset,
    variants: &[VariantId],
    config: &VariantConfig,
) -> Result<ProvenanceMap> {
    variants
        .iter()
        .map(|&v| Ok((v, aggregate_dataset(history, dataset, v, config, None)?)))
        .collect()
}

/// Linkability flags keyed by bug id.
pub fn linkability_map(history: &RepositoryHistory, dataset: &Dataset) -> Result<BTreeMap<String, LinkabilityFlags>> {
    let flags = dataset
        .links
        .par_iter()
        .map(|l| Ok((l.bug_id.clone(), compute_linkability(history, dataset, l)?)))
        .collect::<Result<HashMap<_, _>>>()?;
    Ok(flags.into_iter().collect())
}

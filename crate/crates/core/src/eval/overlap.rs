// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::EvalReport;
use crate::commitset::SetId;
use crate::error::{Error, Result};
use crate::variants::VariantId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapKind {
    TruePositive,
    FalsePositive,
    FalseNegative,
}

impl OverlapKind {
    pub const ALL: [OverlapKind; 3] = [
        OverlapKind::TruePositive,
        OverlapKind::FalsePositive,
        OverlapKind::FalseNegative,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OverlapKind::TruePositive => "true_positive",
            OverlapKind::FalsePositive => "false_positive",
            OverlapKind::FalseNegative => "false_negative",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapCell {
    pub a: VariantId,
    pub b: VariantId,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapMatrix {
    pub kind: OverlapKind,
    pub variants: Vec<VariantId>,
    /// Pairs where both variants have no item of this kind are absent.
    pub cells: Vec<OverlapCell>,
}

impl OverlapMatrix {
    pub fn get(&self, a: VariantId, b: VariantId) -> Option<f64> {
        self.cells.iter().find(|c| c.a == a && c.b == b).map(|c| c.value)
    }

    /// Square CSV with an empty field for absent cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant");
        for v in &self.variants {
            write!(out, ",{}", v.display_name()).unwrap();
        }
        out.push('\n');
        for a in &self.variants {
            out.push_str(a.display_name());
            for b in &self.variants {
                match self.get(*a, *b) {
                    Some(x) => write!(out, ",{x:.4}").unwrap(),
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}

fn items(report: &EvalReport, kind: OverlapKind) -> BTreeSet<(&str, &SetId)> {
    report
        .per_link
        .iter()
        .flat_map(|s| {
            let sets = match kind {
                OverlapKind::TruePositive => &s.tp,
                OverlapKind::FalsePositive => &s.fp,
                OverlapKind::FalseNegative => &s.fn_,
            };
            sets.iter().map(move |id| (s.bug_id.as_str(), id))
        })
        .collect()
}

/// Jaccard agreement between variants on (link, commit-set) items of one
/// kind, pooled across links.
pub fn overlap(reports: &[EvalReport], kind: OverlapKind) -> Result<OverlapMatrix> {
    if reports.len() < 2 {
        return Err(Error::InvalidArgument("overlap needs at least two variants".into()));
    }
    let links = |r: &EvalReport| r.per_link.iter().map(|s| s.bug_id.clone()).collect::<BTreeSet<_>>();
    let first = links(&reports[0]);
    if reports.iter().any(|r| links(r) != first) {
        return Err(Error::InvalidArgument("overlap reports cover different links".into()));
    }
    let pooled: BTreeMap<VariantId, _> = reports.iter().map(|r| (r.variant, items(r, kind))).collect();
    if pooled.len() != reports.len() {
        return Err(Error::InvalidArgument("duplicate variant in overlap input".into()));
    }
    let variants: Vec<VariantId> = reports.iter().map(|r| r.variant).collect();
    let mut cells = Vec::new();
    for a in &variants {
        for b in &variants {
            let (x, y) = (&pooled[a], &pooled[b]);
            let union = x.union(y).count();
            if union > 0 {
                cells.push(OverlapCell {
                    a: *a,
                    b: *b,
                    value: x.intersection(y).count() as f64 / union as f64,
                });
            }
        }
    }
    Ok(OverlapMatrix { kind, variants, cells })
}

// SPDX-License-Identifier: Apache-2.0

//! Tabular renderings of evaluation reports.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::EvalReport;
use crate::error::Result;
use crate::variants::VariantId;

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub variation: String,
    pub identified: usize,
    pub correct: usize,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub avg_jd: f64,
}

impl From<&EvalReport> for TableRow {
    fn from(r: &EvalReport) -> Self {
        TableRow {
            variation: r.variant.display_name().to_owned(),
            identified: r.identified,
            correct: r.correct,
            recall: r.recall,
            precision: r.precision,
            f1: r.f1,
            avg_jd: r.avg_jaccard_distance,
        }
    }
}

/// Results of a run whose SZZ inputs went through a linker filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredReport {
    pub variant: VariantId,
    /// Fixing commit-sets whose commits were all rejected.
    pub discarded_sets: usize,
    /// Scored against every ground-truth link.
    pub ground_truth: EvalReport,
    /// Scored only on links whose fixing set kept at least one commit.
    pub without_bad_linkers: EvalReport,
}

impl FilteredReport {
    pub fn new(ground_truth: EvalReport) -> Self {
        let without_bad_linkers = ground_truth.subset(|s| !s.discarded);
        FilteredReport {
            variant: ground_truth.variant,
            discarded_sets: ground_truth.discarded(),
            ground_truth,
            without_bad_linkers,
        }
    }
}

fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        parts.join("  ").trim_end().to_owned() + "\n"
    };
    let mut out = line(header.to_vec());
    out.push_str(&line(
        widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str)
            .collect(),
    ));
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

fn f2(x: f64) -> String {
    format!("{x:.2}")
}

/// Aligned text table: Variation, Identified, Correct, Rec., Prec., F1, avg JD.
pub fn render_table(reports: &[EvalReport]) -> String {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let t = TableRow::from(r);
            vec![
                t.variation,
                t.identified.to_string(),
                t.correct.to_string(),
                f2(t.recall),
                f2(t.precision),
                f2(t.f1),
                f2(t.avg_jd),
            ]
        })
        .collect();
    aligned(
        &["Variation", "Identified", "Correct", "Rec.", "Prec.", "F1", "avg JD"],
        &rows,
    )
}

/// Filtered-run table: counts, discarded sets, then both metric blocks.
pub fn render_filtered_table(reports: &[FilteredReport]) -> String {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let g = &r.ground_truth;
            let w = &r.without_bad_linkers;
            vec![
                r.variant.display_name().to_owned(),
                g.identified.to_string(),
                g.correct.to_string(),
                r.discarded_sets.to_string(),
                f2(g.precision),
                f2(g.recall),
                f2(g.f1),
                f2(w.precision),
                f2(w.recall),
                f2(w.f1),
            ]
        })
        .collect();
    aligned(
        &[
            "Algorithm",
            "Identified",
            "Correct",
            "Discarded",
            "GT Prec.",
            "GT Rec.",
            "GT F1",
            "WBL Prec.",
            "WBL Rec.",
            "WBL F1",
        ],
        &rows,
    )
}

pub fn write_csv(reports: &[EvalReport], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(TableRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

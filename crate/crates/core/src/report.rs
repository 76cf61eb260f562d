//! Serialized forms of a search run: the JSON report, the flat per-candidate
//! CSV and a plain-text summary table.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::search::{Candidate, IterationReport, SearchOutcome};

pub const CSV_HEADER: [&str; 10] = [
    "iteration",
    "candidate",
    "parent",
    "train_mse",
    "train_r2",
    "val_mse",
    "val_r2",
    "n_gates",
    "n_params",
    "rank",
];

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per candidate of every iteration.
pub fn iterations_csv(reports: &[IterationReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::parse("csv output", e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for report in reports {
        let ranks = report.ranks();
        for (c, rank) in report.candidates.iter().zip(ranks) {
            w.write_record([
                report.iteration.to_string(),
                c.index.to_string(),
                c.parent.map(|p| p.to_string()).unwrap_or_default(),
                opt(c.train.map(|m| m.mse)),
                opt(c.train.map(|m| m.r2)),
                opt(c.validation.map(|m| m.mse)),
                opt(c.validation.map(|m| m.r2)),
                c.ansatz.len().to_string(),
                c.ansatz.n_params.to_string(),
                rank.to_string(),
            ])
            .map_err(err)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::parse("csv output", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

/// Best candidate per iteration, `Base` first. Values are printed with
/// round-trip precision so they equal the JSON report exactly.
pub fn summary_table(reports: &[IterationReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<8} {:>9} {:>8} {:>24} {:>24} {:>24} {:>24}",
        "row", "candidate", "n_params", "train_mse", "train_r2", "val_mse", "val_r2"
    );
    for r in reports {
        let label = if r.iteration == 0 {
            "Base".to_owned()
        } else {
            format!("Iter{}", r.iteration)
        };
        let best = r.best_candidate();
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |v| v.to_string());
        let _ = writeln!(
            out,
            "{:<8} {:>9} {:>8} {:>24} {:>24} {:>24} {:>24}",
            label,
            best.map_or_else(|| "-".to_owned(), |c| c.index.to_string()),
            best.map_or_else(|| "-".to_owned(), |c| c.ansatz.n_params.to_string()),
            cell(r.best_train.map(|m| m.mse)),
            cell(r.best_train.map(|m| m.r2)),
            cell(r.best_validation.map(|m| m.mse)),
            cell(r.best_validation.map(|m| m.r2)),
        );
    }
    out
}

/// The best circuit of an iteration together with its lineage.
#[derive(Serialize)]
pub struct BestAnsatz<'a> {
    pub iteration: usize,
    pub candidate: &'a Candidate,
}

pub fn best_ansatz_json(report: &IterationReport) -> Result<Option<String>> {
    report
        .best_candidate()
        .map(|candidate| {
            to_json(&BestAnsatz {
                iteration: report.iteration,
                candidate,
            })
        })
        .transpose()
}

pub fn outcome_json(outcome: &SearchOutcome) -> Result<String> {
    to_json(outcome)
}

//! Per-policy aggregation and CSV output.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::mip::SolveStatus;

use super::log::DetailRow;
use super::{ExperimentError, Policy};

/// One results row: a grid cell or a baseline, averaged over scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub policy: String,
    pub tpr: Option<f64>,
    pub rfpr: Option<f64>,
    pub rostering_cost: Option<f64>,
    pub reserves_per_day: f64,
    pub mean_reroster_cost: Option<f64>,
    pub pct_reserves_converted: Option<f64>,
    pub working_shift_changes: Option<f64>,
    pub dayoff_changes: Option<f64>,
    /// Rerostering solves per status.
    pub n_optimal: usize,
    pub n_gap: usize,
    pub mean_solve_s: f64,
    pub n_failed: usize,
    pub max_gap: Option<f64>,
    pub n_scenarios: usize,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Aggregates detail rows into one record per policy, in the order given.
pub fn aggregate_cells(policies: &[Policy], rows: &[DetailRow]) -> Vec<CellRecord> {
    policies
        .iter()
        .map(|p| {
            let key = p.key();
            let mut mine: Vec<&DetailRow> = rows.iter().filter(|r| r.policy.key() == key).collect();
            mine.sort_by_key(|r| r.scenario);
            let (tpr, rfpr) = match *p {
                Policy::Cell { tpr, rfpr } => (Some(tpr), Some(rfpr)),
                Policy::Fixed { .. } => (None, None),
            };
            let statuses = || mine.iter().filter_map(|r| r.reroster_status);
            CellRecord {
                policy: p.label(),
                tpr,
                rfpr,
                rostering_cost: mean(mine.iter().filter_map(|r| r.rostering_cost)),
                reserves_per_day: mean(mine.iter().map(|r| r.reserves_per_day)).unwrap_or(0.0),
                mean_reroster_cost: mean(mine.iter().filter_map(|r| r.reroster_cost)),
                pct_reserves_converted: mean(mine.iter().filter_map(|r| r.pct_reserves_converted)),
                working_shift_changes: mean(mine.iter().filter_map(|r| r.working_shift_changes.map(f64::from))),
                dayoff_changes: mean(mine.iter().filter_map(|r| r.dayoff_changes.map(f64::from))),
                n_optimal: statuses().filter(|&s| s == SolveStatus::Optimal).count(),
                n_gap: statuses()
                    .filter(|&s| matches!(s, SolveStatus::FeasibleGap | SolveStatus::TimeLimit))
                    .count(),
                mean_solve_s: mean(mine.iter().filter(|r| r.reroster_status.is_some()).map(|r| r.reroster_solve_s)).unwrap_or(0.0),
                n_failed: mine.iter().filter(|r| r.reroster_cost.is_none()).count(),
                max_gap: mine.iter().filter_map(|r| r.reroster_gap).reduce(f64::max),
                n_scenarios: mine.len(),
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_results_csv(path: impl AsRef<Path>, cells: &[CellRecord]) -> Result<(), ExperimentError> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "policy",
        "tpr",
        "rfpr",
        "rostering_cost",
        "reserves_per_day",
        "mean_reroster_cost",
        "pct_reserves_converted",
        "working_shift_changes",
        "dayoff_changes",
        "n_optimal",
        "n_gap",
        "mean_solve_s",
        "n_failed",
        "max_gap",
    ])?;
    for c in cells {
        w.write_record([
            c.policy.clone(),
            opt(c.tpr),
            opt(c.rfpr),
            opt(c.rostering_cost),
            c.reserves_per_day.to_string(),
            opt(c.mean_reroster_cost),
            opt(c.pct_reserves_converted),
            opt(c.working_shift_changes),
            opt(c.dayoff_changes),
            c.n_optimal.to_string(),
            c.n_gap.to_string(),
            c.mean_solve_s.to_string(),
            c.n_failed.to_string(),
            opt(c.max_gap),
        ])?;
    }
    w.flush().map_err(|e| ExperimentError::io(path, e))
}

pub fn write_detail_csv(path: impl AsRef<Path>, rows: &[DetailRow]) -> Result<(), ExperimentError> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "policy",
        "tpr",
        "rfpr",
        "scenario",
        "absences",
        "reserves_per_day",
        "roster_status",
        "rostering_cost",
        "roster_solve_s",
        "reroster_status",
        "reroster_cost",
        "reroster_gap",
        "reroster_solve_s",
        "pct_reserves_converted",
        "working_shift_changes",
        "dayoff_changes",
        "tp",
        "fp",
        "fn",
        "tn",
        "error",
    ])?;
    for r in rows {
        let (tpr, rfpr) = match r.policy {
            Policy::Cell { tpr, rfpr } => (Some(tpr), Some(rfpr)),
            Policy::Fixed { .. } => (None, None),
        };
        let t = r.tallies;
        let tally = |f: fn(&crate::simml::Tallies) -> u64| t.as_ref().map(|t| f(t).to_string()).unwrap_or_default();
        w.write_record([
            r.policy.label(),
            opt(tpr),
            opt(rfpr),
            r.scenario.to_string(),
            r.absences.to_string(),
            r.reserves_per_day.to_string(),
            r.roster_status.to_string(),
            opt(r.rostering_cost),
            r.roster_solve_s.to_string(),
            r.reroster_status.map(|s| s.to_string()).unwrap_or_default(),
            opt(r.reroster_cost),
            opt(r.reroster_gap),
            r.reroster_solve_s.to_string(),
            opt(r.pct_reserves_converted),
            r.working_shift_changes.map(|v| v.to_string()).unwrap_or_default(),
            r.dayoff_changes.map(|v| v.to_string()).unwrap_or_default(),
            tally(|t| t.tp),
            tally(|t| t.fp),
            tally(|t| t.fn_),
            tally(|t| t.tn),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| ExperimentError::io(path, e))
}

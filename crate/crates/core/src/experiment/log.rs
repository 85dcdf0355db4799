//! Append-only JSONL record log, one line per finished task.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::mip::SolveStatus;

use super::{ExperimentError, Policy};

/// Outcome of one (policy, scenario) task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailRow {
    pub policy: Policy,
    pub scenario: usize,
    /// Absences in the evaluation scenario.
    pub absences: usize,
    pub reserves_per_day: f64,
    pub roster_status: SolveStatus,
    pub rostering_cost: Option<f64>,
    pub roster_solve_s: f64,
    pub reroster_status: Option<SolveStatus>,
    pub reroster_cost: Option<f64>,
    pub reroster_gap: Option<f64>,
    pub reroster_solve_s: f64,
    pub pct_reserves_converted: Option<f64>,
    pub working_shift_changes: Option<u32>,
    pub dayoff_changes: Option<u32>,
    /// Classifier tallies for the predictions behind the roster.
    pub tallies: Option<crate::simml::Tallies>,
    pub error: Option<String>,
}

impl DetailRow {
    pub fn key(&self) -> (String, usize) {
        (self.policy.key(), self.scenario)
    }
}

/// Single-writer handle; workers share it behind a mutex.
pub struct RecordLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl RecordLog {
    /// Opens `path` for appending. A partial last line left by an
    /// interrupted run is cut off first.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref().to_path_buf();
        if let Ok(bytes) = std::fs::read(&path) {
            if bytes.last().is_some_and(|&b| b != b'\n') {
                let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
                let f = OpenOptions::new().write(true).open(&path).map_err(|e| ExperimentError::io(&path, e))?;
                f.set_len(keep as u64).map_err(|e| ExperimentError::io(&path, e))?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| ExperimentError::io(&path, e))?;
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn append(&self, row: &DetailRow) -> Result<(), ExperimentError> {
        let mut line = serde_json::to_string(row).expect("detail rows serialize");
        line.push('\n');
        let mut f = self.file.lock().unwrap_or_else(|p| p.into_inner());
        f.write_all(line.as_bytes())
            .and_then(|_| f.flush())
            .map_err(|e| ExperimentError::io(&self.path, e))
    }
}

/// Reads every record in `path`. A truncated final line (from an
/// interrupted write) is ignored; any other malformed line is an error.
pub fn read_log(path: impl AsRef<Path>) -> Result<Vec<DetailRow>, ExperimentError> {
    let path = path.as_ref();
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path).map_err(|e| ExperimentError::io(path, e))?;
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<Result<_, _>>()
        .map_err(|e| ExperimentError::io(path, e))?;
    let mut rows = Vec::with_capacity(lines.len());
    let mut seen = BTreeSet::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<DetailRow>(line) {
            Ok(row) => {
                if seen.insert(row.key()) {
                    rows.push(row);
                }
            }
            Err(_) if i + 1 == lines.len() => {
                ::log::warn!("ignoring incomplete last record in {}", path.display());
            }
            Err(e) => {
                return Err(ExperimentError::Record {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(rows)
}

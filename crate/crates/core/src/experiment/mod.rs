//! Grid sweeps over classifier performance, fixed-count baselines, and
//! their comparison.
//!
//! Every (policy, scenario) pair is one task: build the original roster for
//! the policy's reserve requirement, then repair it against the evaluation
//! scenario. Finished tasks are appended to a JSONL log, so an interrupted
//! sweep resumes where it stopped, and results are sorted by key before any
//! aggregation so worker order never shows in the output.

mod aggregate;
mod compare;
mod log;
mod run;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::InstanceError;
use crate::mip::SolveControls;
use crate::reroster::RerosterOptions;
use crate::roster::RosterOptions;

pub use self::aggregate::{aggregate_cells, write_detail_csv, write_results_csv, CellRecord};
pub use self::compare::{compare_to_baseline, cost_ratio, marching_squares, spearman, ContourSegment, RatioGrid};
pub use self::log::{read_log, DetailRow, RecordLog};
pub use self::run::{load_sweep, run_sweep, Manifest, SweepResult, DETAIL_FILE, LOG_FILE, MANIFEST_FILE, RESULTS_FILE};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed record in {path} line {line}: {message}")]
    Record { path: String, line: usize, message: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("baseline k={0} is not part of the sweep")]
    MissingBaseline(u32),
    #[error("baseline k={0} has zero mean rerostering cost")]
    ZeroBaseline(u32),
    #[error("pilot solve failed: {0}")]
    Pilot(String),
}

impl ExperimentError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruthMode {
    /// Every policy is evaluated on the same evaluation scenarios, and the
    /// classifier predicts each of those scenarios.
    Shared,
    /// Each grid cell draws its own truth and predictions once; the resulting
    /// roster is evaluated on the shared evaluation scenarios.
    PerCell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Free-form reference to the instance, recorded in the manifest.
    pub instance: String,
    pub tpr_values: Vec<f64>,
    pub rfpr_values: Vec<f64>,
    pub rho: f64,
    pub n_scenarios: usize,
    pub baselines: Vec<u32>,
    pub controls: SolveControls,
    pub seed: u64,
    pub truth_mode: TruthMode,
    /// Worker threads.
    pub jobs: usize,
    /// Cap on accumulated solver wall time in seconds.
    pub budget_seconds: Option<f64>,
    /// When false, solve times are written as zero so outputs are
    /// byte-reproducible.
    pub record_timing: bool,
    pub roster_options: RosterOptions,
    pub reroster_options: RerosterOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            instance: String::new(),
            tpr_values: grid(0.1),
            rfpr_values: grid(0.1),
            rho: 0.0264,
            n_scenarios: 100,
            baselines: vec![1, 2, 3, 4],
            controls: SolveControls::default(),
            seed: 0,
            truth_mode: TruthMode::Shared,
            jobs: 1,
            budget_seconds: None,
            record_timing: true,
            roster_options: RosterOptions::default(),
            reroster_options: RerosterOptions::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let in_unit = |v: &f64| (0.0..=1.0).contains(v);
        if !self.tpr_values.iter().chain(&self.rfpr_values).all(in_unit) {
            return Err(ExperimentError::Config("grid values must lie in [0, 1]".into()));
        }
        if !in_unit(&self.rho) {
            return Err(ExperimentError::Config("rho must lie in [0, 1]".into()));
        }
        if self.n_scenarios == 0 {
            return Err(ExperimentError::Config("at least one scenario is required".into()));
        }
        if self.jobs == 0 {
            return Err(ExperimentError::Config("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

/// `0, step, 2*step, ..., 1`, rounded to remove accumulated float error.
pub fn grid(step: f64) -> Vec<f64> {
    assert!(step > 0.0 && step <= 1.0, "grid step must lie in (0, 1]");
    let n = (1.0 / step).round() as usize;
    (0..=n)
        .map(|i| ((i as f64 * step).min(1.0) * 1e9).round() / 1e9)
        .collect()
}

/// A reserve policy: a classifier grid cell or a fixed daily count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    Cell { tpr: f64, rfpr: f64 },
    Fixed { k: u32 },
}

impl Policy {
    /// Label used in the `policy` CSV column.
    pub fn label(&self) -> String {
        match self {
            Policy::Cell { .. } => "ml".into(),
            Policy::Fixed { k } => format!("fixed-{k}"),
        }
    }

    /// Unique key used in the record log.
    pub fn key(&self) -> String {
        match self {
            Policy::Cell { tpr, rfpr } => format!("ml:{tpr}:{rfpr}"),
            Policy::Fixed { k } => format!("fixed-{k}"),
        }
    }
}

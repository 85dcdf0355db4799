//! Sweep execution, persistence and reload.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::absence::{AbsenceScenario, ReserveRequirement};
use crate::instance::ProblemInstance;
use crate::mip::{MipBackend, SolveStatus};
use crate::reroster::solve_rerostering;
use crate::rng::{derive_seed, SeedDomain};
use crate::roster::{solve_rostering, solve_rostering_from, Roster, RosterError};
use crate::scenario::{baseline_policy, scenario_at};
use crate::simml::{predict_for_truth, simulate_predictions, ClassifierProfile, Tallies};

use super::aggregate::{aggregate_cells, write_detail_csv, write_results_csv, CellRecord};
use super::log::{read_log, DetailRow, RecordLog};
use super::{ExperimentError, Policy, SweepConfig, TruthMode};

pub const LOG_FILE: &str = "records.jsonl";
pub const RESULTS_FILE: &str = "results.csv";
pub const DETAIL_FILE: &str = "detail.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: SweepConfig,
    pub employees: usize,
    pub days: usize,
    pub policies: usize,
    pub tasks: usize,
    pub completed: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub cells: Vec<CellRecord>,
    /// Sorted by policy order, then scenario.
    pub details: Vec<DetailRow>,
    pub truncated: bool,
}

impl SweepResult {
    pub fn cell(&self, tpr: f64, rfpr: f64) -> Option<&CellRecord> {
        self.cells
            .iter()
            .find(|c| c.policy == "ml" && c.tpr == Some(tpr) && c.rfpr == Some(rfpr))
    }

    pub fn baseline(&self, k: u32) -> Option<&CellRecord> {
        let label = format!("fixed-{k}");
        self.cells.iter().find(|c| c.policy == label)
    }
}

pub(crate) fn policies(config: &SweepConfig) -> Vec<Policy> {
    let mut out = Vec::new();
    for &tpr in &config.tpr_values {
        for &rfpr in &config.rfpr_values {
            out.push(Policy::Cell { tpr, rfpr });
        }
    }
    out.extend(config.baselines.iter().map(|&k| Policy::Fixed { k }));
    out
}

type CachedRoster = Result<Arc<Roster>, (SolveStatus, String)>;

#[derive(Debug, Clone)]
struct Repair {
    status: SolveStatus,
    cost: f64,
    gap: Option<f64>,
    wall_time: f64,
    metrics: crate::reroster::RerosterMetrics,
}

type CachedRepair = Result<Repair, (SolveStatus, String)>;

struct Runner<'a> {
    instance: &'a ProblemInstance,
    config: &'a SweepConfig,
    backend: &'a dyn MipBackend<f64>,
    /// A roster depends only on the reserve requirement, so policies share
    /// entries; so do repairs of the same roster under the same scenario.
    rosters: Mutex<HashMap<ReserveRequirement, Arc<OnceLock<CachedRoster>>>>,
    repairs: Mutex<HashMap<(ReserveRequirement, usize), Arc<OnceLock<CachedRepair>>>>,
    /// Accumulated solver time in microseconds.
    spent_us: AtomicU64,
    truncated: AtomicBool,
}

fn status_of(err: &RosterError) -> SolveStatus {
    match err {
        RosterError::Infeasible => SolveStatus::Infeasible,
        RosterError::NoSolution(s) => *s,
        _ => SolveStatus::Error,
    }
}

impl Runner<'_> {
    fn timing(&self, t: f64) -> f64 {
        if self.config.record_timing {
            t
        } else {
            0.0
        }
    }

    fn charge(&self, seconds: f64) {
        self.spent_us.fetch_add((seconds * 1e6) as u64, Ordering::Relaxed);
    }

    fn over_budget(&self) -> bool {
        self.config
            .budget_seconds
            .is_some_and(|b| self.spent_us.load(Ordering::Relaxed) as f64 / 1e6 >= b)
    }

    fn roster(&self, reserve: ReserveRequirement) -> CachedRoster {
        let cell = {
            let mut map = self.rosters.lock().unwrap_or_else(|p| p.into_inner());
            map.entry(reserve.clone()).or_default().clone()
        };
        cell.get_or_init(|| {
            let zero = ReserveRequirement::zeros(self.instance.days);
            let base = if reserve == zero { None } else { self.roster(zero).ok() };
            let solved = match base {
                Some(base) => solve_rostering_from(
                    self.instance,
                    &reserve,
                    &self.config.controls,
                    self.config.roster_options,
                    self.backend,
                    &base.assignment,
                ),
                None => solve_rostering(
                    self.instance,
                    &reserve,
                    &self.config.controls,
                    self.config.roster_options,
                    self.backend,
                ),
            };
            match solved {
                Ok(r) => {
                    self.charge(r.solve.map_or(0.0, |s| s.wall_time));
                    Ok(Arc::new(r))
                }
                Err(e) => Err((status_of(&e), e.to_string())),
            }
        })
        .clone()
    }

    /// Reserve requirement (and classifier tallies) behind the roster of
    /// `policy` for evaluation scenario `index`.
    fn requirement(&self, policy_index: usize, policy: &Policy, index: usize, truth: &AbsenceScenario) -> (ReserveRequirement, Option<Tallies>) {
        let (n, d) = (self.instance.n_employees(), self.instance.days);
        match *policy {
            Policy::Fixed { k } => (baseline_policy(k, d), None),
            Policy::Cell { tpr, rfpr } => {
                let profile = ClassifierProfile {
                    tpr,
                    rfpr,
                    event_rate: self.config.rho,
                };
                let p = match self.config.truth_mode {
                    TruthMode::Shared => {
                        let seed = derive_seed(self.config.seed, SeedDomain::Prediction, &[policy_index as u64, index as u64]);
                        predict_for_truth(truth, &profile, seed)
                    }
                    TruthMode::PerCell => {
                        let seed = derive_seed(self.config.seed, SeedDomain::Prediction, &[policy_index as u64]);
                        simulate_predictions(n, d, &profile, seed)
                    }
                };
                (p.reserve_requirement, Some(p.tallies))
            }
        }
    }

    fn task(&self, policy_index: usize, policy: &Policy, index: usize) -> DetailRow {
        let (n, d) = (self.instance.n_employees(), self.instance.days);
        let truth = scenario_at(n, d, self.config.rho, self.config.seed, index);
        let (reserve, tallies) = self.requirement(policy_index, policy, index, &truth);
        let mut row = DetailRow {
            policy: *policy,
            scenario: index,
            absences: truth.total(),
            reserves_per_day: reserve.mean_per_day(),
            roster_status: SolveStatus::Error,
            rostering_cost: None,
            roster_solve_s: 0.0,
            reroster_status: None,
            reroster_cost: None,
            reroster_gap: None,
            reroster_solve_s: 0.0,
            pct_reserves_converted: None,
            working_shift_changes: None,
            dayoff_changes: None,
            tallies,
            error: None,
        };
        let original = match self.roster(reserve.clone()) {
            Ok(r) => r,
            Err((status, msg)) => {
                row.roster_status = status;
                row.error = Some(msg);
                return row;
            }
        };
        let info = original.solve.expect("solved rosters carry solve info");
        row.roster_status = info.status;
        row.rostering_cost = Some(original.costs.total);
        row.roster_solve_s = self.timing(info.wall_time);
        row.reserves_per_day = f64::from(original.total_reserves(self.instance)) / d as f64;

        match self.repair(&original, reserve, index, &truth) {
            Ok(res) => {
                row.reroster_status = Some(res.status);
                row.reroster_cost = Some(res.cost);
                row.reroster_gap = res.gap;
                row.reroster_solve_s = self.timing(res.wall_time);
                row.pct_reserves_converted = Some(res.metrics.pct_reserves_converted);
                row.working_shift_changes = Some(res.metrics.n_working_shift_changes);
                row.dayoff_changes = Some(res.metrics.n_dayoff_changes);
            }
            Err((status, msg)) => {
                row.reroster_status = Some(status);
                row.error = Some(msg);
            }
        }
        row
    }

    fn repair(&self, original: &Roster, reserve: ReserveRequirement, index: usize, truth: &AbsenceScenario) -> CachedRepair {
        let cell = {
            let mut map = self.repairs.lock().unwrap_or_else(|p| p.into_inner());
            map.entry((reserve, index)).or_default().clone()
        };
        cell.get_or_init(|| {
            match solve_rerostering(
                self.instance,
                original,
                truth,
                &self.config.controls,
                self.config.reroster_options,
                self.backend,
            ) {
                Ok(res) => {
                    let s = res.roster.solve.expect("solved rosters carry solve info");
                    self.charge(s.wall_time);
                    Ok(Repair {
                        status: s.status,
                        cost: res.costs.total,
                        gap: s.gap,
                        wall_time: s.wall_time,
                        metrics: res.metrics,
                    })
                }
                Err(e) => Err((status_of(&e), e.to_string())),
            }
        })
        .clone()
    }
}

/// Runs the sweep. With `out_dir`, finished tasks are appended to the record
/// log there, tasks already in the log are skipped, and the results CSV,
/// detail CSV and manifest are written at the end.
pub fn run_sweep(
    instance: &ProblemInstance,
    config: &SweepConfig,
    out_dir: Option<&Path>,
    backend: &dyn MipBackend<f64>,
) -> Result<SweepResult, ExperimentError> {
    config.validate()?;
    instance.validate()?;

    // Pilot: the instance must admit a roster without reserves.
    let runner = Runner {
        instance,
        config,
        backend,
        rosters: Mutex::new(HashMap::new()),
        repairs: Mutex::new(HashMap::new()),
        spent_us: AtomicU64::new(0),
        truncated: AtomicBool::new(false),
    };
    if let Err((_, msg)) = runner.roster(ReserveRequirement::zeros(instance.days)) {
        return Err(ExperimentError::Pilot(msg));
    }

    let log = match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
            Some(RecordLog::open(dir.join(LOG_FILE))?)
        }
        None => None,
    };
    let mut rows = match out_dir {
        Some(dir) => read_log(dir.join(LOG_FILE))?,
        None => Vec::new(),
    };
    let done: BTreeSet<(String, usize)> = rows.iter().map(DetailRow::key).collect();

    let policies = policies(config);
    let tasks: Vec<(usize, usize)> = (0..policies.len())
        .flat_map(|p| (0..config.n_scenarios).map(move |s| (p, s)))
        .filter(|&(p, s)| !done.contains(&(policies[p].key(), s)))
        .collect();
    ::log::info!(
        "{} tasks ({} already logged) over {} policies",
        tasks.len(),
        done.len(),
        policies.len()
    );

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    let log_error: Mutex<Option<ExperimentError>> = Mutex::new(None);
    let new_rows: Vec<DetailRow> = pool.install(|| {
        tasks
            .par_iter()
            .filter_map(|&(p, s)| {
                if runner.over_budget() {
                    runner.truncated.store(true, Ordering::Relaxed);
                    return None;
                }
                if log_error.lock().map(|e| e.is_some()).unwrap_or(true) {
                    return None;
                }
                let row = runner.task(p, &policies[p], s);
                if let Some(log) = &log {
                    if let Err(e) = log.append(&row) {
                        *log_error.lock().unwrap_or_else(|p| p.into_inner()) = Some(e);
                        return None;
                    }
                }
                Some(row)
            })
            .collect()
    });
    if let Some(e) = log_error.into_inner().unwrap_or_else(|p| p.into_inner()) {
        return Err(e);
    }
    rows.extend(new_rows);

    let order: HashMap<String, usize> = policies.iter().enumerate().map(|(i, p)| (p.key(), i)).collect();
    rows.retain(|r| order.contains_key(&r.policy.key()) && r.scenario < config.n_scenarios);
    rows.sort_by_key(|r| (order[&r.policy.key()], r.scenario));
    let cells = aggregate_cells(&policies, &rows);
    let truncated = runner.truncated.load(Ordering::Relaxed);
    if truncated {
        ::log::warn!("solver time budget exhausted; results are partial");
    }
    let result = SweepResult {
        config: config.clone(),
        cells,
        details: rows,
        truncated,
    };
    if let Some(dir) = out_dir {
        write_outputs(dir, instance, &result)?;
    }
    Ok(result)
}

fn write_outputs(dir: &Path, instance: &ProblemInstance, result: &SweepResult) -> Result<(), ExperimentError> {
    write_results_csv(dir.join(RESULTS_FILE), &result.cells)?;
    write_detail_csv(dir.join(DETAIL_FILE), &result.details)?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: result.config.clone(),
        employees: instance.n_employees(),
        days: instance.days,
        policies: result.cells.len(),
        tasks: result.cells.len() * result.config.n_scenarios,
        completed: result.details.len(),
        truncated: result.truncated,
    };
    let path: PathBuf = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| ExperimentError::io(&path, e))
}

/// Rebuilds a sweep result from the manifest and record log in `dir`.
pub fn load_sweep(dir: impl AsRef<Path>) -> Result<SweepResult, ExperimentError> {
    let dir = dir.as_ref();
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| ExperimentError::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| ExperimentError::Record {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let policies = policies(&manifest.config);
    let order: HashMap<String, usize> = policies.iter().enumerate().map(|(i, p)| (p.key(), i)).collect();
    let mut rows = read_log(dir.join(LOG_FILE))?;
    rows.retain(|r| order.contains_key(&r.policy.key()) && r.scenario < manifest.config.n_scenarios);
    rows.sort_by_key(|r| (order[&r.policy.key()], r.scenario));
    Ok(SweepResult {
        cells: aggregate_cells(&policies, &rows),
        config: manifest.config,
        details: rows,
        truncated: manifest.truncated,
    })
}

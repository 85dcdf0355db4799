use std::fs;

use rosterlab::experiment::{
    compare_to_baseline, grid, load_sweep, run_sweep, ExperimentError, SweepConfig, SweepResult, TruthMode, DETAIL_FILE,
    LOG_FILE, MANIFEST_FILE, RESULTS_FILE,
};
use rosterlab::{generate_instance, GeneratorConfig, HighsBackend, ProblemInstance, SkillMode};

fn small() -> ProblemInstance {
    generate_instance(&GeneratorConfig::new(6, 7, SkillMode::Uniform), 3).unwrap()
}

fn config() -> SweepConfig {
    SweepConfig {
        tpr_values: grid(0.5),
        rfpr_values: grid(0.5),
        baselines: vec![1, 2],
        n_scenarios: 3,
        rho: 0.1,
        seed: 8,
        record_timing: false,
        ..SweepConfig::default()
    }
}

fn run(config: &SweepConfig, dir: Option<&std::path::Path>) -> SweepResult {
    run_sweep(&small(), config, dir, &HighsBackend::default()).unwrap()
}

#[test]
fn sweep_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let result = run(&config(), Some(dir.path()));
    assert_eq!(result.cells.len(), 9 + 2);
    assert_eq!(result.details.len(), 11 * 3);
    assert!(!result.truncated);
    for f in [RESULTS_FILE, DETAIL_FILE, MANIFEST_FILE, LOG_FILE] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = fs::read_to_string(dir.path().join(RESULTS_FILE)).unwrap();
    let header = csv.lines().next().unwrap();
    for col in [
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
    ] {
        assert!(header.split(',').any(|h| h == col), "missing {col} in {header}");
    }
    assert_eq!(csv.lines().filter(|l| l.starts_with("fixed-")).count(), 2);
    let loaded = load_sweep(dir.path()).unwrap();
    assert_eq!(loaded.cells, result.cells);
    assert_eq!(loaded.details, result.details);
}

#[test]
fn corner_cell_matches_zero_reserve() {
    let mut cfg = config();
    cfg.baselines = vec![0];
    let result = run(&cfg, None);
    let corner = result.cell(0.0, 0.0).unwrap();
    assert_eq!(corner.reserves_per_day, 0.0);
    assert_eq!(corner.rostering_cost, result.baseline(0).unwrap().rostering_cost);
    let fixed = result.baseline(0).unwrap();
    assert_eq!(corner.mean_reroster_cost, fixed.mean_reroster_cost);
}

#[test]
fn resume_skips_finished_tasks_and_tolerates_a_torn_line() {
    let dir = tempfile::tempdir().unwrap();
    let full = run(&config(), Some(dir.path()));
    let results = fs::read(dir.path().join(RESULTS_FILE)).unwrap();

    // Keep half of the log and leave a torn last line behind.
    let log_path = dir.path().join(LOG_FILE);
    let log = fs::read_to_string(&log_path).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    let mut kept = lines[..lines.len() / 2].join("\n");
    kept.push('\n');
    kept.push_str(&lines[lines.len() / 2][..10]);
    fs::write(&log_path, kept).unwrap();
    fs::remove_file(dir.path().join(RESULTS_FILE)).unwrap();

    let resumed = run(&config(), Some(dir.path()));
    assert_eq!(resumed.cells, full.cells);
    assert_eq!(fs::read(dir.path().join(RESULTS_FILE)).unwrap(), results);
    let log = fs::read_to_string(&log_path).unwrap();
    assert_eq!(log.lines().count(), full.details.len());
}

#[test]
fn worker_count_does_not_change_results() {
    let one = run(&config(), None);
    let mut cfg = config();
    cfg.jobs = 3;
    let three = run(&cfg, None);
    assert_eq!(one.cells, three.cells);
    assert_eq!(one.details, three.details);
}

#[test]
fn per_cell_truth_mode_runs() {
    let mut cfg = config();
    cfg.truth_mode = TruthMode::PerCell;
    cfg.tpr_values = vec![0.0, 1.0];
    cfg.rfpr_values = vec![0.0];
    let result = run(&cfg, None);
    assert_eq!(result.cells.len(), 2 + 2);
    // One roster per cell: every scenario row of a cell shares it.
    for cell in result.cells.iter().filter(|c| c.policy == "ml") {
        let rows: Vec<_> = result
            .details
            .iter()
            .filter(|r| r.policy.label() == "ml" && r.policy.key().ends_with(&format!("{}:0", cell.tpr.unwrap())))
            .collect();
        assert!(rows.windows(2).all(|w| w[0].rostering_cost == w[1].rostering_cost));
    }
}

#[test]
fn baseline_comparison() {
    let result = run(&config(), None);
    let grid = compare_to_baseline(&result, 1).unwrap();
    assert_eq!(grid.ratios.len(), 3);
    assert!(grid.ratios.iter().all(|row| row.len() == 3));
    let base = result.baseline(1).unwrap().mean_reroster_cost.unwrap();
    let cell = result.cell(0.5, 0.5).unwrap().mean_reroster_cost.unwrap();
    assert!((grid.ratios[1][1].unwrap() - cell / base).abs() < 1e-12);
    assert!(matches!(compare_to_baseline(&result, 9), Err(ExperimentError::MissingBaseline(9))));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratio.csv");
    grid.write_csv(&path).unwrap();
    assert_eq!(fs::read_to_string(path).unwrap().lines().count(), 1 + 9);
}

#[test]
fn zero_budget_truncates() {
    let mut cfg = config();
    cfg.budget_seconds = Some(0.0);
    let result = run(&cfg, None);
    assert!(result.truncated);
    assert!(result.details.len() < 11 * 3);
}

#[test]
fn invalid_config_is_rejected() {
    let mut cfg = config();
    cfg.tpr_values = vec![1.5];
    assert!(matches!(
        run_sweep(&small(), &cfg, None, &HighsBackend::default()),
        Err(ExperimentError::Config(_))
    ));
}

#[test]
fn infeasible_instance_fails_the_pilot() {
    let mut inst = small();
    inst.employees[0].min_work_days = inst.employees[0].max_work_days;
    for d in 0..inst.days {
        for s in 0..inst.shifts.n_working() {
            inst.undesired.insert((0, d, s));
        }
    }
    assert!(matches!(
        run_sweep(&inst, &config(), None, &HighsBackend::default()),
        Err(ExperimentError::Pilot(_))
    ));
}

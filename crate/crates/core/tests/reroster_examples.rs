mod common;

use common::*;
use rosterlab::reroster::reroster_oracle;
use rosterlab::{
    solve_rerostering, AbsenceScenario, HighsBackend, ProblemInstance, Rational, RerosterOptions, RerosterResult,
    ReserveRequirement, Roster, SolveControls,
};

fn repair(inst: &ProblemInstance, original: &Roster, absent: &[(usize, usize)]) -> RerosterResult {
    let scenario = AbsenceScenario::from_pairs(inst.n_employees(), inst.days, absent, 0);
    let result = solve_rerostering::<f64, f64>(
        inst,
        original,
        &scenario,
        &SolveControls::default(),
        RerosterOptions::default(),
        &HighsBackend::default(),
    )
    .unwrap();
    let exact = reroster_oracle::<Rational, f64>(inst, original, &scenario, RerosterOptions::default())
        .unwrap()
        .cost()
        .expect("oracle finds a repair");
    let exact = *exact.numer() as f64 / *exact.denom() as f64;
    assert!(close(result.costs.total, exact), "solver {} vs oracle {}", result.costs.total, exact);
    assert_eq!(result.changes, result.solver_changes);
    result
}

fn roster(inst: &ProblemInstance, cells: Vec<Option<(usize, usize)>>, reserve: &[u32]) -> Roster {
    Roster::from_assignment(inst, cells.into_iter().map(|c| vec![c]).collect(), ReserveRequirement::new(reserve.to_vec()))
}

#[test]
fn absent_worker_is_replaced_by_reserve() {
    let inst = single_shift(2);
    let r = inst.shifts.reserve();
    let original = roster(&inst, vec![Some((0, 0)), Some((r, 0))], &[1]);
    assert!(close(original.costs.total, 110.0));
    let out = repair(&inst, &original, &[(0, 0)]);
    assert!(close(out.costs.total, 110.0));
    assert!(close(out.costs.change_cost, 10.0));
    assert_eq!(out.roster.assignment[0][0], None);
    assert_eq!(out.roster.assignment[1][0], Some((0, 0)));
    assert_eq!(out.reserve_conversions()[1][0], 1);
    assert_eq!(out.changes.total_shift_changes() + out.changes.total_dayoff_changes(), 0);
    assert!(close(out.metrics.pct_reserves_converted, 1.0));
}

#[test]
fn everyone_absent_pays_understaffing() {
    let inst = single_shift(2);
    let r = inst.shifts.reserve();
    let original = roster(&inst, vec![Some((0, 0)), Some((r, 0))], &[1]);
    let out = repair(&inst, &original, &[(0, 0), (1, 0)]);
    assert!(close(out.costs.total, 500.0));
    assert!(out.roster.assignment.iter().flatten().all(Option::is_none));
    assert_eq!(out.costs.change_cost, 0.0);
}

#[test]
fn no_absences_keeps_the_roster() {
    let inst = single_shift(2);
    let r = inst.shifts.reserve();
    let original = roster(&inst, vec![Some((0, 0)), Some((r, 0))], &[1]);
    let out = repair(&inst, &original, &[]);
    assert_eq!(out.roster.assignment, original.assignment);
    assert_eq!(out.costs.change_cost, 0.0);
    assert!(close(out.costs.total, original.costs.total));
}

#[test]
fn call_in_from_day_off() {
    let inst = single_shift(2);
    let original = roster(&inst, vec![Some((0, 0)), None], &[0]);
    let out = repair(&inst, &original, &[(0, 0)]);
    // wage 100 plus the day-off change at 1.5 * wage
    assert!(close(out.costs.total, 250.0));
    assert_eq!(out.dayoff_changes()[1][0], 1);
    assert_eq!(out.metrics.n_dayoff_changes, 1);
}

#[test]
fn conversion_beats_call_in() {
    let mut inst = single_shift(3);
    inst.employees[2].id = "e2".into();
    let r = inst.shifts.reserve();
    let original = roster(&inst, vec![Some((0, 0)), Some((r, 0)), None], &[1]);
    let out = repair(&inst, &original, &[(0, 0)]);
    assert!(close(out.costs.total, 110.0));
    assert_eq!(out.roster.assignment[1][0], Some((0, 0)));
    assert_eq!(out.roster.assignment[2][0], None);
}

#[test]
fn shift_change_beats_call_in() {
    let emps = (0..3).map(|i| employee(&format!("e{i}"), 100.0, vec![0])).collect();
    let mut inst = instance(emps, 1, 1, catalog(2, &[]));
    inst.demand.insert((0, 0, 0), 1);
    let original = roster(&inst, vec![Some((0, 0)), Some((1, 0)), None], &[0]);
    let out = repair(&inst, &original, &[(0, 0)]);
    // moving e1 costs 100 + 100; calling e2 in would cost 100 + 100 + 150
    assert!(close(out.costs.total, 200.0));
    assert_eq!(out.shift_changes()[1][0], 1);
    assert_eq!(out.roster.assignment[2][0], None);
}

#[test]
fn reserve_cannot_be_released() {
    // Nothing to cover, but a scheduled reserve may not become a day off.
    let mut inst = single_shift(2);
    inst.demand.clear();
    let r = inst.shifts.reserve();
    let original = roster(&inst, vec![None, Some((r, 0))], &[1]);
    let out = repair(&inst, &original, &[]);
    assert_eq!(out.roster.assignment[1][0], Some((r, 0)));
}

#[test]
fn absent_employees_are_not_charged_changes() {
    let inst = single_shift(2);
    let r = inst.shifts.reserve();
    let original = roster(&inst, vec![Some((0, 0)), Some((r, 0))], &[1]);
    let out = repair(&inst, &original, &[(0, 0)]);
    assert_eq!(out.changes.shift_changes[0], vec![0]);
    assert_eq!(out.changes.dayoff_changes[0], vec![0]);
}

#[test]
fn multi_day_repair_matches_oracle() {
    let emps = (0..3)
        .map(|i| {
            let mut e = employee(&format!("e{i}"), [100.0, 70.0, 50.0][i], vec![0]);
            e.max_work_days = 2;
            e.max_consec_work = 2;
            e
        })
        .collect();
    let mut inst = instance(emps, 3, 1, catalog(2, &[(1, 0)]));
    for d in 0..3 {
        inst.demand.insert((d, d % 2, 0), 1);
    }
    let reserve = ReserveRequirement::new(vec![1, 1, 0]);
    let original = rosterlab::solve_rostering::<f64>(
        &inst,
        &reserve,
        &SolveControls::default(),
        Default::default(),
        &HighsBackend::default(),
    )
    .unwrap();
    for absent in [vec![(0, 1)], vec![(1, 0), (1, 1)], vec![(2, 2)], vec![(0, 0), (2, 1)]] {
        repair(&inst, &original, &absent);
    }
}

#[test]
fn repair_file_serializes_changes() {
    use rosterlab::reroster::RerosterFile;
    let inst = single_shift(2);
    let r = inst.shifts.reserve();
    let original = roster(&inst, vec![Some((0, 0)), Some((r, 0))], &[1]);
    let out = repair(&inst, &original, &[(0, 0)]);
    let json = RerosterFile::from_result(&inst, &out).to_json();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(value["changes"].as_array().is_some_and(|c| !c.is_empty()));
    assert!(value["metrics"]["pct_reserves_converted"].as_f64().is_some());
}

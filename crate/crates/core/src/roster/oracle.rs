//! Exhaustive reference solver for tiny instances.
//!
//! Every per-day choice (off, or any shift with any qualified skill) is
//! enumerated per employee and filtered by the direct constraint checker.
//! Employees are then combined by an exact dynamic program over coverage
//! counts, capped at the demand, so the search is exhaustive without
//! materialising the full product. Slack costs are evaluated in closed form.

use std::collections::BTreeMap;

use crate::absence::ReserveRequirement;
use crate::instance::ProblemInstance;
use crate::scalar::Scalar;

use super::check::{employee_conversion_violations, employee_violations, CheckOptions, DayPlan};
use super::{Assignment, RosterError, RosterOptions};

pub const ORACLE_MAX_EMPLOYEES: usize = 3;
pub const ORACLE_MAX_DAYS: usize = 3;
pub const ORACLE_MAX_WORKING_SHIFTS: usize = 2;
pub const ORACLE_MAX_SKILLS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome<T> {
    Optimal { cost: T, assignment: Assignment },
    Infeasible,
}

impl<T: Copy> OracleOutcome<T> {
    pub fn cost(&self) -> Option<T> {
        match self {
            OracleOutcome::Optimal { cost, .. } => Some(*cost),
            OracleOutcome::Infeasible => None,
        }
    }
}

/// One candidate row for one employee: the full period plan and the part of
/// the objective that depends on that employee alone.
#[derive(Debug, Clone)]
pub(crate) struct Row<T> {
    pub plan: Vec<Option<(usize, usize)>>,
    pub cost: T,
}

pub(crate) fn oracle_guard(instance: &ProblemInstance) -> Result<(), RosterError> {
    let checks = [
        ("employees", instance.n_employees(), ORACLE_MAX_EMPLOYEES),
        ("days", instance.days, ORACLE_MAX_DAYS),
        ("working shifts", instance.shifts.n_working(), ORACLE_MAX_WORKING_SHIFTS),
        ("skills", instance.skills.len(), ORACLE_MAX_SKILLS),
    ];
    for (what, got, max) in checks {
        if got > max {
            return Err(RosterError::TooLargeForOracle(format!("{got} {what} (at most {max})")));
        }
    }
    Ok(())
}

/// All plans of employee `n`, one entry per day.
pub(crate) fn enumerate_plans(instance: &ProblemInstance, n: usize) -> Vec<Vec<Option<(usize, usize)>>> {
    let mut options = vec![None];
    for s in 0..instance.shifts.n_shifts() {
        for &k in &instance.employees[n].skills {
            options.push(Some((s, k)));
        }
    }
    let mut plans = vec![Vec::with_capacity(instance.days)];
    for _ in 0..instance.days {
        plans = plans
            .into_iter()
            .flat_map(|p| {
                options.iter().map(move |&o| {
                    let mut q = p.clone();
                    q.push(o);
                    q
                })
            })
            .collect();
    }
    plans
}

pub(crate) fn as_day_plans(plan: &[Option<(usize, usize)>]) -> Vec<DayPlan> {
    plan.iter().map(|a| a.iter().copied().collect()).collect()
}

/// Wages, reserve wages and overtime of one employee under `plan`.
pub(crate) fn employee_cost<T: Scalar>(instance: &ProblemInstance, n: usize, plan: &[Option<(usize, usize)>]) -> T {
    let e = &instance.employees[n];
    let mut cost = T::zero();
    let mut worked = 0u32;
    for &(s, _) in plan.iter().flatten() {
        if instance.shifts.is_working(s) {
            worked += 1;
            cost = cost + T::from_data(e.wage);
        } else {
            cost = cost + T::from_data(e.reserve_wage);
        }
    }
    cost + T::from_u32(worked.saturating_sub(e.max_work_days)).unwrap() * T::from_data(e.overtime_wage)
}

/// Exact minimum over one row per employee of row costs plus closed-form
/// understaffing and reserve-shortfall penalties.
pub(crate) fn combine_rows<T: Scalar>(
    instance: &ProblemInstance,
    rows: &[Vec<Row<T>>],
    reserve: &ReserveRequirement,
) -> Option<(T, Assignment)> {
    let keys: Vec<((usize, usize, usize), u32)> = instance
        .demand
        .iter()
        .filter(|(_, &m)| m > 0)
        .map(|(&k, &m)| (k, m))
        .collect();
    let reserve_shift = instance.shifts.reserve();
    let width = keys.len() + instance.days;
    let caps: Vec<u32> = keys.iter().map(|&(_, m)| m).chain(reserve.per_day.iter().copied()).collect();

    let mut states: BTreeMap<Vec<u32>, (T, Vec<usize>)> = BTreeMap::new();
    states.insert(vec![0; width], (T::zero(), Vec::new()));
    for employee_rows in rows {
        let mut next: BTreeMap<Vec<u32>, (T, Vec<usize>)> = BTreeMap::new();
        for (state, (cost, picks)) in &states {
            for (i, row) in employee_rows.iter().enumerate() {
                let mut s = state.clone();
                for (d, a) in row.plan.iter().enumerate() {
                    let Some((shift, skill)) = *a else { continue };
                    let slot = if shift == reserve_shift {
                        Some(keys.len() + d)
                    } else {
                        keys.iter().position(|&(k, _)| k == (d, shift, skill))
                    };
                    if let Some(j) = slot {
                        s[j] = (s[j] + 1).min(caps[j]);
                    }
                }
                let c = *cost + row.cost;
                match next.get(&s) {
                    Some((best, _)) if *best <= c => {}
                    _ => {
                        let mut p = picks.clone();
                        p.push(i);
                        next.insert(s, (c, p));
                    }
                }
            }
        }
        states = next;
    }

    let understaff = T::from_data(instance.understaff_cost);
    let shortfall = T::from_data(instance.reserve_shortfall_penalty);
    let mut best: Option<(T, Vec<usize>)> = None;
    for (state, (cost, picks)) in states {
        let mut total = cost;
        for (j, &cap) in caps.iter().enumerate() {
            let missing = T::from_u32(cap - state[j]).unwrap();
            total = total + missing * if j < keys.len() { understaff } else { shortfall };
        }
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, picks));
        }
    }
    best.map(|(cost, picks)| {
        let assignment = picks.iter().enumerate().map(|(n, &i)| rows[n][i].plan.clone()).collect();
        (cost, assignment)
    })
}

/// Optimal robust rostering cost by exhaustive enumeration.
///
/// Only defined for instances within the `ORACLE_MAX_*` limits.
pub fn oracle_enumerate<T: Scalar>(
    instance: &ProblemInstance,
    reserve: &ReserveRequirement,
    options: RosterOptions,
) -> Result<OracleOutcome<T>, RosterError> {
    instance.validate()?;
    reserve.check(instance.days, instance.n_employees())?;
    oracle_guard(instance)?;
    let mut rows = Vec::with_capacity(instance.n_employees());
    for n in 0..instance.n_employees() {
        let feasible: Vec<Row<T>> = enumerate_plans(instance, n)
            .into_iter()
            .filter(|plan| {
                let days = as_day_plans(plan);
                employee_violations(instance, n, &days, CheckOptions::default()).is_empty()
                    && (!options.conversion_guard || employee_conversion_violations(instance, n, &days).is_empty())
            })
            .map(|plan| Row {
                cost: employee_cost(instance, n, &plan),
                plan,
            })
            .collect();
        if feasible.is_empty() {
            return Ok(OracleOutcome::Infeasible);
        }
        rows.push(feasible);
    }
    Ok(match combine_rows(instance, &rows, reserve) {
        Some((cost, assignment)) => OracleOutcome::Optimal { cost, assignment },
        None => OracleOutcome::Infeasible,
    })
}

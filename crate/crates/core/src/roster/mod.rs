//! Robust rostering: model construction, solving, cost decomposition,
//! conversion safety and an exhaustive reference solver.

pub mod check;
mod model;
mod oracle;
mod serial;
mod start;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::absence::ReserveRequirement;
use crate::instance::{InstanceError, ProblemInstance};
use crate::mip::{MipError, SolveStatus};
use crate::scalar::Scalar;

pub use self::check::{ConversionViolation, DayPlan, Violation, ViolationKind};
pub use self::model::{build_rostering_model, solve_rostering, solve_rostering_from, RosterModel, RosterOptions, RosterVars};
pub(crate) use self::model::{build_base, check_objective, extract_outcome, BaseOptions};
pub use self::oracle::{oracle_enumerate, OracleOutcome, ORACLE_MAX_DAYS, ORACLE_MAX_EMPLOYEES, ORACLE_MAX_SKILLS, ORACLE_MAX_WORKING_SHIFTS};
pub(crate) use self::oracle::{as_day_plans, combine_rows, employee_cost, enumerate_plans, oracle_guard, Row};
pub use self::serial::{AssignmentEntry, RosterFile, SlackFile};
pub use self::start::with_reserves;

/// `assignment[n][d]` is the `(shift, skill)` held by employee `n` on day
/// `d`, if any.
pub type Assignment = Vec<Vec<Option<(usize, usize)>>>;

#[derive(Debug, Error)]
pub enum RosterError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Mip(#[from] MipError),
    #[error("model is infeasible")]
    Infeasible,
    #[error("solver stopped with status {0} and no incumbent")]
    NoSolution(SolveStatus),
    #[error("solver objective {solver} disagrees with recomputed cost {recomputed}")]
    CostMismatch { solver: f64, recomputed: f64 },
    #[error("instance too large for enumeration: {0}")]
    TooLargeForOracle(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown<T> {
    pub wages: T,
    pub overtime_cost: T,
    pub understaff_cost: T,
    pub reserve_wages: T,
    pub shortfall_penalty: T,
    pub total: T,
}

impl<T: Scalar> CostBreakdown<T> {
    pub fn zero() -> Self {
        Self {
            wages: T::zero(),
            overtime_cost: T::zero(),
            understaff_cost: T::zero(),
            reserve_wages: T::zero(),
            shortfall_penalty: T::zero(),
            total: T::zero(),
        }
    }
}

/// Slack values implied by an assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Slacks<T> {
    /// Days worked beyond the maximum, per employee.
    pub overtime: Vec<T>,
    /// Missing staff per demanded `(day, shift, skill)`.
    pub understaffing: BTreeMap<(usize, usize, usize), T>,
    /// Missing reserve shifts per day.
    pub reserve_shortfall: Vec<T>,
}

/// Solver statistics attached to a solved roster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveInfo {
    pub status: SolveStatus,
    pub objective: f64,
    pub gap: Option<f64>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Roster<T = f64> {
    pub assignment: Assignment,
    pub overtime: Vec<T>,
    pub understaffing: BTreeMap<(usize, usize, usize), T>,
    pub reserve_shortfall: Vec<T>,
    pub costs: CostBreakdown<T>,
    /// Requirement the costs were computed against.
    pub reserve: ReserveRequirement,
    pub solve: Option<SolveInfo>,
}

impl<T: Scalar> Roster<T> {
    /// Builds a roster from an assignment, computing slacks and costs.
    pub fn from_assignment(instance: &ProblemInstance, assignment: Assignment, reserve: ReserveRequirement) -> Self {
        let (costs, slacks) = evaluate_assignment(instance, &assignment, &reserve);
        Self {
            assignment,
            overtime: slacks.overtime,
            understaffing: slacks.understaffing,
            reserve_shortfall: slacks.reserve_shortfall,
            costs,
            reserve,
            solve: None,
        }
    }

    pub fn employees(&self) -> usize {
        self.assignment.len()
    }

    pub fn days(&self) -> usize {
        self.assignment.first().map_or(0, Vec::len)
    }

    pub fn get(&self, n: usize, d: usize) -> Option<(usize, usize)> {
        self.assignment[n][d]
    }

    /// Reserve shifts scheduled on each day.
    pub fn reserves_per_day(&self, instance: &ProblemInstance) -> Vec<u32> {
        count_reserves(instance, &self.assignment)
    }

    pub fn total_reserves(&self, instance: &ProblemInstance) -> u32 {
        self.reserves_per_day(instance).iter().sum()
    }

    pub fn plans(&self) -> Vec<Vec<DayPlan>> {
        to_plans(&self.assignment)
    }

    /// Converts the scalar type of all cost fields.
    pub fn to_f64(&self) -> Roster<f64> {
        let c = &self.costs;
        Roster {
            assignment: self.assignment.clone(),
            overtime: self.overtime.iter().map(|v| v.to_f64_lossy()).collect(),
            understaffing: self.understaffing.iter().map(|(&k, v)| (k, v.to_f64_lossy())).collect(),
            reserve_shortfall: self.reserve_shortfall.iter().map(|v| v.to_f64_lossy()).collect(),
            costs: CostBreakdown {
                wages: c.wages.to_f64_lossy(),
                overtime_cost: c.overtime_cost.to_f64_lossy(),
                understaff_cost: c.understaff_cost.to_f64_lossy(),
                reserve_wages: c.reserve_wages.to_f64_lossy(),
                shortfall_penalty: c.shortfall_penalty.to_f64_lossy(),
                total: c.total.to_f64_lossy(),
            },
            reserve: self.reserve.clone(),
            solve: self.solve,
        }
    }
}

pub(crate) fn to_plans(assignment: &Assignment) -> Vec<Vec<DayPlan>> {
    assignment
        .iter()
        .map(|row| row.iter().map(|a| a.iter().copied().collect()).collect())
        .collect()
}

pub(crate) fn count_reserves(instance: &ProblemInstance, assignment: &Assignment) -> Vec<u32> {
    let reserve = instance.shifts.reserve();
    let mut out = vec![0; instance.days];
    for row in assignment {
        for (d, a) in row.iter().enumerate() {
            if matches!(a, Some((s, _)) if *s == reserve) {
                out[d] += 1;
            }
        }
    }
    out
}

/// Recomputes the robust rostering objective and its slacks directly from an
/// assignment, with each slack at its smallest feasible value.
pub fn evaluate_assignment<T: Scalar>(
    instance: &ProblemInstance,
    assignment: &Assignment,
    reserve: &ReserveRequirement,
) -> (CostBreakdown<T>, Slacks<T>) {
    let shifts = &instance.shifts;
    let mut costs = CostBreakdown::zero();
    let mut overtime = Vec::with_capacity(instance.n_employees());
    let mut covered: BTreeMap<(usize, usize, usize), u32> = BTreeMap::new();
    for (n, row) in assignment.iter().enumerate() {
        let e = &instance.employees[n];
        let mut worked = 0u32;
        for (d, a) in row.iter().enumerate() {
            let Some((s, k)) = *a else { continue };
            if shifts.is_working(s) {
                worked += 1;
                costs.wages = costs.wages + T::from_data(e.wage);
                *covered.entry((d, s, k)).or_insert(0) += 1;
            } else {
                costs.reserve_wages = costs.reserve_wages + T::from_data(e.reserve_wage);
            }
        }
        let over = T::from_u32(worked.saturating_sub(e.max_work_days)).unwrap();
        costs.overtime_cost = costs.overtime_cost + over * T::from_data(e.overtime_wage);
        overtime.push(over);
    }
    let mut understaffing = BTreeMap::new();
    for (&key, &m) in &instance.demand {
        if m == 0 {
            continue;
        }
        let short = T::from_u32(m.saturating_sub(covered.get(&key).copied().unwrap_or(0))).unwrap();
        costs.understaff_cost = costs.understaff_cost + short * T::from_data(instance.understaff_cost);
        understaffing.insert(key, short);
    }
    let reserves = count_reserves(instance, assignment);
    let reserve_shortfall: Vec<T> = reserve
        .per_day
        .iter()
        .zip(&reserves)
        .map(|(&c, &r)| T::from_u32(c.saturating_sub(r)).unwrap())
        .collect();
    for &v in &reserve_shortfall {
        costs.shortfall_penalty = costs.shortfall_penalty + v * T::from_data(instance.reserve_shortfall_penalty);
    }
    costs.total = costs.wages + costs.overtime_cost + costs.understaff_cost + costs.reserve_wages + costs.shortfall_penalty;
    (
        costs,
        Slacks {
            overtime,
            understaffing,
            reserve_shortfall,
        },
    )
}

/// Hard-constraint violations of a roster.
pub fn check_roster(instance: &ProblemInstance, roster: &Roster<impl Scalar>) -> Vec<Violation> {
    check::plan_violations(instance, &roster.plans())
}

/// Converts every reserve shift in turn into every working shift and
/// qualified skill and reports hard-constraint violations this introduces.
/// Working-day totals are not re-checked: a conversion only adds working
/// days, and overtime is soft.
pub fn check_conversion_safety(instance: &ProblemInstance, roster: &Roster<impl Scalar>) -> Vec<ConversionViolation> {
    check::plan_conversion_violations(instance, &roster.plans())
}

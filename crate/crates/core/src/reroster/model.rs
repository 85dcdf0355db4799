use std::collections::BTreeMap;

use crate::absence::{AbsenceScenario, ReserveRequirement};
use crate::instance::{InstanceError, ProblemInstance};
use crate::mip::{complete_start, ConstraintSense, LinExpr, MipBackend, MipModel, SolveControls, VarId, VarKind};
use crate::roster::{build_base, check_objective, extract_outcome, BaseOptions, Roster, RosterError, RosterModel, RosterVars};
use crate::scalar::Scalar;

use super::{count_changes, metrics, ChangeCounts, RerosterCosts, RerosterResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct RerosterOptions {
    /// Keep the original per-day reserve requirement (and its shortfall
    /// penalty) in the repair objective. Off by default: the requirement is
    /// zero during repair.
    pub keep_reserve_requirement: bool,
}

pub struct RerosterModel<T> {
    pub model: MipModel<T>,
    pub vars: RosterVars,
    pub v2: BTreeMap<(usize, usize), VarId>,
    pub v3: BTreeMap<(usize, usize), VarId>,
    pub v4: BTreeMap<(usize, usize), VarId>,
    /// Requirement used in the repair objective.
    pub reserve: ReserveRequirement,
}

impl<T: Scalar> RerosterModel<T> {
    fn solver_changes(&self, employees: usize, days: usize, values: &[T]) -> ChangeCounts {
        let mut out = ChangeCounts::zeros(employees, days);
        let read = |m: &BTreeMap<(usize, usize), VarId>, target: &mut Vec<Vec<u32>>| {
            for (&(n, d), v) in m {
                target[n][d] = values[v.0].to_f64_lossy().round().max(0.0) as u32;
            }
        };
        read(&self.v2, &mut out.shift_changes);
        read(&self.v3, &mut out.reserve_conversions);
        read(&self.v4, &mut out.dayoff_changes);
        out
    }
}

fn check_dimensions<O: Scalar>(instance: &ProblemInstance, original: &Roster<O>) -> Result<(), InstanceError> {
    if original.employees() != instance.n_employees() || original.assignment.iter().any(|r| r.len() != instance.days) {
        return Err(InstanceError::semantic(
            "original",
            format!("expected a {}x{} roster", instance.n_employees(), instance.days),
        ));
    }
    Ok(())
}

/// Builds the repair model for `original` under `scenario`.
pub fn build_rerostering_model<T: Scalar, O: Scalar>(
    instance: &ProblemInstance,
    original: &Roster<O>,
    scenario: &AbsenceScenario,
    options: RerosterOptions,
) -> Result<RerosterModel<T>, RosterError> {
    check_dimensions(instance, original)?;
    let reserve = if options.keep_reserve_requirement {
        original.reserve.clone()
    } else {
        ReserveRequirement::zeros(instance.days)
    };
    let RosterModel { model: mut m, vars } = build_base::<T>(
        instance,
        &reserve,
        BaseOptions {
            conversion_guard: false,
            absences: Some(scenario),
        },
    )?;
    let cat = &instance.shifts;
    let r = cat.reserve();
    let n_shifts = cat.n_shifts();
    let int = |v: i64| T::from_i64(v).unwrap();
    let (mut v2, mut v3, mut v4) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    // Start: the original roster minus absent days, with no changes.
    let mut y1_start = Vec::new();

    for (n, e) in instance.employees.iter().enumerate() {
        if scenario.has_absence(n) {
            continue;
        }
        for d in 0..instance.days {
            let held = original.assignment[n][d].map(|a| a.0);
            let c = |s: usize| i64::from(held == Some(s));
            let c_res = c(r);
            let c_work = i64::from(held.is_some_and(|s| cat.is_working(s)));
            let c_all = i64::from(held.is_some());
            let x_of = |s: usize| -> Vec<VarId> { e.skills.iter().filter_map(|&k| vars.x(n, d, s, k)).collect() };
            let x_sum = |shifts: &mut dyn Iterator<Item = usize>| -> LinExpr<T> {
                shifts.flat_map(x_of).map(|v| (v, T::one())).collect()
            };

            let mut y2s = Vec::with_capacity(n_shifts);
            for s in 0..n_shifts {
                let y1 = m.add_binary(format!("y1[{n},{d},{s}]"))?;
                let y2 = m.add_binary(format!("y2[{n},{d},{s}]"))?;
                if c(s) == 1 {
                    y1_start.push(y1);
                }
                let mut held_either = x_sum(&mut std::iter::once(s));
                held_either.add(y1, int(-2));
                m.add_constraint(format!("change_any[{n},{d},{s}]"), held_either, ConstraintSense::Le, int(-c(s)))?;
                let mut differs = x_sum(&mut std::iter::once(s));
                differs.add(y2, T::one()).add(y1, int(-2));
                m.add_constraint(format!("change_diff[{n},{d},{s}]"), differs, ConstraintSense::Ge, int(-c(s)))?;
                y2s.push(y2);
            }
            let y3 = m.add_binary(format!("y3[{n},{d}]"))?;
            let mut any: LinExpr<T> = y2s.iter().map(|&v| (v, T::one())).collect();
            any.add(y3, int(-2));
            m.add_constraint(format!("change_day[{n},{d}]"), any, ConstraintSense::Le, T::zero())?;

            let a = m.add_var(format!("v2[{n},{d}]"), VarKind::Integer)?;
            let b = m.add_var(format!("v3[{n},{d}]"), VarKind::Integer)?;
            let o = m.add_var(format!("v4[{n},{d}]"), VarKind::Integer)?;
            m.add_objective_term(a, T::from_data(e.change_cost_shift));
            m.add_objective_term(b, T::from_data(e.change_cost_reserve));
            m.add_objective_term(o, T::from_data(e.change_cost_dayoff));

            let mut shift_change = x_sum(&mut (0..cat.n_working()));
            shift_change.add(a, -T::one()).add(y3, T::one());
            m.add_constraint(format!("shift_change[{n},{d}]"), shift_change, ConstraintSense::Le, int(2 - c_work))?;

            let mut conversion = x_sum(&mut (0..n_shifts));
            conversion.add(b, -T::one()).add(y3, T::one());
            m.add_constraint(format!("reserve_conversion[{n},{d}]"), conversion, ConstraintSense::Le, int(2 - c_res))?;

            let mut dayoff = x_sum(&mut (0..cat.n_working()));
            dayoff.add(o, T::one()).add(y3, int(-2));
            m.add_constraint(format!("dayoff_change[{n},{d}]"), dayoff, ConstraintSense::Ge, int(-2 * c_res - c_all))?;

            if c_res == 1 {
                m.add_constraint(format!("keep_reserve[{n},{d}]"), x_sum(&mut (0..n_shifts)), ConstraintSense::Ge, T::one())?;
            }
            v2.insert((n, d), a);
            v3.insert((n, d), b);
            v4.insert((n, d), o);
        }
    }
    m.name = "rerostering".into();

    let kept: Vec<Vec<Option<(usize, usize)>>> = original
        .assignment
        .iter()
        .enumerate()
        .map(|(n, row)| (0..instance.days).map(|d| row[d].filter(|_| !scenario.is_absent(n, d))).collect())
        .collect();
    let mut start = vec![T::zero(); m.variables().len()];
    vars.write_assignment(&kept, &mut start);
    for y in y1_start {
        start[y.0] = T::one();
    }
    match complete_start(&m, &start) {
        Some(values) => m.set_start(values),
        None => log::debug!("repair start rejected by the model"),
    }
    Ok(RerosterModel {
        model: m,
        vars,
        v2,
        v3,
        v4,
        reserve,
    })
}

/// Repairs `original` after `scenario`, returning the repaired roster, the
/// change counts and the repair cost. Costs and change counts are recomputed
/// from the assignments and checked against the solver objective.
pub fn solve_rerostering<T: Scalar, O: Scalar>(
    instance: &ProblemInstance,
    original: &Roster<O>,
    scenario: &AbsenceScenario,
    controls: &SolveControls,
    options: RerosterOptions,
    backend: &dyn MipBackend<T>,
) -> Result<RerosterResult<T>, RosterError> {
    let built = build_rerostering_model::<T, O>(instance, original, scenario, options)?;
    built.model.validate()?;
    let outcome = backend.solve(&built.model, controls)?;
    let (roster, values) = extract_outcome(instance, &built.model, &built.vars, &built.reserve, &outcome)?;
    let original_t = Roster::<T>::from_assignment(instance, original.assignment.clone(), original.reserve.clone());
    let changes = count_changes(instance, &original_t, &roster, scenario);
    let change_cost: T = changes.cost(instance);
    let total = roster.costs.total + change_cost;
    check_objective(roster.solve.map_or(0.0, |s| s.objective), total.to_f64_lossy())?;
    let solver_changes = built.solver_changes(instance.n_employees(), instance.days, &values);
    let metrics = metrics(instance, &original_t, &changes);
    Ok(RerosterResult {
        costs: RerosterCosts {
            base_cost: roster.costs,
            change_cost,
            total,
        },
        roster,
        changes,
        solver_changes,
        metrics,
    })
}

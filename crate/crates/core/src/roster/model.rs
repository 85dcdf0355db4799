//! Rostering model construction.
//!
//! Variable names are stable: `x[n,d,s,k]` (the reserve shift has index
//! `|S_w|`), `v5[n]`, `v6[d,s,k]` and `vr[d]`.

use std::collections::BTreeMap;

use crate::absence::{AbsenceScenario, ReserveRequirement};
use crate::instance::ProblemInstance;
use crate::mip::{complete_start, ConstraintSense, LinExpr, MipBackend, MipError, MipModel, SolveControls, SolveStatus, VarId};
use crate::scalar::Scalar;

use super::{Assignment, Roster, RosterError, SolveInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RosterOptions {
    /// Adds constraints that keep every single reserve conversion free of
    /// forbidden successions, night-run violations and undesired shifts.
    pub conversion_guard: bool,
}

impl Default for RosterOptions {
    fn default() -> Self {
        Self { conversion_guard: true }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct BaseOptions<'a> {
    pub conversion_guard: bool,
    pub absences: Option<&'a AbsenceScenario>,
}

/// Variable handles of a rostering model.
#[derive(Debug, Clone)]
pub struct RosterVars {
    days: usize,
    shifts: usize,
    skills: usize,
    x: Vec<Option<VarId>>,
    pub v5: Vec<VarId>,
    pub v6: BTreeMap<(usize, usize, usize), VarId>,
    pub vr: Vec<VarId>,
}

impl RosterVars {
    pub fn x(&self, n: usize, d: usize, s: usize, k: usize) -> Option<VarId> {
        self.x[((n * self.days + d) * self.shifts + s) * self.skills + k]
    }

    /// Reads the assignment back from a solution vector.
    pub fn assignment<T: Scalar>(&self, values: &[T]) -> Assignment {
        let employees = self.x.len() / (self.days * self.shifts * self.skills).max(1);
        let half = T::from_data(0.5);
        (0..employees)
            .map(|n| {
                (0..self.days)
                    .map(|d| {
                        (0..self.shifts).find_map(|s| {
                            (0..self.skills).find_map(|k| self.x(n, d, s, k).filter(|v| values[v.0] > half).map(|_| (s, k)))
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Writes the `x` values of `assignment` into `values`. Cells without a
    /// matching variable are skipped.
    pub fn write_assignment<T: Scalar>(&self, assignment: &Assignment, values: &mut [T]) {
        for (n, row) in assignment.iter().enumerate() {
            for (d, cell) in row.iter().enumerate() {
                if let Some(v) = cell.and_then(|(s, k)| self.x(n, d, s, k)) {
                    values[v.0] = T::one();
                }
            }
        }
    }
}

pub struct RosterModel<T> {
    pub model: MipModel<T>,
    pub vars: RosterVars,
}

fn sum<T: Scalar>(ids: impl IntoIterator<Item = VarId>) -> LinExpr<T> {
    ids.into_iter().map(|v| (v, T::one())).collect()
}

/// Builds the robust rostering model for `reserve`.
pub fn build_rostering_model<T: Scalar>(
    instance: &ProblemInstance,
    reserve: &ReserveRequirement,
    options: RosterOptions,
) -> Result<RosterModel<T>, RosterError> {
    build_base(
        instance,
        reserve,
        BaseOptions {
            conversion_guard: options.conversion_guard,
            absences: None,
        },
    )
}

/// Shared constraint set of the rostering and rerostering models. With
/// `absences`, absent days admit no assignment and the minimum working days
/// drop by the number of absence days.
pub(crate) fn build_base<T: Scalar>(
    instance: &ProblemInstance,
    reserve: &ReserveRequirement,
    opts: BaseOptions<'_>,
) -> Result<RosterModel<T>, RosterError> {
    instance.validate()?;
    reserve.check(instance.days, instance.n_employees())?;
    if let Some(a) = opts.absences {
        a.check(instance.n_employees(), instance.days)?;
    }
    let n_emp = instance.n_employees();
    let days = instance.days;
    let cat = &instance.shifts;
    let n_shifts = cat.n_shifts();
    let n_skills = instance.skills.len();
    let r = cat.reserve();
    let night = cat.night();
    let data = |v: f64| T::from_data(v);
    let int = |v: u32| T::from_u32(v).unwrap();

    let mut m = MipModel::new("rostering");
    let mut x = vec![None; n_emp * days * n_shifts * n_skills];
    for (n, e) in instance.employees.iter().enumerate() {
        for d in 0..days {
            for s in 0..n_shifts {
                for &k in &e.skills {
                    let id = m.add_binary(format!("x[{n},{d},{s},{k}]"))?;
                    m.add_objective_term(id, data(if s == r { e.reserve_wage } else { e.wage }));
                    x[((n * days + d) * n_shifts + s) * n_skills + k] = Some(id);
                }
            }
        }
    }
    let mut v5 = Vec::with_capacity(n_emp);
    for (n, e) in instance.employees.iter().enumerate() {
        let id = m.add_continuous(format!("v5[{n}]"))?;
        m.add_objective_term(id, data(e.overtime_wage));
        v5.push(id);
    }
    let mut v6 = BTreeMap::new();
    for (&(d, s, k), &req) in &instance.demand {
        if req > 0 {
            let id = m.add_continuous(format!("v6[{d},{s},{k}]"))?;
            m.add_objective_term(id, data(instance.understaff_cost));
            v6.insert((d, s, k), id);
        }
    }
    let mut vr = Vec::with_capacity(days);
    for d in 0..days {
        let id = m.add_continuous(format!("vr[{d}]"))?;
        m.add_objective_term(id, data(instance.reserve_shortfall_penalty));
        vr.push(id);
    }
    let vars = RosterVars {
        days,
        shifts: n_shifts,
        skills: n_skills,
        x,
        v5,
        v6,
        vr,
    };

    // Every x variable of employee n on day d for the given shifts.
    let xs = |n: usize, d: usize, shifts: &[usize]| -> Vec<VarId> {
        let mut out = Vec::new();
        for &s in shifts {
            for &k in &instance.employees[n].skills {
                out.extend(vars.x(n, d, s, k));
            }
        }
        out
    };
    let all: Vec<usize> = (0..n_shifts).collect();
    let working: Vec<usize> = (0..cat.n_working()).collect();
    let le = ConstraintSense::Le;

    for n in 0..n_emp {
        for d in 0..days {
            let absent = opts.absences.is_some_and(|a| a.is_absent(n, d));
            m.add_constraint(format!("one_shift[{n},{d}]"), sum(xs(n, d, &all)), le, int(u32::from(!absent)))?;
        }
    }

    for (&(d, s, k), &id) in &vars.v6 {
        let mut expr: LinExpr<T> = sum((0..n_emp).filter_map(|n| vars.x(n, d, s, k)));
        expr.add(id, T::one());
        m.add_constraint(format!("demand[{d},{s},{k}]"), expr, ConstraintSense::Ge, int(instance.demand[&(d, s, k)]))?;
    }

    for n in 0..n_emp {
        let e = &instance.employees[n];
        for &(s1, s2) in cat.forbidden() {
            for d in 1..days {
                let mut ids = xs(n, d - 1, &[s1]);
                ids.extend(xs(n, d, &[s2]));
                m.add_constraint(format!("succession[{n},{d},{s1},{s2}]"), sum(ids), le, T::one())?;
            }
            if instance.history_shift(n, 1) == Some(s1) {
                m.add_constraint(format!("succession_hist[{n},{s1},{s2}]"), sum(xs(n, 0, &[s2])), le, T::zero())?;
            }
        }

        add_windows(&mut m, instance, n, e.max_consec_work, &all, "max_consec", &xs, |s| s.is_some())?;
        add_windows(&mut m, instance, n, e.max_consec_nights, &[night], "max_nights", &xs, |s| s == Some(night))?;

        for d in 0..days {
            for s in 0..n_shifts {
                if instance.is_undesired(n, d, s) {
                    m.add_constraint(format!("undesired[{n},{d},{s}]"), sum(xs(n, d, &[s])), le, T::zero())?;
                }
            }
        }

        let work_all: Vec<VarId> = (0..days).flat_map(|d| xs(n, d, &working)).collect();
        let relief = opts.absences.map_or(0, |a| a.absence_days(n) as u32);
        let min_days = e.min_work_days.saturating_sub(relief);
        if min_days > 0 {
            m.add_constraint(format!("min_days[{n}]"), sum(work_all.iter().copied()), ConstraintSense::Ge, int(min_days))?;
        }
        let mut expr: LinExpr<T> = sum(work_all);
        expr.add(vars.v5[n], -T::one());
        m.add_constraint(format!("max_days[{n}]"), expr, le, int(e.max_work_days))?;

        let res_all: Vec<VarId> = (0..days).flat_map(|d| xs(n, d, &[r])).collect();
        m.add_constraint(format!("reserve_cap[{n}]"), sum(res_all), le, int(e.max_reserve_shifts))?;
    }

    for d in 0..days {
        let mut expr: LinExpr<T> = sum((0..n_emp).flat_map(|n| xs(n, d, &[r])));
        expr.add(vars.vr[d], T::one());
        m.add_constraint(format!("reserve_req[{d}]"), expr, ConstraintSense::Ge, int(reserve.per_day[d]))?;
    }

    if opts.conversion_guard {
        add_conversion_guard(&mut m, instance, &xs)?;
    }

    Ok(RosterModel { model: m, vars })
}

/// Rolling windows of `limit + 1` days over the period, plus every window
/// that straddles the period start.
#[allow(clippy::too_many_arguments)]
fn add_windows<T: Scalar>(
    m: &mut MipModel<T>,
    instance: &ProblemInstance,
    n: usize,
    limit: u32,
    shifts: &[usize],
    name: &str,
    xs: &dyn Fn(usize, usize, &[usize]) -> Vec<VarId>,
    counts: impl Fn(Option<usize>) -> bool,
) -> Result<(), MipError> {
    let days = instance.days;
    let len = limit as usize + 1;
    let rhs = |v: usize| T::from_usize(v).unwrap();
    if len <= days {
        for d in 0..=days - len {
            let ids: Vec<VarId> = (d..d + len).flat_map(|t| xs(n, t, shifts)).collect();
            m.add_constraint(format!("{name}[{n},{d}]"), sum(ids), ConstraintSense::Le, rhs(limit as usize))?;
        }
    }
    // Window covering history days -(limit - delta) ..= -1 and days 0 ..= delta.
    for delta in 0..(limit as usize).min(days) {
        let hist_days = limit as usize - delta;
        let used = (1..=hist_days).filter(|&b| counts(instance.history_shift(n, b))).count();
        let bound = limit as usize - used;
        if bound >= delta + 1 {
            continue;
        }
        let ids: Vec<VarId> = (0..=delta).flat_map(|t| xs(n, t, shifts)).collect();
        m.add_constraint(format!("{name}_hist[{n},{delta}]"), sum(ids), ConstraintSense::Le, rhs(bound))?;
    }
    Ok(())
}

/// Constraints that make every single reserve conversion safe.
fn add_conversion_guard<T: Scalar>(
    m: &mut MipModel<T>,
    instance: &ProblemInstance,
    xs: &dyn Fn(usize, usize, &[usize]) -> Vec<VarId>,
) -> Result<(), MipError> {
    let cat = &instance.shifts;
    let days = instance.days;
    let r = cat.reserve();
    let night = cat.night();
    let le = ConstraintSense::Le;
    let mut succ: Vec<usize> = cat.forbidden().iter().filter(|p| cat.is_working(p.0)).map(|p| p.1).collect();
    let mut pred: Vec<usize> = cat.forbidden().iter().filter(|p| cat.is_working(p.1)).map(|p| p.0).collect();
    succ.sort_unstable();
    succ.dedup();
    pred.sort_unstable();
    pred.dedup();

    for (n, e) in instance.employees.iter().enumerate() {
        for d in 0..days {
            // Reserve today, a shift tomorrow that some working shift may not precede.
            if d + 1 < days && !succ.is_empty() {
                let mut ids = xs(n, d, &[r]);
                ids.extend(xs(n, d + 1, &succ));
                m.add_constraint(format!("guard_succ[{n},{d}]"), sum(ids), le, T::one())?;
            }
            if !pred.is_empty() {
                if d > 0 {
                    let mut ids = xs(n, d - 1, &pred);
                    ids.extend(xs(n, d, &[r]));
                    m.add_constraint(format!("guard_pred[{n},{d}]"), sum(ids), le, T::one())?;
                } else if instance.history_shift(n, 1).is_some_and(|s| pred.contains(&s)) {
                    m.add_constraint(format!("guard_pred[{n},0]"), sum(xs(n, 0, &[r])), le, T::zero())?;
                }
            }
            if (0..cat.n_working()).any(|s| instance.is_undesired(n, d, s)) {
                m.add_constraint(format!("guard_undesired[{n},{d}]"), sum(xs(n, d, &[r])), le, T::zero())?;
            }
        }

        // Night windows: nights in the window plus one converted reserve.
        let limit = e.max_consec_nights as usize;
        let len = limit + 1;
        let mut windows: Vec<(String, std::ops::Range<usize>, usize)> = Vec::new();
        if len <= days {
            for d in 0..=days - len {
                windows.push((format!("{d}"), d..d + len, 0));
            }
        }
        for delta in 0..limit.min(days) {
            let used = (1..=limit - delta)
                .filter(|&b| instance.history_shift(n, b) == Some(night))
                .count();
            windows.push((format!("h{delta}"), 0..delta + 1, used));
        }
        for (tag, range, used) in windows {
            let Some(bound) = limit.checked_sub(used) else { continue };
            for t in range.clone() {
                let mut ids: Vec<VarId> = range.clone().flat_map(|u| xs(n, u, &[night])).collect();
                ids.extend(xs(n, t, &[r]));
                if ids.len() <= bound {
                    continue;
                }
                m.add_constraint(format!("guard_nights[{n},{tag},{t}]"), sum(ids), le, T::from_usize(bound).unwrap())?;
            }
        }
    }
    Ok(())
}

pub(crate) fn extract_outcome<T: Scalar>(
    instance: &ProblemInstance,
    model: &MipModel<T>,
    vars: &RosterVars,
    reserve: &ReserveRequirement,
    outcome: &crate::mip::SolveOutcome<T>,
) -> Result<(Roster<T>, Vec<T>), RosterError> {
    let values = match (&outcome.values, outcome.status) {
        (_, SolveStatus::Infeasible) => return Err(RosterError::Infeasible),
        (Some(v), _) => v.clone(),
        (None, status) => return Err(RosterError::NoSolution(status)),
    };
    let assignment = vars.assignment(&values);
    let mut roster = Roster::from_assignment(instance, assignment, reserve.clone());
    let objective = outcome.objective_value.unwrap_or_else(|| model.objective_value(&values));
    roster.solve = Some(SolveInfo {
        status: outcome.status,
        objective: objective.to_f64_lossy(),
        gap: outcome.gap,
        wall_time: outcome.wall_time,
    });
    Ok((roster, values))
}

/// Checks a recomputed total against the solver objective. The recomputed
/// total may undercut the solver when an incumbent carries more slack than
/// it needs; exceeding it by more than `1e-4 * (1 + |objective|)` is an error.
pub(crate) fn check_objective(solver: f64, recomputed: f64) -> Result<(), RosterError> {
    if recomputed - solver > 1e-4 * (1.0 + solver.abs()) {
        return Err(RosterError::CostMismatch { solver, recomputed });
    }
    Ok(())
}

/// Solves the robust rostering problem and returns the roster with costs
/// recomputed from the assignment.
pub fn solve_rostering<T: Scalar>(
    instance: &ProblemInstance,
    reserve: &ReserveRequirement,
    controls: &SolveControls,
    options: RosterOptions,
    backend: &dyn MipBackend<T>,
) -> Result<Roster<T>, RosterError> {
    solve_inner(instance, reserve, controls, options, backend, None)
}

/// Like [`solve_rostering`], offering the backend a starting roster built
/// from `base` (typically the optimum without reserves) by adding reserve
/// shifts greedily. The optimum is unaffected; only solve time changes.
pub fn solve_rostering_from<T: Scalar>(
    instance: &ProblemInstance,
    reserve: &ReserveRequirement,
    controls: &SolveControls,
    options: RosterOptions,
    backend: &dyn MipBackend<T>,
    base: &Assignment,
) -> Result<Roster<T>, RosterError> {
    let start = super::start::with_reserves(instance, base, reserve);
    solve_inner(instance, reserve, controls, options, backend, Some(&start))
}

fn solve_inner<T: Scalar>(
    instance: &ProblemInstance,
    reserve: &ReserveRequirement,
    controls: &SolveControls,
    options: RosterOptions,
    backend: &dyn MipBackend<T>,
    start: Option<&Assignment>,
) -> Result<Roster<T>, RosterError> {
    let mut built = build_rostering_model::<T>(instance, reserve, options)?;
    built.model.validate()?;
    if let Some(start) = start {
        let mut values = vec![T::zero(); built.model.variables().len()];
        built.vars.write_assignment(start, &mut values);
        match complete_start(&built.model, &values) {
            Some(values) => built.model.set_start(values),
            None => log::debug!("starting roster rejected by the model"),
        }
    }
    let outcome = backend.solve(&built.model, controls)?;
    let (roster, _) = extract_outcome(instance, &built.model, &built.vars, reserve, &outcome)?;
    check_objective(roster.solve.unwrap().objective, roster.costs.total.to_f64_lossy())?;
    Ok(roster)
}

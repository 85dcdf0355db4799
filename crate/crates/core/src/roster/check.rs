//! Direct evaluation of hard constraints on explicit assignments, without
//! any model. Used by the safety check, by the oracles and by tests.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::ProblemInstance;

/// Shifts held by one employee on one day as `(shift, skill)` pairs. A valid
/// roster has at most one entry.
pub type DayPlan = Vec<(usize, usize)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    MultipleShifts,
    Unqualified,
    ForbiddenSuccession,
    ConsecutiveWork,
    ConsecutiveNights,
    Undesired,
    MinWorkDays,
    ReserveCap,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub employee: usize,
    /// Day the violation is attributed to; `None` for period totals.
    pub day: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.day {
            Some(d) => write!(f, "{:?} for employee {} on day {d}", self.kind, self.employee),
            None => write!(f, "{:?} for employee {}", self.kind, self.employee),
        }
    }
}

/// Options for [`employee_violations`].
#[derive(Debug, Clone, Copy, Default)]
pub struct CheckOptions<'a> {
    /// Days the employee is absent; any assignment on those days is a
    /// violation.
    pub absent: Option<&'a [bool]>,
    /// Subtracted from the minimum working days, saturating at zero.
    pub min_days_relief: u32,
}

fn run_violations(
    instance: &ProblemInstance,
    n: usize,
    plan: &[DayPlan],
    limit: u32,
    counts: impl Fn(Option<usize>) -> bool,
    kind: ViolationKind,
    out: &mut Vec<Violation>,
) {
    let mut run = 0usize;
    let history_len = instance.history.get(n).map_or(0, Vec::len);
    while run < history_len && counts(instance.history_shift(n, run + 1)) {
        run += 1;
    }
    for (d, day) in plan.iter().enumerate() {
        if day.iter().any(|&(s, _)| counts(Some(s))) {
            run += 1;
            if run > limit as usize {
                out.push(Violation { kind, employee: n, day: Some(d) });
            }
        } else {
            run = 0;
        }
    }
}

/// All hard-constraint violations of employee `n` under `plan` (one entry
/// per day of the period).
pub fn employee_violations(instance: &ProblemInstance, n: usize, plan: &[DayPlan], opts: CheckOptions<'_>) -> Vec<Violation> {
    let e = &instance.employees[n];
    let shifts = &instance.shifts;
    let reserve = shifts.reserve();
    let mut out = Vec::new();
    let at = |kind, d| Violation { kind, employee: n, day: Some(d) };

    for (d, day) in plan.iter().enumerate() {
        if day.len() > 1 {
            out.push(at(ViolationKind::MultipleShifts, d));
        }
        if day.iter().any(|&(_, k)| !e.is_qualified(k)) {
            out.push(at(ViolationKind::Unqualified, d));
        }
        if day.iter().any(|&(s, _)| instance.is_undesired(n, d, s)) {
            out.push(at(ViolationKind::Undesired, d));
        }
        if !day.is_empty() && opts.absent.is_some_and(|a| a[d]) {
            out.push(at(ViolationKind::Absent, d));
        }
        let previous: Vec<usize> = if d == 0 {
            instance.history_shift(n, 1).into_iter().collect()
        } else {
            plan[d - 1].iter().map(|&(s, _)| s).collect()
        };
        if previous
            .iter()
            .any(|&s1| day.iter().any(|&(s2, _)| shifts.is_forbidden(s1, s2)))
        {
            out.push(at(ViolationKind::ForbiddenSuccession, d));
        }
    }

    run_violations(instance, n, plan, e.max_consec_work, |s| s.is_some(), ViolationKind::ConsecutiveWork, &mut out);
    let night = shifts.night();
    run_violations(
        instance,
        n,
        plan,
        e.max_consec_nights,
        |s| s == Some(night),
        ViolationKind::ConsecutiveNights,
        &mut out,
    );

    let worked = plan
        .iter()
        .flatten()
        .filter(|&&(s, _)| shifts.is_working(s))
        .count();
    if (worked as u32) < e.min_work_days.saturating_sub(opts.min_days_relief) {
        out.push(Violation { kind: ViolationKind::MinWorkDays, employee: n, day: None });
    }
    let reserves = plan.iter().flatten().filter(|&&(s, _)| s == reserve).count();
    if reserves as u32 > e.max_reserve_shifts {
        out.push(Violation { kind: ViolationKind::ReserveCap, employee: n, day: None });
    }
    out
}

/// A violation that appears only after converting one reserve shift.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversionViolation {
    pub employee: usize,
    pub day: usize,
    /// Working shift and skill the reserve was converted into.
    pub shift: usize,
    pub skill: usize,
    pub violation: Violation,
}

/// Converts each reserve shift of employee `n`, one at a time, into every
/// working shift and qualified skill, and reports violations the conversion
/// introduces.
pub fn employee_conversion_violations(instance: &ProblemInstance, n: usize, plan: &[DayPlan]) -> Vec<ConversionViolation> {
    let reserve = instance.shifts.reserve();
    let opts = CheckOptions::default();
    let base = employee_violations(instance, n, plan, opts);
    let mut out = Vec::new();
    let mut trial = plan.to_vec();
    for d in 0..plan.len() {
        let Some(pos) = plan[d].iter().position(|&(s, _)| s == reserve) else {
            continue;
        };
        for s in 0..instance.shifts.n_working() {
            for &k in &instance.employees[n].skills {
                trial[d][pos] = (s, k);
                for v in employee_violations(instance, n, &trial, opts) {
                    if matches!(v.kind, ViolationKind::MinWorkDays | ViolationKind::ReserveCap) || base.contains(&v) {
                        continue;
                    }
                    out.push(ConversionViolation { employee: n, day: d, shift: s, skill: k, violation: v });
                }
            }
        }
        trial[d][pos] = plan[d][pos];
    }
    out
}

/// Roster-level wrappers over explicit `[employee][day]` plans.
pub fn plan_violations(instance: &ProblemInstance, plans: &[Vec<DayPlan>]) -> Vec<Violation> {
    (0..plans.len())
        .flat_map(|n| employee_violations(instance, n, &plans[n], CheckOptions::default()))
        .collect()
}

pub fn plan_conversion_violations(instance: &ProblemInstance, plans: &[Vec<DayPlan>]) -> Vec<ConversionViolation> {
    (0..plans.len())
        .flat_map(|n| employee_conversion_violations(instance, n, &plans[n]))
        .collect()
}

//! Exhaustive reference for the repair problem, built on the rostering
//! oracle's row enumeration.

use crate::absence::{AbsenceScenario, ReserveRequirement};
use crate::instance::ProblemInstance;
use crate::roster::check::{employee_violations, CheckOptions};
use crate::roster::{as_day_plans, combine_rows, employee_cost, enumerate_plans, oracle_guard, OracleOutcome, Roster, RosterError, Row};
use crate::scalar::Scalar;

use super::{day_changes, RerosterOptions};

/// Optimal repair cost (rostering terms plus change costs) by exhaustive
/// enumeration. Same size limits as the rostering oracle.
pub fn reroster_oracle<T: Scalar, O: Scalar>(
    instance: &ProblemInstance,
    original: &Roster<O>,
    scenario: &AbsenceScenario,
    options: RerosterOptions,
) -> Result<OracleOutcome<T>, RosterError> {
    instance.validate()?;
    oracle_guard(instance)?;
    scenario.check(instance.n_employees(), instance.days)?;
    let reserve = if options.keep_reserve_requirement {
        original.reserve.clone()
    } else {
        ReserveRequirement::zeros(instance.days)
    };
    let r = instance.shifts.reserve();
    let mut rows = Vec::with_capacity(instance.n_employees());
    for n in 0..instance.n_employees() {
        let e = &instance.employees[n];
        let absent = scenario.has_absence(n);
        let opts = CheckOptions {
            absent: Some(&scenario.matrix()[n]),
            min_days_relief: scenario.absence_days(n) as u32,
        };
        let mut feasible = Vec::new();
        for plan in enumerate_plans(instance, n) {
            if !employee_violations(instance, n, &as_day_plans(&plan), opts).is_empty() {
                continue;
            }
            let mut cost: T = employee_cost(instance, n, &plan);
            if !absent {
                let mut keeps_reserves = true;
                for d in 0..instance.days {
                    let o = original.assignment[n][d].map(|a| a.0);
                    let w = plan[d].map(|a| a.0);
                    if o == Some(r) && w.is_none() {
                        keeps_reserves = false;
                        break;
                    }
                    let (v2, v3, v4) = day_changes(instance, o, w);
                    let c = |v: u32, w: f64| T::from_u32(v).unwrap() * T::from_data(w);
                    cost = cost + c(v2, e.change_cost_shift) + c(v3, e.change_cost_reserve) + c(v4, e.change_cost_dayoff);
                }
                if !keeps_reserves {
                    continue;
                }
            }
            feasible.push(Row { plan, cost });
        }
        if feasible.is_empty() {
            return Ok(OracleOutcome::Infeasible);
        }
        rows.push(feasible);
    }
    Ok(match combine_rows(instance, &rows, &reserve) {
        Some((cost, assignment)) => OracleOutcome::Optimal { cost, assignment },
        None => OracleOutcome::Infeasible,
    })
}

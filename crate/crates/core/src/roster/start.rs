//! Greedy starting rosters for the MIP backend.

use crate::absence::ReserveRequirement;
use crate::instance::ProblemInstance;

use super::check::{employee_conversion_violations, employee_violations, CheckOptions};
use super::oracle::as_day_plans;
use super::Assignment;

/// Adds reserve shifts to `base` day by day, cheapest reserve wage first,
/// wherever an employee is off and the reserve keeps the employee's plan
/// valid and conversion-safe. Days that cannot be filled stay short.
pub fn with_reserves(instance: &ProblemInstance, base: &Assignment, reserve: &ReserveRequirement) -> Assignment {
    let mut out = base.clone();
    let r = instance.shifts.reserve();
    let mut order: Vec<usize> = (0..instance.n_employees()).collect();
    order.sort_by(|&a, &b| instance.employees[a].reserve_wage.total_cmp(&instance.employees[b].reserve_wage));
    for d in 0..instance.days.min(reserve.days()) {
        let mut placed = out.iter().filter(|row| row[d].is_some_and(|(s, _)| s == r)).count() as u32;
        for &n in &order {
            if placed >= reserve.per_day[d] {
                break;
            }
            if out[n][d].is_some() {
                continue;
            }
            let skill = instance.employees[n].skills[0];
            out[n][d] = Some((r, skill));
            let plan = as_day_plans(&out[n]);
            let ok = employee_violations(instance, n, &plan, CheckOptions::default()).is_empty()
                && employee_conversion_violations(instance, n, &plan).is_empty();
            if ok {
                placed += 1;
            } else {
                out[n][d] = None;
            }
        }
    }
    out
}

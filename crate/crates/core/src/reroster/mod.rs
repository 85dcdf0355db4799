//! Roster repair after realised absences.
//!
//! The repair model keeps every rostering constraint, blocks absent days,
//! and charges for each deviation from the original roster. Change counters
//! exist only for employees without any absence:
//!
//! * `v2[n,d]`: a working shift replaced by a different working shift.
//! * `v3[n,d]`: a reserve shift converted into a working shift.
//! * `v4[n,d]`: a day off turned into a working or reserve day, or a working
//!   day turned into a day off or a reserve day.
//!
//! `y1[n,d,s]` marks that shift `s` is held in the original or the repaired
//! roster, `y2[n,d,s]` that it is held in exactly one of them, and `y3[n,d]`
//! that the day changed at all. None of these leave the model.

mod model;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::absence::AbsenceScenario;
use crate::instance::ProblemInstance;
use crate::roster::{CostBreakdown, Roster};
use crate::scalar::Scalar;

pub use self::model::{build_rerostering_model, solve_rerostering, RerosterModel, RerosterOptions};
pub use self::oracle::reroster_oracle;

/// Per employee-day change counters.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChangeCounts {
    pub shift_changes: Vec<Vec<u32>>,
    pub reserve_conversions: Vec<Vec<u32>>,
    pub dayoff_changes: Vec<Vec<u32>>,
}

impl ChangeCounts {
    pub fn zeros(employees: usize, days: usize) -> Self {
        let z = vec![vec![0; days]; employees];
        Self {
            shift_changes: z.clone(),
            reserve_conversions: z.clone(),
            dayoff_changes: z,
        }
    }

    pub fn total_shift_changes(&self) -> u32 {
        self.shift_changes.iter().flatten().sum()
    }

    pub fn total_reserve_conversions(&self) -> u32 {
        self.reserve_conversions.iter().flatten().sum()
    }

    pub fn total_dayoff_changes(&self) -> u32 {
        self.dayoff_changes.iter().flatten().sum()
    }

    /// `sum v2*w2 + v3*w3 + v4*w4` over all employee-days.
    pub fn cost<T: Scalar>(&self, instance: &ProblemInstance) -> T {
        let mut total = T::zero();
        for (n, e) in instance.employees.iter().enumerate() {
            for d in 0..self.shift_changes[n].len() {
                let c = |v: u32, w: f64| T::from_u32(v).unwrap() * T::from_data(w);
                total = total
                    + c(self.shift_changes[n][d], e.change_cost_shift)
                    + c(self.reserve_conversions[n][d], e.change_cost_reserve)
                    + c(self.dayoff_changes[n][d], e.change_cost_dayoff);
            }
        }
        total
    }
}

/// Change counters for one employee-day, `(v2, v3, v4)`, from the original
/// and repaired holdings. Skill changes on the same shift are free.
pub fn day_changes(instance: &ProblemInstance, original: Option<usize>, repaired: Option<usize>) -> (u32, u32, u32) {
    let reserve = instance.shifts.reserve();
    if original == repaired {
        return (0, 0, 0);
    }
    match (original, repaired) {
        (Some(o), _) if o == reserve => match repaired {
            Some(_) => (0, 1, 0),
            None => (0, 0, 0),
        },
        (Some(_), Some(w)) if w != reserve => (1, 0, 0),
        (Some(_), _) => (0, 0, 1),
        (None, Some(w)) if w == reserve => (0, 0, 2),
        (None, Some(_)) => (0, 0, 1),
        (None, None) => (0, 0, 0),
    }
}

/// Counts changes by comparing the two rosters directly.
pub fn count_changes<T: Scalar>(
    instance: &ProblemInstance,
    original: &Roster<T>,
    repaired: &Roster<T>,
    scenario: &AbsenceScenario,
) -> ChangeCounts {
    let mut out = ChangeCounts::zeros(instance.n_employees(), instance.days);
    for n in 0..instance.n_employees() {
        if scenario.has_absence(n) {
            continue;
        }
        for d in 0..instance.days {
            let o = original.assignment[n][d].map(|a| a.0);
            let w = repaired.assignment[n][d].map(|a| a.0);
            let (v2, v3, v4) = day_changes(instance, o, w);
            out.shift_changes[n][d] = v2;
            out.reserve_conversions[n][d] = v3;
            out.dayoff_changes[n][d] = v4;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RerosterCosts<T> {
    /// Robust rostering objective terms of the repaired roster.
    pub base_cost: CostBreakdown<T>,
    pub change_cost: T,
    pub total: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RerosterMetrics {
    /// Converted reserves over reserves scheduled in the original roster, as
    /// a fraction in `[0, 1]`; zero when none were scheduled.
    pub pct_reserves_converted: f64,
    pub n_working_shift_changes: u32,
    pub n_dayoff_changes: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerosterResult<T = f64> {
    pub roster: Roster<T>,
    /// Counts recomputed by comparing the two rosters.
    pub changes: ChangeCounts,
    /// Counter values read from the solver solution.
    pub solver_changes: ChangeCounts,
    pub costs: RerosterCosts<T>,
    pub metrics: RerosterMetrics,
}

impl<T: Scalar> RerosterResult<T> {
    pub fn shift_changes(&self) -> &[Vec<u32>] {
        &self.changes.shift_changes
    }

    pub fn reserve_conversions(&self) -> &[Vec<u32>] {
        &self.changes.reserve_conversions
    }

    pub fn dayoff_changes(&self) -> &[Vec<u32>] {
        &self.changes.dayoff_changes
    }
}

pub fn metrics<T: Scalar>(instance: &ProblemInstance, original: &Roster<T>, changes: &ChangeCounts) -> RerosterMetrics {
    let scheduled = original.total_reserves(instance);
    let converted = changes.total_reserve_conversions();
    RerosterMetrics {
        pct_reserves_converted: if scheduled == 0 { 0.0 } else { f64::from(converted) / f64::from(scheduled) },
        n_working_shift_changes: changes.total_shift_changes(),
        n_dayoff_changes: changes.total_dayoff_changes(),
    }
}

/// Sparse change entry used in serialized results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeEntry {
    pub employee: usize,
    pub day: usize,
    pub v2: u32,
    pub v3: u32,
    pub v4: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerosterFile {
    #[serde(flatten)]
    pub roster: crate::roster::RosterFile,
    pub changes: Vec<ChangeEntry>,
    pub change_cost: f64,
    pub total: f64,
    pub metrics: RerosterMetrics,
}

impl RerosterFile {
    pub fn from_result(instance: &ProblemInstance, result: &RerosterResult<f64>) -> Self {
        let c = &result.changes;
        let mut changes = Vec::new();
        for n in 0..c.shift_changes.len() {
            for d in 0..c.shift_changes[n].len() {
                let (v2, v3, v4) = (c.shift_changes[n][d], c.reserve_conversions[n][d], c.dayoff_changes[n][d]);
                if v2 + v3 + v4 > 0 {
                    changes.push(ChangeEntry { employee: n, day: d, v2, v3, v4 });
                }
            }
        }
        Self {
            roster: crate::roster::RosterFile::from_roster(instance, &result.roster),
            changes,
            change_cost: result.costs.change_cost,
            total: result.costs.total,
            metrics: result.metrics,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reroster result serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Employee, ShiftCatalog};

    fn tiny() -> ProblemInstance {
        let shifts = ShiftCatalog::new(vec!["a".into(), "b".into()], "r", "b", &[]).unwrap();
        ProblemInstance {
            employees: vec![Employee {
                id: "e".into(),
                skills: vec![0],
                max_consec_work: 5,
                max_consec_nights: 5,
                min_work_days: 0,
                max_work_days: 5,
                max_reserve_shifts: 5,
                wage: 100.0,
                overtime_wage: 150.0,
                reserve_wage: 10.0,
                change_cost_shift: 100.0,
                change_cost_reserve: 10.0,
                change_cost_dayoff: 150.0,
            }],
            days: 1,
            skills: vec!["k".into()],
            shifts,
            demand: Default::default(),
            undesired: Default::default(),
            history: vec![vec![]],
            understaff_cost: 500.0,
            reserve_shortfall_penalty: 1000.0,
        }
    }

    #[test]
    fn change_table() {
        let inst = tiny();
        let (a, b, r) = (Some(0), Some(1), Some(2));
        assert_eq!(day_changes(&inst, a, b), (1, 0, 0));
        assert_eq!(day_changes(&inst, a, a), (0, 0, 0));
        assert_eq!(day_changes(&inst, r, a), (0, 1, 0));
        assert_eq!(day_changes(&inst, r, r), (0, 0, 0));
        assert_eq!(day_changes(&inst, None, a), (0, 0, 1));
        assert_eq!(day_changes(&inst, None, r), (0, 0, 2));
        assert_eq!(day_changes(&inst, a, None), (0, 0, 1));
        assert_eq!(day_changes(&inst, a, r), (0, 0, 1));
        assert_eq!(day_changes(&inst, None, None), (0, 0, 0));
    }
}

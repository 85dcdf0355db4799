//! JSON form of a roster. Shifts and skills are written by name.

use serde::{Deserialize, Serialize};

use crate::absence::ReserveRequirement;
use crate::instance::{InstanceError, ProblemInstance};

use super::{CostBreakdown, Roster, SolveInfo};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentEntry {
    pub employee: usize,
    pub day: usize,
    pub shift: String,
    pub skill: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvertimeEntry {
    pub employee: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnderstaffEntry {
    pub day: usize,
    pub shift: String,
    pub skill: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortfallEntry {
    pub day: usize,
    pub value: f64,
}

/// Only non-zero slacks are listed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SlackFile {
    pub overtime: Vec<OvertimeEntry>,
    pub understaffing: Vec<UnderstaffEntry>,
    pub reserve_shortfall: Vec<ShortfallEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterFile {
    pub assignments: Vec<AssignmentEntry>,
    pub costs: CostBreakdown<f64>,
    pub slacks: SlackFile,
    pub reserve_requirement: ReserveRequirement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveInfo>,
}

impl RosterFile {
    pub fn from_roster(instance: &ProblemInstance, roster: &Roster<f64>) -> Self {
        let shift = |s: usize| instance.shifts.name(s).to_string();
        let skill = |k: usize| instance.skills[k].clone();
        let mut assignments = Vec::new();
        for (n, row) in roster.assignment.iter().enumerate() {
            for (d, a) in row.iter().enumerate() {
                if let Some((s, k)) = *a {
                    assignments.push(AssignmentEntry {
                        employee: n,
                        day: d,
                        shift: shift(s),
                        skill: skill(k),
                    });
                }
            }
        }
        let slacks = SlackFile {
            overtime: roster
                .overtime
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0.0)
                .map(|(employee, &value)| OvertimeEntry { employee, value })
                .collect(),
            understaffing: roster
                .understaffing
                .iter()
                .filter(|(_, &v)| v > 0.0)
                .map(|(&(day, s, k), &value)| UnderstaffEntry {
                    day,
                    shift: shift(s),
                    skill: skill(k),
                    value,
                })
                .collect(),
            reserve_shortfall: roster
                .reserve_shortfall
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0.0)
                .map(|(day, &value)| ShortfallEntry { day, value })
                .collect(),
        };
        Self {
            assignments,
            costs: roster.costs,
            slacks,
            reserve_requirement: roster.reserve.clone(),
            solve: roster.solve,
        }
    }

    /// Rebuilds the roster; costs and slacks are recomputed from the
    /// assignment rather than trusted.
    pub fn into_roster(self, instance: &ProblemInstance) -> Result<Roster<f64>, InstanceError> {
        let mut assignment = vec![vec![None; instance.days]; instance.n_employees()];
        for (i, a) in self.assignments.iter().enumerate() {
            let at = |f: &str| format!("assignments[{i}].{f}");
            if a.employee >= instance.n_employees() {
                return Err(InstanceError::semantic(at("employee"), "unknown employee"));
            }
            if a.day >= instance.days {
                return Err(InstanceError::semantic(at("day"), "day out of range"));
            }
            let s = instance
                .shifts
                .index_of(&a.shift)
                .ok_or_else(|| InstanceError::semantic(at("shift"), format!("unknown shift `{}`", a.shift)))?;
            let k = instance
                .skills
                .iter()
                .position(|k| *k == a.skill)
                .ok_or_else(|| InstanceError::semantic(at("skill"), format!("unknown skill `{}`", a.skill)))?;
            if assignment[a.employee][a.day].replace((s, k)).is_some() {
                return Err(InstanceError::semantic(at("day"), "employee already assigned on this day"));
            }
        }
        self.reserve_requirement.check(instance.days, instance.n_employees())?;
        let mut roster = Roster::from_assignment(instance, assignment, self.reserve_requirement);
        roster.solve = self.solve;
        Ok(roster)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("roster serializes")
    }
}

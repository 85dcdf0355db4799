//! Problem instances: employees, shifts, skills, demand and history, plus the
//! JSON file schema used to store them.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid instance at `{path}`: {message}")]
    Semantic { path: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl InstanceError {
    pub(crate) fn semantic(path: impl Into<String>, message: impl Into<String>) -> Self {
        InstanceError::Semantic {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn path(&self) -> &str {
        match self {
            InstanceError::Schema { path, .. } | InstanceError::Semantic { path, .. } | InstanceError::Io { path, .. } => path,
        }
    }
}

/// Working shifts followed by the reserve shift. Shift indices `0..n_working`
/// are working shifts; index `n_working` is the reserve shift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftCatalog {
    working: Vec<String>,
    reserve: String,
    night: usize,
    forbidden: Vec<(usize, usize)>,
}

impl ShiftCatalog {
    pub fn new(
        working: Vec<String>,
        reserve: impl Into<String>,
        night: &str,
        forbidden_successions: &[(String, String)],
    ) -> Result<Self, InstanceError> {
        let reserve = reserve.into();
        let mut seen = BTreeSet::new();
        for (i, s) in working.iter().enumerate() {
            if !seen.insert(s.as_str()) {
                return Err(InstanceError::semantic(format!("shifts.working[{i}]"), format!("duplicate shift `{s}`")));
            }
        }
        if working.is_empty() {
            return Err(InstanceError::semantic("shifts.working", "at least one working shift is required"));
        }
        if seen.contains(reserve.as_str()) {
            return Err(InstanceError::semantic("shifts.reserve", "reserve shift must not be a working shift"));
        }
        let night = working
            .iter()
            .position(|s| s == night)
            .ok_or_else(|| InstanceError::semantic("shifts.night", format!("night shift `{night}` is not a working shift")))?;
        let mut forbidden = Vec::with_capacity(forbidden_successions.len());
        for (i, (a, b)) in forbidden_successions.iter().enumerate() {
            let idx = |name: &String, side: usize| {
                if *name == reserve {
                    return Err(InstanceError::semantic(
                        format!("shifts.forbidden_successions[{i}][{side}]"),
                        "forbidden successions may not reference the reserve shift",
                    ));
                }
                working.iter().position(|s| s == name).ok_or_else(|| {
                    InstanceError::semantic(format!("shifts.forbidden_successions[{i}][{side}]"), format!("unknown shift `{name}`"))
                })
            };
            let pair = (idx(a, 0)?, idx(b, 1)?);
            if !forbidden.contains(&pair) {
                forbidden.push(pair);
            }
        }
        Ok(Self {
            working,
            reserve,
            night,
            forbidden,
        })
    }

    pub fn n_working(&self) -> usize {
        self.working.len()
    }

    /// Working shifts plus the reserve shift.
    pub fn n_shifts(&self) -> usize {
        self.working.len() + 1
    }

    pub fn reserve(&self) -> usize {
        self.working.len()
    }

    pub fn night(&self) -> usize {
        self.night
    }

    pub fn is_working(&self, s: usize) -> bool {
        s < self.working.len()
    }

    pub fn working(&self) -> &[String] {
        &self.working
    }

    pub fn name(&self, s: usize) -> &str {
        if s == self.reserve() {
            &self.reserve
        } else {
            &self.working[s]
        }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        if name == self.reserve {
            Some(self.reserve())
        } else {
            self.working.iter().position(|s| s == name)
        }
    }

    pub fn forbidden(&self) -> &[(usize, usize)] {
        &self.forbidden
    }

    pub fn is_forbidden(&self, first: usize, second: usize) -> bool {
        self.forbidden.contains(&(first, second))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Employee {
    pub id: String,
    /// Sorted skill indices.
    pub skills: Vec<usize>,
    pub max_consec_work: u32,
    pub max_consec_nights: u32,
    pub min_work_days: u32,
    pub max_work_days: u32,
    pub max_reserve_shifts: u32,
    pub wage: f64,
    pub overtime_wage: f64,
    pub reserve_wage: f64,
    pub change_cost_shift: f64,
    pub change_cost_reserve: f64,
    pub change_cost_dayoff: f64,
}

impl Employee {
    pub fn is_qualified(&self, skill: usize) -> bool {
        self.skills.binary_search(&skill).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub employees: Vec<Employee>,
    pub days: usize,
    pub skills: Vec<String>,
    pub shifts: ShiftCatalog,
    /// `(day, working shift, skill) -> minimum staff`.
    pub demand: BTreeMap<(usize, usize, usize), u32>,
    /// `(employee, day, shift)` assignments that are not allowed.
    pub undesired: BTreeSet<(usize, usize, usize)>,
    /// Per employee, the previous period read backwards: `history[n][0]` is
    /// day -1, `history[n][1]` is day -2, and so on.
    pub history: Vec<Vec<Option<usize>>>,
    pub understaff_cost: f64,
    pub reserve_shortfall_penalty: f64,
}

impl ProblemInstance {
    pub fn n_employees(&self) -> usize {
        self.employees.len()
    }

    /// Shift worked `back` days before the period start (`back >= 1`).
    pub fn history_shift(&self, n: usize, back: usize) -> Option<usize> {
        debug_assert!(back >= 1);
        self.history.get(n).and_then(|h| h.get(back - 1)).copied().flatten()
    }

    pub fn demand_at(&self, day: usize, shift: usize, skill: usize) -> u32 {
        self.demand.get(&(day, shift, skill)).copied().unwrap_or(0)
    }

    pub fn is_undesired(&self, n: usize, d: usize, s: usize) -> bool {
        self.undesired.contains(&(n, d, s))
    }

    /// Checks every type invariant. Loading and model building call this.
    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.days == 0 {
            return Err(InstanceError::semantic("days", "must be at least 1"));
        }
        if self.skills.is_empty() {
            return Err(InstanceError::semantic("skills", "at least one skill is required"));
        }
        let mut ids = BTreeSet::new();
        for (i, e) in self.employees.iter().enumerate() {
            let at = |f: &str| format!("employees[{i}].{f}");
            if !ids.insert(e.id.as_str()) {
                return Err(InstanceError::semantic(at("id"), format!("duplicate employee id `{}`", e.id)));
            }
            if e.skills.is_empty() {
                return Err(InstanceError::semantic(at("skills"), "must not be empty"));
            }
            if e.skills.windows(2).any(|w| w[0] >= w[1]) || e.skills.iter().any(|&k| k >= self.skills.len()) {
                return Err(InstanceError::semantic(at("skills"), "skills must be distinct known skills"));
            }
            if e.min_work_days > e.max_work_days {
                return Err(InstanceError::semantic(
                    at("min_work_days"),
                    format!("min_work_days {} exceeds max_work_days {}", e.min_work_days, e.max_work_days),
                ));
            }
            for (name, v) in [
                ("wage", e.wage),
                ("overtime_wage", e.overtime_wage),
                ("reserve_wage", e.reserve_wage),
                ("change_cost_shift", e.change_cost_shift),
                ("change_cost_reserve", e.change_cost_reserve),
                ("change_cost_dayoff", e.change_cost_dayoff),
            ] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(InstanceError::semantic(at(name), "costs must be finite and non-negative"));
                }
            }
        }
        for (name, v) in [("costs.understaff", self.understaff_cost), ("costs.reserve_shortfall", self.reserve_shortfall_penalty)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(InstanceError::semantic(name, "costs must be finite and non-negative"));
            }
        }
        for &(d, s, k) in self.demand.keys() {
            let at = format!("demand[day={d},shift={s},skill={k}]");
            if d >= self.days {
                return Err(InstanceError::semantic(at, "day out of range"));
            }
            if s == self.shifts.reserve() {
                return Err(InstanceError::semantic(at, "demand may not reference the reserve shift"));
            }
            if !self.shifts.is_working(s) || k >= self.skills.len() {
                return Err(InstanceError::semantic(at, "unknown shift or skill"));
            }
        }
        for &(n, d, s) in &self.undesired {
            if n >= self.employees.len() || d >= self.days || s >= self.shifts.n_shifts() {
                return Err(InstanceError::semantic(format!("undesired[{n},{d},{s}]"), "index out of range"));
            }
        }
        if self.history.len() > self.employees.len() {
            return Err(InstanceError::semantic("history", "history references unknown employees"));
        }
        for (n, row) in self.history.iter().enumerate() {
            if row.iter().flatten().any(|&s| s >= self.shifts.n_shifts()) {
                return Err(InstanceError::semantic(format!("history[employee={n}]"), "unknown shift"));
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> InstanceFile {
        let shift_name = |s: usize| self.shifts.name(s).to_string();
        let mut history = Vec::new();
        for (n, row) in self.history.iter().enumerate() {
            for (i, s) in row.iter().enumerate() {
                if let Some(s) = s {
                    history.push(HistoryEntry {
                        employee: n,
                        day: -(i as i64) - 1,
                        shift: shift_name(*s),
                    });
                }
            }
        }
        InstanceFile {
            days: self.days,
            skills: self.skills.clone(),
            shifts: ShiftsFile {
                working: self.shifts.working.clone(),
                reserve: self.shifts.reserve.clone(),
                night: shift_name(self.shifts.night),
                forbidden_successions: self
                    .shifts
                    .forbidden
                    .iter()
                    .map(|&(a, b)| (shift_name(a), shift_name(b)))
                    .collect(),
            },
            employees: self
                .employees
                .iter()
                .map(|e| EmployeeFile {
                    id: e.id.clone(),
                    skills: e.skills.iter().map(|&k| self.skills[k].clone()).collect(),
                    max_consec_work: e.max_consec_work,
                    max_consec_nights: e.max_consec_nights,
                    min_work_days: e.min_work_days,
                    max_work_days: e.max_work_days,
                    max_reserve_shifts: e.max_reserve_shifts,
                    wage: e.wage,
                    overtime_wage: e.overtime_wage,
                    reserve_wage: e.reserve_wage,
                    change_cost_shift: e.change_cost_shift,
                    change_cost_reserve: e.change_cost_reserve,
                    change_cost_dayoff: e.change_cost_dayoff,
                })
                .collect(),
            demand: self
                .demand
                .iter()
                .map(|(&(day, s, k), &min)| DemandEntry {
                    day,
                    shift: shift_name(s),
                    skill: self.skills[k].clone(),
                    min,
                })
                .collect(),
            undesired: self
                .undesired
                .iter()
                .map(|&(employee, day, s)| UndesiredEntry {
                    employee,
                    day,
                    shift: shift_name(s),
                })
                .collect(),
            history,
            costs: CostsFile {
                understaff: self.understaff_cost,
                reserve_shortfall: self.reserve_shortfall_penalty,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| InstanceError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        file.into_instance()
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ProblemInstance, InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ProblemInstance::from_json(&text)
}

pub fn save_instance(instance: &ProblemInstance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    fs::write(path, instance.to_json()).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub employees: Vec<EmployeeFile>,
    pub days: usize,
    pub skills: Vec<String>,
    pub shifts: ShiftsFile,
    pub demand: Vec<DemandEntry>,
    #[serde(default)]
    pub undesired: Vec<UndesiredEntry>,
    #[serde(default)]
    pub history: Vec<HistoryEntry>,
    pub costs: CostsFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftsFile {
    pub working: Vec<String>,
    pub reserve: String,
    pub night: String,
    #[serde(default)]
    pub forbidden_successions: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmployeeFile {
    pub id: String,
    pub skills: Vec<String>,
    pub max_consec_work: u32,
    pub max_consec_nights: u32,
    pub min_work_days: u32,
    pub max_work_days: u32,
    pub max_reserve_shifts: u32,
    pub wage: f64,
    pub overtime_wage: f64,
    pub reserve_wage: f64,
    pub change_cost_shift: f64,
    pub change_cost_reserve: f64,
    pub change_cost_dayoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandEntry {
    pub day: usize,
    pub shift: String,
    pub skill: String,
    pub min: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UndesiredEntry {
    pub employee: usize,
    pub day: usize,
    pub shift: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistoryEntry {
    pub employee: usize,
    /// Negative: -1 is the last day of the previous period.
    pub day: i64,
    pub shift: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostsFile {
    pub understaff: f64,
    pub reserve_shortfall: f64,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<ProblemInstance, InstanceError> {
        let shifts = ShiftCatalog::new(
            self.shifts.working,
            self.shifts.reserve,
            &self.shifts.night,
            &self.shifts.forbidden_successions,
        )?;
        let skill_index = |name: &str, at: String| {
            self.skills
                .iter()
                .position(|k| k == name)
                .ok_or_else(|| InstanceError::semantic(at, format!("unknown skill `{name}`")))
        };
        let shift_index = |name: &str, at: String| {
            shifts
                .index_of(name)
                .ok_or_else(|| InstanceError::semantic(at, format!("unknown shift `{name}`")))
        };

        let mut employees = Vec::with_capacity(self.employees.len());
        for (i, e) in self.employees.into_iter().enumerate() {
            let mut skills = Vec::with_capacity(e.skills.len());
            for (j, k) in e.skills.iter().enumerate() {
                skills.push(skill_index(k, format!("employees[{i}].skills[{j}]"))?);
            }
            skills.sort_unstable();
            let before = skills.len();
            skills.dedup();
            if skills.len() != before {
                return Err(InstanceError::semantic(format!("employees[{i}].skills"), "duplicate skill"));
            }
            employees.push(Employee {
                id: e.id,
                skills,
                max_consec_work: e.max_consec_work,
                max_consec_nights: e.max_consec_nights,
                min_work_days: e.min_work_days,
                max_work_days: e.max_work_days,
                max_reserve_shifts: e.max_reserve_shifts,
                wage: e.wage,
                overtime_wage: e.overtime_wage,
                reserve_wage: e.reserve_wage,
                change_cost_shift: e.change_cost_shift,
                change_cost_reserve: e.change_cost_reserve,
                change_cost_dayoff: e.change_cost_dayoff,
            });
        }

        let mut demand = BTreeMap::new();
        for (i, entry) in self.demand.iter().enumerate() {
            let s = shift_index(&entry.shift, format!("demand[{i}].shift"))?;
            if s == shifts.reserve() {
                return Err(InstanceError::semantic(
                    format!("demand[{i}].shift"),
                    "demand may not reference the reserve shift",
                ));
            }
            if entry.day >= self.days {
                return Err(InstanceError::semantic(format!("demand[{i}].day"), "day out of range"));
            }
            let k = skill_index(&entry.skill, format!("demand[{i}].skill"))?;
            if demand.insert((entry.day, s, k), entry.min).is_some() {
                return Err(InstanceError::semantic(format!("demand[{i}]"), "duplicate demand entry"));
            }
        }

        let mut undesired = BTreeSet::new();
        for (i, u) in self.undesired.iter().enumerate() {
            if u.employee >= employees.len() {
                return Err(InstanceError::semantic(format!("undesired[{i}].employee"), "unknown employee"));
            }
            if u.day >= self.days {
                return Err(InstanceError::semantic(format!("undesired[{i}].day"), "day out of range"));
            }
            let s = shift_index(&u.shift, format!("undesired[{i}].shift"))?;
            undesired.insert((u.employee, u.day, s));
        }

        let mut history: Vec<Vec<Option<usize>>> = vec![Vec::new(); employees.len()];
        for (i, h) in self.history.iter().enumerate() {
            if h.employee >= employees.len() {
                return Err(InstanceError::semantic(format!("history[{i}].employee"), "unknown employee"));
            }
            if h.day >= 0 {
                return Err(InstanceError::semantic(format!("history[{i}].day"), "history days must be negative"));
            }
            let s = shift_index(&h.shift, format!("history[{i}].shift"))?;
            let back = (-h.day) as usize;
            let row = &mut history[h.employee];
            if row.len() < back {
                row.resize(back, None);
            }
            if row[back - 1].is_some() {
                return Err(InstanceError::semantic(
                    format!("history[{i}]"),
                    "more than one shift on the same history day",
                ));
            }
            row[back - 1] = Some(s);
        }

        let instance = ProblemInstance {
            employees,
            days: self.days,
            skills: self.skills,
            shifts,
            demand,
            undesired,
            history,
            understaff_cost: self.costs.understaff,
            reserve_shortfall_penalty: self.costs.reserve_shortfall,
        };
        instance.validate()?;
        Ok(instance)
    }
}

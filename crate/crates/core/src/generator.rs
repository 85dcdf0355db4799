//! Parameterised generator for nurse-rostering instances with four working
//! shifts and a reserve shift.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{Employee, InstanceError, ProblemInstance, ShiftCatalog};
use crate::rng::{stream, SeedDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkillMode {
    /// One skill, everyone qualified.
    Uniform,
    /// Head nurse, nurse, caretaker, trainee with downward substitution.
    Hierarchical,
}

/// Employee types in wage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NurseType {
    Head,
    Nurse,
    Caretaker,
    Trainee,
}

impl NurseType {
    pub const ALL: [NurseType; 4] = [NurseType::Head, NurseType::Nurse, NurseType::Caretaker, NurseType::Trainee];

    pub fn label(self) -> &'static str {
        match self {
            NurseType::Head => "head",
            NurseType::Nurse => "nurse",
            NurseType::Caretaker => "caretaker",
            NurseType::Trainee => "trainee",
        }
    }

    /// Skill indices (into [`NurseType::ALL`]) this type can cover.
    pub fn covers(self) -> &'static [usize] {
        match self {
            NurseType::Head => &[0, 1, 2],
            NurseType::Nurse => &[1, 2],
            NurseType::Caretaker => &[2],
            NurseType::Trainee => &[3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractDefaults {
    pub max_consec_work: u32,
    pub max_consec_nights: u32,
    pub min_work_days: u32,
    pub max_work_days: u32,
    pub max_reserve_shifts: u32,
}

impl ContractDefaults {
    /// Contract limits for a 28-day period, scaled linearly to `days`.
    pub fn for_horizon(days: usize) -> Self {
        let scale = |per_28: f64| (per_28 * days as f64 / 28.0).round() as u32;
        Self {
            max_consec_work: 6,
            max_consec_nights: 4,
            min_work_days: scale(16.0),
            max_work_days: scale(20.0).max(1),
            max_reserve_shifts: scale(4.0).max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub employees: usize,
    pub days: usize,
    pub skill_mode: SkillMode,
    /// Head / nurse / caretaker / trainee counts; must sum to `employees`.
    pub type_counts: [usize; 4],
    /// Daily wage per type, same order as `type_counts`.
    pub wages: [f64; 4],
    pub contract: ContractDefaults,
    /// Total daily demand as a fraction of average daily capacity (sum of
    /// maximum working days over the horizon), drawn per day.
    pub demand_band: (f64, f64),
    /// Days of previous-period history per employee.
    pub history_days: usize,
    /// Probability that an employee-day carries one undesired working shift.
    pub undesired_rate: f64,
    pub reserve_shortfall_penalty: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self::new(35, 28, SkillMode::Uniform)
    }
}

impl GeneratorConfig {
    pub fn new(employees: usize, days: usize, skill_mode: SkillMode) -> Self {
        Self {
            employees,
            days,
            skill_mode,
            type_counts: default_type_counts(employees),
            wages: [100.0, 70.0, 50.0, 30.0],
            contract: ContractDefaults::for_horizon(days),
            demand_band: (0.7, 0.8),
            history_days: 7,
            undesired_rate: 0.02,
            reserve_shortfall_penalty: 1e3,
        }
    }
}

/// 5/14/10/6 for 35 employees, scaled proportionally otherwise.
pub fn default_type_counts(employees: usize) -> [usize; 4] {
    const BASE: [usize; 4] = [5, 14, 10, 6];
    if employees == 35 {
        return BASE;
    }
    let mut counts = BASE.map(|c| c * employees / 35);
    let mut missing = employees - counts.iter().sum::<usize>();
    let mut i = 0;
    while missing > 0 {
        counts[[1, 2, 3, 0][i % 4]] += 1;
        missing -= 1;
        i += 1;
    }
    counts
}

pub const WORKING_SHIFTS: [&str; 4] = ["early", "day", "late", "night"];
pub const RESERVE_SHIFT: &str = "reserve";

fn forbidden_successions() -> Vec<(String, String)> {
    [("late", "early"), ("late", "day"), ("night", "early"), ("night", "day"), ("night", "late")]
        .iter()
        .map(|&(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

/// Upper bound on working days an employee can reach given the consecutive
/// work limit and how many days in a row they worked before the period.
fn max_achievable_days(days: usize, max_consec: u32, trailing_run: usize) -> usize {
    let mut run = trailing_run;
    let mut total = 0;
    for _ in 0..days {
        if run < max_consec as usize {
            run += 1;
            total += 1;
        } else {
            run = 0;
        }
    }
    total
}

/// Builds a deterministic instance from `config` and `seed`.
pub fn generate_instance(config: &GeneratorConfig, seed: u64) -> Result<ProblemInstance, InstanceError> {
    if config.type_counts.iter().sum::<usize>() != config.employees {
        return Err(InstanceError::semantic(
            "type_counts",
            format!("type counts {:?} do not sum to {} employees", config.type_counts, config.employees),
        ));
    }
    if config.days == 0 {
        return Err(InstanceError::semantic("days", "must be at least 1"));
    }
    let (lo, hi) = config.demand_band;
    if !(0.0 <= lo && lo <= hi) {
        return Err(InstanceError::semantic("demand_band", "expected 0 <= low <= high"));
    }
    let mut rng = stream(seed, SeedDomain::Generator, &[]);

    let shifts = ShiftCatalog::new(
        WORKING_SHIFTS.iter().map(|s| s.to_string()).collect(),
        RESERVE_SHIFT,
        "night",
        &forbidden_successions(),
    )?;
    let night = shifts.night();

    let skills: Vec<String> = match config.skill_mode {
        SkillMode::Uniform => vec!["general".into()],
        SkillMode::Hierarchical => NurseType::ALL.iter().map(|t| t.label().to_string()).collect(),
    };

    let types: Vec<NurseType> = NurseType::ALL
        .iter()
        .zip(config.type_counts)
        .flat_map(|(&t, c)| std::iter::repeat_n(t, c))
        .collect();

    let c = config.contract;
    let mut employees = Vec::with_capacity(config.employees);
    let mut history = Vec::with_capacity(config.employees);
    for (i, &t) in types.iter().enumerate() {
        let wage = config.wages[t as usize];
        let qualified = match config.skill_mode {
            SkillMode::Uniform => vec![0],
            SkillMode::Hierarchical => t.covers().to_vec(),
        };
        employees.push(Employee {
            id: format!("{}{i:02}", t.label()),
            skills: qualified,
            max_consec_work: c.max_consec_work,
            max_consec_nights: c.max_consec_nights,
            min_work_days: c.min_work_days,
            max_work_days: c.max_work_days,
            max_reserve_shifts: c.max_reserve_shifts,
            wage,
            overtime_wage: 1.5 * wage,
            reserve_wage: 0.1 * wage,
            change_cost_shift: wage,
            change_cost_reserve: 0.1 * wage,
            change_cost_dayoff: 1.5 * wage,
        });

        // Previous period, generated forwards and stored backwards.
        let mut forward: Vec<Option<usize>> = Vec::with_capacity(config.history_days);
        let (mut run, mut nights) = (0u32, 0u32);
        for _ in 0..config.history_days {
            let work = run < c.max_consec_work && rng.random_bool(0.7);
            if !work {
                forward.push(None);
                run = 0;
                nights = 0;
                continue;
            }
            let prev = forward.last().copied().flatten();
            let options: Vec<usize> = (0..shifts.n_working())
                .filter(|&s| prev.is_none_or(|p| !shifts.is_forbidden(p, s)))
                .filter(|&s| s != night || nights < c.max_consec_nights)
                .collect();
            let Some(&s) = options.choose(&mut rng) else {
                forward.push(None);
                run = 0;
                nights = 0;
                continue;
            };
            run += 1;
            nights = if s == night { nights + 1 } else { 0 };
            forward.push(Some(s));
        }
        let mut back: Vec<Option<usize>> = forward.into_iter().rev().collect();
        while back.last() == Some(&None) {
            back.pop();
        }
        let trailing = back.iter().take_while(|s| s.is_some()).count();
        if max_achievable_days(config.days, c.max_consec_work, trailing) < c.min_work_days as usize {
            return Err(InstanceError::semantic(
                "contract.min_work_days",
                format!(
                    "{} working days cannot be reached in {} days with at most {} consecutive",
                    c.min_work_days, config.days, c.max_consec_work
                ),
            ));
        }
        history.push(back);
    }

    let mut undesired = BTreeSet::new();
    for n in 0..config.employees {
        for d in 0..config.days {
            if rng.random_bool(config.undesired_rate.clamp(0.0, 1.0)) {
                undesired.insert((n, d, rng.random_range(0..shifts.n_working())));
            }
        }
    }

    let capacity: f64 = employees.iter().map(|e| e.max_work_days as f64).sum::<f64>() / config.days as f64;
    let skill_weights: Vec<f64> = match config.skill_mode {
        SkillMode::Uniform => vec![1.0],
        SkillMode::Hierarchical => config.type_counts.iter().map(|&c| c as f64).collect(),
    };
    let weight_total: f64 = skill_weights.iter().sum();
    let mut demand = BTreeMap::new();
    for d in 0..config.days {
        let fraction = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let total = (fraction * capacity).round() as usize;
        for (k, w) in skill_weights.iter().enumerate() {
            let per_skill = (total as f64 * w / weight_total).round() as usize;
            let base = per_skill / shifts.n_working();
            let mut extra = per_skill % shifts.n_working();
            let mut order: Vec<usize> = (0..shifts.n_working()).collect();
            order.shuffle(&mut rng);
            for s in order {
                let m = base + usize::from(extra > 0);
                extra = extra.saturating_sub(1);
                if m > 0 {
                    demand.insert((d, s, k), m as u32);
                }
            }
        }
    }

    let demanded: u32 = demand.values().sum();
    let regular: u32 = employees.iter().map(|e| e.max_work_days).sum();
    if demanded > regular {
        log::warn!("total demand {demanded} exceeds regular capacity {regular}; overtime or understaffing is unavoidable");
    }

    let max_wage = employees.iter().map(|e| e.wage).fold(0.0, f64::max);
    let instance = ProblemInstance {
        employees,
        days: config.days,
        skills,
        shifts,
        demand,
        undesired,
        history,
        understaff_cost: 5.0 * max_wage,
        reserve_shortfall_penalty: config.reserve_shortfall_penalty,
    };
    instance.validate()?;
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_uniform_shape() {
        let inst = generate_instance(&GeneratorConfig::default(), 1).unwrap();
        assert_eq!(inst.n_employees(), 35);
        assert_eq!(inst.days, 28);
        assert_eq!(inst.skills.len(), 1);
        assert_eq!(inst.shifts.n_shifts(), 5);
        assert!(inst.employees.iter().all(|e| e.skills == vec![0]));
    }

    #[test]
    fn hierarchical_qualifications() {
        let cfg = GeneratorConfig::new(35, 28, SkillMode::Hierarchical);
        let inst = generate_instance(&cfg, 2).unwrap();
        assert_eq!(inst.skills.len(), 4);
        let head = inst.employees.iter().find(|e| e.id.starts_with("head")).unwrap();
        let trainee = inst.employees.iter().find(|e| e.id.starts_with("trainee")).unwrap();
        assert_eq!(head.skills.len(), 3);
        assert_eq!(trainee.skills, vec![3]);
        let counts = NurseType::ALL.map(|t| inst.employees.iter().filter(|e| e.id.starts_with(t.label())).count());
        assert_eq!(counts, [5, 14, 10, 6]);
    }

    #[test]
    fn table_weights() {
        let inst = generate_instance(&GeneratorConfig::new(35, 28, SkillMode::Hierarchical), 3).unwrap();
        for e in &inst.employees {
            assert!([100.0, 70.0, 50.0, 30.0].contains(&e.wage));
            assert_eq!(e.overtime_wage, 1.5 * e.wage);
            assert_eq!(e.reserve_wage, 0.1 * e.wage);
            assert_eq!(e.change_cost_shift, e.wage);
            assert_eq!(e.change_cost_reserve, 0.1 * e.wage);
            assert_eq!(e.change_cost_dayoff, 1.5 * e.wage);
        }
        assert_eq!(inst.understaff_cost, 500.0);
        assert_eq!(inst.reserve_shortfall_penalty, 1000.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = GeneratorConfig::default();
        assert_eq!(generate_instance(&cfg, 9).unwrap(), generate_instance(&cfg, 9).unwrap());
        assert_ne!(generate_instance(&cfg, 9).unwrap(), generate_instance(&cfg, 10).unwrap());
    }

    #[test]
    fn type_counts_must_sum() {
        let mut cfg = GeneratorConfig::default();
        cfg.type_counts = [1, 1, 1, 1];
        assert!(generate_instance(&cfg, 0).is_err());
    }

    #[test]
    fn scaled_type_counts_sum() {
        for n in 1..60 {
            assert_eq!(default_type_counts(n).iter().sum::<usize>(), n);
        }
    }

    #[test]
    fn achievable_days_respects_runs() {
        assert_eq!(max_achievable_days(7, 6, 0), 6);
        assert_eq!(max_achievable_days(7, 6, 6), 6);
        assert_eq!(max_achievable_days(28, 6, 0), 24);
    }
}

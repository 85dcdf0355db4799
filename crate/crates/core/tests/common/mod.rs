#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rosterlab::{Employee, ProblemInstance, ShiftCatalog};

/// Employee with the standard cost table derived from `wage`.
pub fn employee(id: &str, wage: f64, skills: Vec<usize>) -> Employee {
    Employee {
        id: id.into(),
        skills,
        max_consec_work: 5,
        max_consec_nights: 3,
        min_work_days: 0,
        max_work_days: 5,
        max_reserve_shifts: 5,
        wage,
        overtime_wage: 1.5 * wage,
        reserve_wage: 0.1 * wage,
        change_cost_shift: wage,
        change_cost_reserve: 0.1 * wage,
        change_cost_dayoff: 1.5 * wage,
    }
}

/// Working shifts `w0..`, the last one doubling as the night shift, plus the
/// reserve shift `r`.
pub fn catalog(working: usize, forbidden: &[(usize, usize)]) -> ShiftCatalog {
    let names: Vec<String> = (0..working).map(|s| format!("w{s}")).collect();
    let pairs: Vec<(String, String)> = forbidden.iter().map(|&(a, b)| (names[a].clone(), names[b].clone())).collect();
    ShiftCatalog::new(names.clone(), "r", &names[working - 1], &pairs).unwrap()
}

pub fn instance(employees: Vec<Employee>, days: usize, skills: usize, shifts: ShiftCatalog) -> ProblemInstance {
    let n = employees.len();
    ProblemInstance {
        employees,
        days,
        skills: (0..skills).map(|k| format!("k{k}")).collect(),
        shifts,
        demand: BTreeMap::new(),
        undesired: BTreeSet::new(),
        history: vec![Vec::new(); n],
        understaff_cost: 500.0,
        reserve_shortfall_penalty: 1000.0,
    }
}

/// One day, one working shift, demand 1; `employees` identical employees
/// with wage 100 and at most one reserve shift.
pub fn single_shift(employees: usize) -> ProblemInstance {
    let emps = (0..employees)
        .map(|i| {
            let mut e = employee(&format!("e{i}"), 100.0, vec![0]);
            e.max_work_days = 1;
            e.max_reserve_shifts = 1;
            e
        })
        .collect();
    let mut inst = instance(emps, 1, 1, catalog(1, &[]));
    inst.demand.insert((0, 0, 0), 1);
    inst
}

/// Random instance within the exhaustive-oracle limits.
pub fn random_micro(rng: &mut impl Rng) -> ProblemInstance {
    let n_emp = rng.random_range(1..=3);
    let days = rng.random_range(1..=3);
    let working = rng.random_range(1..=2);
    let skills = rng.random_range(1..=2);
    let wages = [100.0, 70.0, 50.0, 30.0];
    let employees: Vec<Employee> = (0..n_emp)
        .map(|i| {
            let mut qualified: Vec<usize> = (0..skills).filter(|_| rng.random_bool(0.7)).collect();
            if qualified.is_empty() {
                qualified.push(rng.random_range(0..skills));
            }
            let mut e = employee(&format!("e{i}"), wages[rng.random_range(0..4)], qualified);
            e.max_consec_work = rng.random_range(1..=3);
            e.max_consec_nights = rng.random_range(0..=2);
            e.max_work_days = rng.random_range(1..=days as u32);
            e.min_work_days = rng.random_range(0..=e.max_work_days.min(1));
            e.max_reserve_shifts = rng.random_range(0..=2);
            e
        })
        .collect();
    let forbidden: Vec<(usize, usize)> = if working == 2 && rng.random_bool(0.6) { vec![(1, 0)] } else { vec![] };
    let mut inst = instance(employees, days, skills, catalog(working, &forbidden));
    for d in 0..days {
        for s in 0..working {
            for k in 0..skills {
                let m = rng.random_range(0..=2);
                if m > 0 {
                    inst.demand.insert((d, s, k), m);
                }
            }
        }
    }
    for n in 0..n_emp {
        for d in 0..days {
            if rng.random_bool(0.1) {
                inst.undesired.insert((n, d, rng.random_range(0..working)));
            }
        }
        let hist_len = rng.random_range(0..=3);
        inst.history[n] = (0..hist_len)
            .map(|_| rng.random_bool(0.6).then(|| rng.random_range(0..working)))
            .collect();
        while inst.history[n].last() == Some(&None) {
            inst.history[n].pop();
        }
    }
    inst
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-4 * (1.0 + b.abs())
}

mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rosterlab::mip::export_lp;
use rosterlab::reroster::reroster_oracle;
use rosterlab::roster::{build_rostering_model, check_roster};
use rosterlab::scalar::Scalar;
use rosterlab::{
    check_conversion_safety, oracle_enumerate, solve_rerostering, solve_rostering, AbsenceScenario, EnumerationBackend,
    HighsBackend, MipBackend, ProblemInstance, Rational, RerosterOptions, ReserveRequirement, RosterError, RosterOptions,
    SolveControls, SolveStatus,
};

fn random_reserve(rng: &mut impl Rng, inst: &ProblemInstance) -> ReserveRequirement {
    ReserveRequirement::new((0..inst.days).map(|_| rng.random_range(0..=inst.n_employees().min(2) as u32)).collect())
}

fn solve(inst: &ProblemInstance, reserve: &ReserveRequirement, guard: bool) -> Result<rosterlab::Roster, RosterError> {
    solve_rostering::<f64>(
        inst,
        reserve,
        &SolveControls::default(),
        RosterOptions { conversion_guard: guard },
        &HighsBackend::default(),
    )
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 128,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn solver_matches_oracle(seed in any::<u64>(), guard in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_micro(&mut rng);
        let reserve = random_reserve(&mut rng, &inst);
        let options = RosterOptions { conversion_guard: guard };
        let exact = oracle_enumerate::<Rational>(&inst, &reserve, options).unwrap().cost();
        match (solve(&inst, &reserve, guard), exact) {
            (Ok(roster), Some(cost)) => {
                prop_assert!(close(roster.costs.total, cost.to_f64_lossy()), "{} vs {}", roster.costs.total, cost);
                prop_assert!(check_roster(&inst, &roster).is_empty());
                if guard {
                    prop_assert!(check_conversion_safety(&inst, &roster).is_empty());
                }
            }
            (Err(RosterError::Infeasible), None) => {}
            (got, want) => prop_assert!(false, "solver {:?} vs oracle {:?}", got.map(|r| r.costs.total), want),
        }
    }

    #[test]
    fn enumeration_backend_agrees_in_rationals(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_micro(&mut rng);
        let reserve = random_reserve(&mut rng, &inst);
        let built = build_rostering_model::<Rational>(&inst, &reserve, RosterOptions::default()).unwrap();
        prop_assume!(built.model.num_binaries() <= 22);
        let out = EnumerationBackend::default().solve(&built.model, &SolveControls::default()).unwrap();
        let exact = oracle_enumerate::<Rational>(&inst, &reserve, RosterOptions::default()).unwrap().cost();
        match exact {
            Some(cost) => prop_assert_eq!(out.objective_value, Some(cost)),
            None => prop_assert_eq!(out.status, SolveStatus::Infeasible),
        }
    }

    #[test]
    fn cost_is_monotone_in_reserve(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_micro(&mut rng);
        let low = random_reserve(&mut rng, &inst);
        let mut high = low.clone();
        let d = rng.random_range(0..inst.days);
        high.per_day[d] += 1;
        prop_assert!(low.le(&high));
        let a = solve(&inst, &low, true);
        let b = solve(&inst, &high, true);
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!(a.costs.total <= b.costs.total + 1e-6);
        }
    }

    #[test]
    fn slacks_and_caps_are_consistent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_micro(&mut rng);
        let reserve = random_reserve(&mut rng, &inst);
        let Ok(roster) = solve(&inst, &reserve, true) else { return Ok(()); };
        let held = roster.reserves_per_day(&inst);
        for d in 0..inst.days {
            let short = reserve.per_day[d].saturating_sub(held[d]);
            prop_assert!((roster.reserve_shortfall[d] - f64::from(short)).abs() < 1e-6);
        }
        let r = inst.shifts.reserve();
        for (n, e) in inst.employees.iter().enumerate() {
            let reserves = roster.assignment[n].iter().filter(|a| a.is_some_and(|(s, _)| s == r)).count();
            prop_assert!(reserves as u32 <= e.max_reserve_shifts);
            let worked = roster.assignment[n].iter().filter(|a| a.is_some_and(|(s, _)| s != r)).count() as f64;
            let over = (worked - f64::from(e.max_work_days)).max(0.0);
            prop_assert!((roster.overtime[n] - over).abs() < 1e-6);
        }
    }

    #[test]
    fn repair_matches_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut inst = random_micro(&mut rng);
        for e in &mut inst.employees {
            e.min_work_days = 0;
        }
        let reserve = random_reserve(&mut rng, &inst);
        let Ok(original) = solve(&inst, &reserve, true) else { return Ok(()); };
        let pairs: Vec<(usize, usize)> = (0..inst.n_employees())
            .flat_map(|n| (0..inst.days).map(move |d| (n, d)))
            .filter(|_| rng.random_bool(0.25))
            .collect();
        let scenario = AbsenceScenario::from_pairs(inst.n_employees(), inst.days, &pairs, seed);
        let exact = reroster_oracle::<Rational, f64>(&inst, &original, &scenario, RerosterOptions::default()).unwrap().cost();
        let got = solve_rerostering::<f64, f64>(
            &inst, &original, &scenario, &SolveControls::default(), RerosterOptions::default(), &HighsBackend::default(),
        );
        match (got, exact) {
            (Ok(out), Some(cost)) => {
                prop_assert!(close(out.costs.total, cost.to_f64_lossy()), "{} vs {}", out.costs.total, cost);
                prop_assert_eq!(&out.changes, &out.solver_changes);
                let r = inst.shifts.reserve();
                for n in 0..inst.n_employees() {
                    for d in 0..inst.days {
                        if scenario.is_absent(n, d) {
                            prop_assert_eq!(out.roster.assignment[n][d], None);
                        }
                        if !scenario.has_absence(n) && original.assignment[n][d].is_some_and(|(s, _)| s == r) {
                            prop_assert!(out.roster.assignment[n][d].is_some());
                        }
                    }
                }
            }
            (Err(RosterError::Infeasible), None) => {}
            (got, want) => prop_assert!(false, "solver {:?} vs oracle {:?}", got.map(|r| r.costs.total), want),
        }
    }

    #[test]
    fn lp_export_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_micro(&mut rng);
        let reserve = random_reserve(&mut rng, &inst);
        let a = build_rostering_model::<f64>(&inst, &reserve, RosterOptions::default()).unwrap();
        let b = build_rostering_model::<f64>(&inst.clone(), &reserve, RosterOptions::default()).unwrap();
        prop_assert_eq!(export_lp(&a.model).unwrap(), export_lp(&b.model).unwrap());
    }
}

use rosterlab::scenario::{baseline_policy, generate_scenarios, scenario_at};
use rosterlab::simml::{confusion_metrics, predict_for_truth, simulate_predictions, ClassifierProfile};
use rosterlab::{generate_instance, load_instance, save_instance, GeneratorConfig, ProblemInstance, SkillMode};

fn generated(mode: SkillMode) -> ProblemInstance {
    generate_instance(&GeneratorConfig::new(35, 28, mode), 7).unwrap()
}

#[test]
fn generated_instance_round_trips_through_json() {
    for mode in [SkillMode::Uniform, SkillMode::Hierarchical] {
        let inst = generated(mode);
        let back = ProblemInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("instance.json");
        save_instance(&inst, &path).unwrap();
        assert_eq!(load_instance(&path).unwrap(), inst);
    }
}

#[test]
fn generated_instance_shape() {
    let inst = generated(SkillMode::Uniform);
    assert_eq!(inst.n_employees(), 35);
    assert_eq!(inst.days, 28);
    assert_eq!(inst.shifts.n_working(), 4);
    inst.validate().unwrap();
    let demand: u32 = inst.demand.values().sum();
    let capacity: u32 = inst.employees.iter().map(|e| e.max_work_days).sum();
    let ratio = f64::from(demand) / f64::from(capacity);
    assert!((0.68..=0.82).contains(&ratio), "demand/capacity {ratio}");
    let hier = generated(SkillMode::Hierarchical);
    assert!(hier.employees.iter().any(|e| e.skills.len() > 1));
    assert!(hier.employees.iter().any(|e| e.skills.len() == 1));
}

#[test]
fn malformed_instance_reports_the_field() {
    let inst = generated(SkillMode::Uniform);
    let mut value: serde_json::Value = serde_json::from_str(&inst.to_json()).unwrap();
    value["employees"][0]["wage"] = serde_json::json!("lots");
    let err = ProblemInstance::from_json(&value.to_string()).unwrap_err();
    assert!(err.to_string().contains("employees[0].wage"), "{err}");
}

#[test]
fn unknown_shift_name_is_rejected() {
    let inst = generated(SkillMode::Uniform);
    let mut value: serde_json::Value = serde_json::from_str(&inst.to_json()).unwrap();
    value["demand"][0]["shift"] = serde_json::json!("brunch");
    assert!(ProblemInstance::from_json(&value.to_string()).is_err());
}

#[test]
fn scenario_absence_count_matches_rate() {
    // 35 x 28 cells at rho = 0.0264: mean 25.872 absences per scenario.
    let (n, d, rho) = (35usize, 28usize, 0.0264);
    let count = 400;
    let scenarios = generate_scenarios(n, d, rho, count, 11);
    let mean = scenarios.iter().map(|s| s.total() as f64).sum::<f64>() / count as f64;
    let cells = (n * d) as f64;
    let sigma = (cells * rho * (1.0 - rho) / count as f64).sqrt();
    assert!((mean - cells * rho).abs() <= 3.0 * sigma, "mean {mean}");
}

#[test]
fn scenarios_are_addressable_and_distinct() {
    let all = generate_scenarios(10, 7, 0.2, 5, 3);
    for (i, s) in all.iter().enumerate() {
        assert_eq!(*s, scenario_at(10, 7, 0.2, 3, i));
    }
    assert_ne!(all[0], all[1]);
    assert_ne!(all[0], scenario_at(10, 7, 0.2, 4, 0));
}

#[test]
fn scenario_cells_are_uncorrelated() {
    // Adjacent-day agreement under independence: p^2 + (1-p)^2.
    let rho = 0.3;
    let scenarios = generate_scenarios(20, 10, rho, 200, 5);
    let (mut both, mut pairs) = (0usize, 0usize);
    for s in &scenarios {
        for row in s.matrix() {
            for w in row.windows(2) {
                pairs += 1;
                both += usize::from(w[0] && w[1]);
            }
        }
    }
    let p = both as f64 / pairs as f64;
    let sigma = (rho * rho * (1.0 - rho * rho) / pairs as f64).sqrt();
    assert!((p - rho * rho).abs() <= 3.0 * sigma, "joint rate {p}");
}

#[test]
fn baseline_is_constant() {
    assert_eq!(baseline_policy(3, 4).per_day, vec![3, 3, 3, 3]);
}

#[test]
fn perfect_classifier_reproduces_truth() {
    let truth = scenario_at(20, 14, 0.1, 2, 0);
    let p = ClassifierProfile::new(1.0, 0.0, 0.1).unwrap();
    let out = predict_for_truth(&truth, &p, 9);
    assert_eq!(out.tallies.fp + out.tallies.fn_, 0);
    for d in 0..14 {
        let absent = (0..20).filter(|&n| truth.is_absent(n, d)).count() as u32;
        assert_eq!(out.reserve_requirement.per_day[d], absent);
    }
}

#[test]
fn simulated_predictions_are_seeded() {
    let p = ClassifierProfile::new(0.7, 0.3, 0.05).unwrap();
    let a = simulate_predictions(35, 28, &p, 4);
    assert_eq!(a, simulate_predictions(35, 28, &p, 4));
    assert_ne!(a, simulate_predictions(35, 28, &p, 5));
    let m = confusion_metrics(&a.tallies);
    assert!(m.tpr.is_some() && m.fpr.is_some());
    assert_eq!(a.tallies.total(), 35 * 28);
}

#[test]
fn profile_rejects_out_of_range() {
    assert!(ClassifierProfile::new(1.2, 0.0, 0.1).is_err());
    assert!(ClassifierProfile::new(0.5, -0.1, 0.1).is_err());
    assert!(ClassifierProfile::new(0.5, 0.1, 1.5).is_err());
}

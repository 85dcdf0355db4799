//! Evaluation absence scenarios and fixed-count reserve policies.

use rand::Rng;

use crate::absence::{AbsenceScenario, ReserveRequirement};
use crate::rng::{derive_seed, stream, SeedDomain};

/// Scenario `index` of the evaluation set drawn from `seed`. Each cell is
/// absent independently with probability `rho`.
pub fn scenario_at(n_employees: usize, n_days: usize, rho: f64, seed: u64, index: usize) -> AbsenceScenario {
    let path = [index as u64];
    let mut rng = stream(seed, SeedDomain::Evaluation, &path);
    let absent = (0..n_employees)
        .map(|_| (0..n_days).map(|_| rng.random_bool(rho)).collect())
        .collect();
    AbsenceScenario::new(absent, derive_seed(seed, SeedDomain::Evaluation, &path))
}

/// `count` independent scenarios; scenario `i` equals `scenario_at(.., i)`.
///
/// Panics if `rho` is outside `[0, 1]`.
pub fn generate_scenarios(n_employees: usize, n_days: usize, rho: f64, count: usize, seed: u64) -> Vec<AbsenceScenario> {
    assert!((0.0..=1.0).contains(&rho), "rho must lie in [0, 1]");
    (0..count).map(|i| scenario_at(n_employees, n_days, rho, seed, i)).collect()
}

/// `k` reserve shifts on every day.
pub fn baseline_policy(k: u32, n_days: usize) -> ReserveRequirement {
    ReserveRequirement::constant(k, n_days)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_is_empty() {
        for s in generate_scenarios(5, 7, 0.0, 3, 1) {
            assert_eq!(s.total(), 0);
        }
    }

    #[test]
    fn index_reproducible_in_isolation() {
        let all = generate_scenarios(6, 8, 0.3, 5, 77);
        assert_eq!(all[3], scenario_at(6, 8, 0.3, 77, 3));
        assert_ne!(all[3], all[4]);
    }

    #[test]
    fn baselines() {
        assert_eq!(baseline_policy(2, 28).per_day, vec![2; 28]);
        assert_eq!(baseline_policy(0, 3).per_day, vec![0; 3]);
        assert_eq!(baseline_policy(4, 5).per_day, vec![4; 5]);
    }
}

//! Simulated binary absence classifier.
//!
//! Each employee-day is a trial: the employee is absent with probability
//! `rho`. An absence is flagged with probability `tpr`. A presence becomes a
//! candidate false positive with probability `rfpr`, and a candidate is
//! flagged with probability `rho`. Flags per day become the reserve
//! requirement.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::absence::{AbsenceScenario, ReserveRequirement};
use crate::rng::{derive_seed, SeedDomain};

#[derive(Debug, Error, PartialEq)]
#[error("classifier parameter `{name}` = {value} is outside [0, 1]")]
pub struct ProfileError {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierProfile {
    pub tpr: f64,
    pub rfpr: f64,
    pub event_rate: f64,
}

impl ClassifierProfile {
    pub fn new(tpr: f64, rfpr: f64, event_rate: f64) -> Result<Self, ProfileError> {
        for (name, value) in [("tpr", tpr), ("rfpr", rfpr), ("event_rate", event_rate)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ProfileError { name, value });
            }
        }
        Ok(Self { tpr, rfpr, event_rate })
    }

    /// Probability that a single employee-day is flagged.
    pub fn expected_positive_rate(&self) -> f64 {
        let rho = self.event_rate;
        rho * self.tpr + (1.0 - rho) * self.rfpr * rho
    }

    /// Probability that a non-absent employee-day is flagged.
    pub fn false_positive_probability(&self) -> f64 {
        self.rfpr * self.event_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tallies {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Tallies {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionOutcome {
    pub reserve_requirement: ReserveRequirement,
    /// The simulated truth the predictions were made against.
    pub scenario: AbsenceScenario,
    pub tallies: Tallies,
    pub seed: u64,
}

/// `None` marks a ratio whose denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMetrics {
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub specificity: Option<f64>,
}

pub fn confusion_metrics(t: &Tallies) -> ConfusionMetrics {
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    let specificity = ratio(t.tn, t.tn + t.fp);
    ConfusionMetrics {
        tpr: ratio(t.tp, t.tp + t.fn_),
        fpr: specificity.map(|s| 1.0 - s),
        specificity,
    }
}

fn classify(rng: &mut ChaCha8Rng, absent: bool, p: &ClassifierProfile, tallies: &mut Tallies) -> bool {
    if absent {
        let hit = rng.random_bool(p.tpr);
        if hit {
            tallies.tp += 1;
        } else {
            tallies.fn_ += 1;
        }
        hit
    } else {
        let flagged = rng.random_bool(p.rfpr) && rng.random_bool(p.event_rate);
        if flagged {
            tallies.fp += 1;
        } else {
            tallies.tn += 1;
        }
        flagged
    }
}

/// Draws the truth and the classifier output in one pass from one seed.
pub fn simulate_predictions(n_employees: usize, n_days: usize, profile: &ClassifierProfile, seed: u64) -> PredictionOutcome {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SeedDomain::Prediction, &[]));
    let mut absent = vec![vec![false; n_days]; n_employees];
    let mut per_day = vec![0u32; n_days];
    let mut tallies = Tallies::default();
    for row in absent.iter_mut() {
        for (d, cell) in row.iter_mut().enumerate() {
            *cell = rng.random_bool(profile.event_rate);
            if classify(&mut rng, *cell, profile, &mut tallies) {
                per_day[d] += 1;
            }
        }
    }
    PredictionOutcome {
        reserve_requirement: ReserveRequirement::new(per_day),
        scenario: AbsenceScenario::new(absent, seed),
        tallies,
        seed,
    }
}

/// Classifier output against a given truth. `stream_seed` selects the random
/// stream and should be derived per task.
pub fn predict_for_truth(truth: &AbsenceScenario, profile: &ClassifierProfile, stream_seed: u64) -> PredictionOutcome {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
    let mut per_day = vec![0u32; truth.days()];
    let mut tallies = Tallies::default();
    for row in truth.matrix() {
        for (d, &a) in row.iter().enumerate() {
            if classify(&mut rng, a, profile, &mut tallies) {
                per_day[d] += 1;
            }
        }
    }
    PredictionOutcome {
        reserve_requirement: ReserveRequirement::new(per_day),
        scenario: truth.clone(),
        tallies,
        seed: stream_seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_from_tallies() {
        let m = confusion_metrics(&Tallies { tp: 9, fn_: 1, tn: 90, fp: 10 });
        assert!((m.tpr.unwrap() - 0.9).abs() < 1e-12);
        assert!((m.fpr.unwrap() - 0.1).abs() < 1e-12);
        assert!((m.specificity.unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn empty_positive_class_is_undefined() {
        let m = confusion_metrics(&Tallies { tp: 0, fn_: 0, tn: 5, fp: 0 });
        assert_eq!(m.tpr, None);
        assert_eq!(m.fpr, Some(0.0));
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"tpr\":null"));
    }

    #[test]
    fn profile_bounds() {
        assert!(ClassifierProfile::new(1.1, 0.0, 0.0).is_err());
        assert!(ClassifierProfile::new(0.5, -0.1, 0.0).is_err());
        assert!(ClassifierProfile::new(1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn corners() {
        let none = simulate_predictions(20, 30, &ClassifierProfile::new(0.0, 0.0, 0.3).unwrap(), 4);
        assert!(none.reserve_requirement.per_day.iter().all(|&c| c == 0));
        assert_eq!(none.tallies.tp + none.tallies.fp, 0);

        let perfect = simulate_predictions(20, 30, &ClassifierProfile::new(1.0, 0.0, 0.3).unwrap(), 4);
        assert_eq!(perfect.tallies.fn_ + perfect.tallies.fp, 0);
        for d in 0..30 {
            let truth = (0..20).filter(|&n| perfect.scenario.is_absent(n, d)).count() as u32;
            assert_eq!(perfect.reserve_requirement.per_day[d], truth);
        }
    }

    #[test]
    fn tallies_serialize_fn_key() {
        let json = serde_json::to_string(&Tallies { tp: 1, fp: 2, fn_: 3, tn: 4 }).unwrap();
        assert_eq!(json, r#"{"tp":1,"fp":2,"fn":3,"tn":4}"#);
    }
}

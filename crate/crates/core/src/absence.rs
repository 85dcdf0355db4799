//! Per-day reserve requirements and realised absence scenarios.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::instance::InstanceError;

/// Required number of reserve shifts per day.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReserveRequirement {
    pub per_day: Vec<u32>,
}

impl ReserveRequirement {
    pub fn new(per_day: Vec<u32>) -> Self {
        Self { per_day }
    }

    pub fn zeros(days: usize) -> Self {
        Self { per_day: vec![0; days] }
    }

    pub fn constant(k: u32, days: usize) -> Self {
        Self { per_day: vec![k; days] }
    }

    pub fn days(&self) -> usize {
        self.per_day.len()
    }

    pub fn total(&self) -> u64 {
        self.per_day.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn mean_per_day(&self) -> f64 {
        if self.per_day.is_empty() {
            0.0
        } else {
            self.total() as f64 / self.per_day.len() as f64
        }
    }

    /// True when every component is at most the matching one in `other`.
    pub fn le(&self, other: &Self) -> bool {
        self.per_day.len() == other.per_day.len() && self.per_day.iter().zip(&other.per_day).all(|(a, b)| a <= b)
    }

    pub fn check(&self, days: usize, employees: usize) -> Result<(), InstanceError> {
        if self.per_day.len() != days {
            return Err(InstanceError::semantic(
                "reserve",
                format!("expected {days} daily values, got {}", self.per_day.len()),
            ));
        }
        if let Some(d) = self.per_day.iter().position(|&c| c as usize > employees) {
            return Err(InstanceError::semantic(
                format!("reserve[{d}]"),
                format!("{} reserves exceed the {employees} employees", self.per_day[d]),
            ));
        }
        Ok(())
    }
}

/// Realised absences: `absent[n][d]` is true when employee `n` is absent on
/// day `d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AbsenceScenario {
    absent: Vec<Vec<bool>>,
    pub seed: u64,
}

impl AbsenceScenario {
    pub fn new(absent: Vec<Vec<bool>>, seed: u64) -> Self {
        Self { absent, seed }
    }

    pub fn none(employees: usize, days: usize) -> Self {
        Self {
            absent: vec![vec![false; days]; employees],
            seed: 0,
        }
    }

    pub fn from_pairs(employees: usize, days: usize, pairs: &[(usize, usize)], seed: u64) -> Self {
        let mut s = Self::none(employees, days);
        s.seed = seed;
        for &(n, d) in pairs {
            s.absent[n][d] = true;
        }
        s
    }

    pub fn employees(&self) -> usize {
        self.absent.len()
    }

    pub fn days(&self) -> usize {
        self.absent.first().map_or(0, Vec::len)
    }

    pub fn is_absent(&self, n: usize, d: usize) -> bool {
        self.absent[n][d]
    }

    pub fn matrix(&self) -> &[Vec<bool>] {
        &self.absent
    }

    /// Employees with at least one absence.
    pub fn absent_set(&self) -> BTreeSet<usize> {
        (0..self.absent.len()).filter(|&n| self.has_absence(n)).collect()
    }

    pub fn has_absence(&self, n: usize) -> bool {
        self.absent[n].iter().any(|&a| a)
    }

    pub fn absence_days(&self, n: usize) -> usize {
        self.absent[n].iter().filter(|&&a| a).count()
    }

    pub fn total(&self) -> usize {
        self.absent.iter().map(|r| r.iter().filter(|&&a| a).count()).sum()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (n, row) in self.absent.iter().enumerate() {
            for (d, &a) in row.iter().enumerate() {
                if a {
                    out.push((n, d));
                }
            }
        }
        out
    }

    pub fn check(&self, employees: usize, days: usize) -> Result<(), InstanceError> {
        if self.absent.len() != employees || self.absent.iter().any(|r| r.len() != days) {
            return Err(InstanceError::semantic(
                "scenario",
                format!("expected a {employees}x{days} absence matrix"),
            ));
        }
        Ok(())
    }
}

/// Sparse serialized form of an [`AbsenceScenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: u64,
    pub employees: usize,
    pub days: usize,
    /// `[employee, day]` pairs.
    pub absent: Vec<(usize, usize)>,
}

impl From<&AbsenceScenario> for ScenarioFile {
    fn from(s: &AbsenceScenario) -> Self {
        Self {
            seed: s.seed,
            employees: s.employees(),
            days: s.days(),
            absent: s.pairs(),
        }
    }
}

impl TryFrom<ScenarioFile> for AbsenceScenario {
    type Error = InstanceError;

    fn try_from(f: ScenarioFile) -> Result<Self, InstanceError> {
        for (i, &(n, d)) in f.absent.iter().enumerate() {
            if n >= f.employees || d >= f.days {
                return Err(InstanceError::semantic(format!("absent[{i}]"), "index out of range"));
            }
        }
        Ok(Self::from_pairs(f.employees, f.days, &f.absent, f.seed))
    }
}

impl Serialize for AbsenceScenario {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ScenarioFile::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AbsenceScenario {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let f = ScenarioFile::deserialize(deserializer)?;
        AbsenceScenario::try_from(f).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_set_and_round_trip() {
        let s = AbsenceScenario::from_pairs(3, 4, &[(0, 1), (2, 3), (2, 0)], 11);
        assert_eq!(s.absent_set().into_iter().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(s.total(), 3);
        let json = serde_json::to_string(&s).unwrap();
        let back: AbsenceScenario = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn out_of_range_pair_rejected() {
        let json = r#"{"seed":0,"employees":1,"days":1,"absent":[[0,1]]}"#;
        assert!(serde_json::from_str::<AbsenceScenario>(json).is_err());
    }

    #[test]
    fn requirement_checks() {
        let r = ReserveRequirement::new(vec![1, 3]);
        assert!(r.check(2, 3).is_ok());
        assert!(r.check(3, 3).is_err());
        assert!(r.check(2, 2).is_err());
        assert!(ReserveRequirement::zeros(2).le(&r));
        assert_eq!(r.mean_per_day(), 2.0);
    }
}

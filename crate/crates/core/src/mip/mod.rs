//! Backend-neutral integer programming models.
//!
//! A [`MipModel`] is a plain list of named variables, named linear
//! constraints and a linear objective that is always minimised. Backends
//! implement [`MipBackend`]; two are provided:
//!
//! * [`HighsBackend`] links the HiGHS solver and is used for real instances.
//! * [`EnumerationBackend`] enumerates every binary assignment and is only
//!   valid for tiny models. It is the independent reference for tests.

mod enumerate;
mod highs;
mod lp;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use self::enumerate::{complete_start, EnumerationBackend};
pub use self::highs::{solve_lp_text, HighsBackend, LpFileOutcome};
pub use self::lp::export_lp;

/// Integrality values closer than this to an integer are snapped to it.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MipError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraint(String),
    #[error("constraint `{constraint}` references undeclared variable #{index}")]
    UnknownVariable { constraint: String, index: usize },
    #[error("constraint `{0}` has no terms")]
    EmptyConstraint(String),
    #[error("variable `{name}` has empty domain [{lower}, {upper}]")]
    EmptyDomain { name: String, lower: f64, upper: f64 },
    #[error("model too large for enumeration: {binaries} binary variables (limit {limit})")]
    TooLarge { binaries: usize, limit: usize },
    #[error("model not enumerable: constraint `{0}` couples several non-binary variables")]
    NotEnumerable(String),
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("backend failure: {0}")]
    Backend(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable<T> {
    pub name: String,
    pub kind: VarKind,
    pub lower: T,
    /// `None` means unbounded above.
    pub upper: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinExpr<T> {
    pub terms: Vec<(VarId, T)>,
}

impl<T> Default for LinExpr<T> {
    fn default() -> Self {
        Self { terms: Vec::new() }
    }
}

impl<T: Scalar> LinExpr<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, var: VarId, coef: T) -> &mut Self {
        self.terms.push((var, coef));
        self
    }

    pub fn with(mut self, var: VarId, coef: T) -> Self {
        self.terms.push((var, coef));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, values: &[T]) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, &(v, c)| acc + c * values[v.0])
    }
}

impl<T: Scalar> FromIterator<(VarId, T)> for LinExpr<T> {
    fn from_iter<I: IntoIterator<Item = (VarId, T)>>(iter: I) -> Self {
        Self {
            terms: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintSense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for ConstraintSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintSense::Le => "<=",
            ConstraintSense::Ge => ">=",
            ConstraintSense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T> {
    pub name: String,
    pub expr: LinExpr<T>,
    pub sense: ConstraintSense,
    pub rhs: T,
}

impl<T: Scalar> Constraint<T> {
    pub fn is_satisfied(&self, values: &[T]) -> bool {
        let lhs = self.expr.evaluate(values);
        match self.sense {
            ConstraintSense::Le => lhs.approx_le(self.rhs),
            ConstraintSense::Ge => self.rhs.approx_le(lhs),
            ConstraintSense::Eq => lhs.approx_eq(self.rhs),
        }
    }
}

/// A minimisation model with named variables and constraints.
#[derive(Debug, Clone)]
pub struct MipModel<T> {
    pub name: String,
    variables: Vec<Variable<T>>,
    constraints: Vec<Constraint<T>>,
    objective: LinExpr<T>,
    objective_constant: T,
    var_index: HashMap<String, VarId>,
    constraint_index: HashMap<String, usize>,
    start: Option<Vec<T>>,
}

impl<T: Scalar> MipModel<T> {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: LinExpr::new(),
            objective_constant: T::zero(),
            var_index: HashMap::new(),
            constraint_index: HashMap::new(),
            start: None,
        }
    }

    /// Candidate solution, one value per variable, offered to backends that
    /// accept a starting incumbent. Backends verify it themselves.
    pub fn set_start(&mut self, values: Vec<T>) {
        self.start = Some(values);
    }

    pub fn start(&self) -> Option<&[T]> {
        self.start.as_deref()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind) -> Result<VarId, MipError> {
        let upper = match kind {
            VarKind::Binary => Some(T::one()),
            _ => None,
        };
        self.add_var_bounded(name, kind, T::zero(), upper)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, MipError> {
        self.add_var(name, VarKind::Binary)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>) -> Result<VarId, MipError> {
        self.add_var(name, VarKind::Continuous)
    }

    pub fn add_var_bounded(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: T,
        upper: Option<T>,
    ) -> Result<VarId, MipError> {
        let name = name.into();
        if self.var_index.contains_key(&name) {
            return Err(MipError::DuplicateVariable(name));
        }
        let id = VarId(self.variables.len());
        self.var_index.insert(name.clone(), id);
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        Ok(id)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        expr: LinExpr<T>,
        sense: ConstraintSense,
        rhs: T,
    ) -> Result<(), MipError> {
        let name = name.into();
        if self.constraint_index.contains_key(&name) {
            return Err(MipError::DuplicateConstraint(name));
        }
        self.constraint_index.insert(name.clone(), self.constraints.len());
        self.constraints.push(Constraint {
            name,
            expr,
            sense,
            rhs,
        });
        Ok(())
    }

    pub fn add_objective_term(&mut self, var: VarId, coef: T) {
        if !coef.is_zero() {
            self.objective.add(var, coef);
        }
    }

    pub fn set_objective(&mut self, objective: LinExpr<T>) {
        self.objective = objective;
    }

    pub fn set_objective_constant(&mut self, constant: T) {
        self.objective_constant = constant;
    }

    pub fn variables(&self) -> &[Variable<T>] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    pub fn objective(&self) -> &LinExpr<T> {
        &self.objective
    }

    pub fn objective_constant(&self) -> T {
        self.objective_constant
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint<T>> {
        self.constraint_index.get(name).map(|&i| &self.constraints[i])
    }

    pub fn num_binaries(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count()
    }

    pub fn objective_value(&self, values: &[T]) -> T {
        self.objective.evaluate(values) + self.objective_constant
    }

    /// True when `values` satisfies every bound, integrality and constraint.
    pub fn is_feasible(&self, values: &[T]) -> bool {
        if values.len() != self.variables.len() {
            return false;
        }
        let bounds_ok = self.variables.iter().zip(values).all(|(v, &x)| {
            let in_bounds = v.lower.approx_le(x) && v.upper.is_none_or(|u| x.approx_le(u));
            let integral = !v.kind.is_integral() || x.approx_eq(Scalar::floor(x + T::from_data(0.5)));
            in_bounds && integral
        });
        bounds_ok && self.constraints.iter().all(|c| c.is_satisfied(values))
    }

    /// Structural checks performed before any backend sees the model.
    pub fn validate(&self) -> Result<(), MipError> {
        let n = self.variables.len();
        for v in &self.variables {
            if let Some(u) = v.upper {
                if u < v.lower {
                    return Err(MipError::EmptyDomain {
                        name: v.name.clone(),
                        lower: v.lower.to_f64_lossy(),
                        upper: u.to_f64_lossy(),
                    });
                }
            }
        }
        for c in &self.constraints {
            if c.expr.is_empty() {
                return Err(MipError::EmptyConstraint(c.name.clone()));
            }
            if let Some(&(v, _)) = c.expr.terms.iter().find(|(v, _)| v.0 >= n) {
                return Err(MipError::UnknownVariable {
                    constraint: c.name.clone(),
                    index: v.0,
                });
            }
        }
        if let Some(&(v, _)) = self.objective.terms.iter().find(|(v, _)| v.0 >= n) {
            return Err(MipError::UnknownVariable {
                constraint: "objective".into(),
                index: v.0,
            });
        }
        Ok(())
    }
}

/// Solver controls. Serialized with the configuration keys `gap`,
/// `time_limit` and `threads`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveControls {
    #[serde(rename = "gap")]
    pub gap_tolerance: f64,
    #[serde(rename = "time_limit")]
    pub time_limit_seconds: f64,
    pub threads: u32,
}

impl Default for SolveControls {
    fn default() -> Self {
        Self {
            gap_tolerance: 1e-4,
            time_limit_seconds: 100.0,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    FeasibleGap,
    Infeasible,
    TimeLimit,
    Error,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleGap => "feasible_gap",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Error => "error",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome<T> {
    pub status: SolveStatus,
    pub objective_value: Option<T>,
    /// Relative optimality gap reported by the backend.
    pub gap: Option<f64>,
    /// Values indexed by [`VarId`]; present iff an incumbent exists.
    pub values: Option<Vec<T>>,
    pub wall_time: f64,
    pub message: Option<String>,
}

impl<T: Scalar> SolveOutcome<T> {
    pub fn has_solution(&self) -> bool {
        self.values.is_some()
    }

    pub fn value(&self, var: VarId) -> Option<T> {
        self.values.as_ref().map(|v| v[var.0])
    }

    pub fn value_by_name(&self, model: &MipModel<T>, name: &str) -> Option<T> {
        model.var(name).and_then(|v| self.value(v))
    }

    pub(crate) fn failed(status: SolveStatus, wall_time: f64, message: impl Into<String>) -> Self {
        Self {
            status,
            objective_value: None,
            gap: None,
            values: None,
            wall_time,
            message: Some(message.into()),
        }
    }
}

pub trait MipBackend<T: Scalar>: Send + Sync {
    fn name(&self) -> &'static str;

    fn solve(&self, model: &MipModel<T>, controls: &SolveControls) -> Result<SolveOutcome<T>, MipError>;
}

/// Snaps integral variables to the nearest integer when within
/// [`INTEGRALITY_TOLERANCE`]. Returns the offending variable otherwise.
pub(crate) fn snap_integral<T: Scalar>(model: &MipModel<T>, values: &mut [T]) -> Result<(), String> {
    for (v, x) in model.variables().iter().zip(values.iter_mut()) {
        if !v.kind.is_integral() {
            continue;
        }
        let xf = x.to_f64_lossy();
        let r = xf.round();
        if (xf - r).abs() > INTEGRALITY_TOLERANCE {
            return Err(format!("variable `{}` = {xf} is not integral", v.name));
        }
        *x = T::from_data(r);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_rejected() {
        let mut m = MipModel::<f64>::new("t");
        m.add_binary("x").unwrap();
        assert!(matches!(m.add_binary("x"), Err(MipError::DuplicateVariable(_))));
        let x = m.var("x").unwrap();
        m.add_constraint("c", LinExpr::new().with(x, 1.0), ConstraintSense::Le, 1.0)
            .unwrap();
        assert!(matches!(
            m.add_constraint("c", LinExpr::new().with(x, 1.0), ConstraintSense::Le, 1.0),
            Err(MipError::DuplicateConstraint(_))
        ));
    }

    #[test]
    fn validate_catches_dangling_and_empty() {
        let mut m = MipModel::<f64>::new("t");
        m.add_binary("x").unwrap();
        m.add_constraint("bad", LinExpr::new().with(VarId(3), 1.0), ConstraintSense::Le, 1.0)
            .unwrap();
        assert!(matches!(m.validate(), Err(MipError::UnknownVariable { .. })));

        let mut m = MipModel::<f64>::new("t");
        m.add_constraint("empty", LinExpr::new(), ConstraintSense::Le, 1.0)
            .unwrap();
        assert!(matches!(m.validate(), Err(MipError::EmptyConstraint(_))));
    }

    #[test]
    fn snapping_rounds_near_integers_only() {
        let mut m = MipModel::<f64>::new("t");
        m.add_binary("x").unwrap();
        m.add_continuous("y").unwrap();
        let mut vals = vec![0.9999999, 0.3];
        snap_integral(&m, &mut vals).unwrap();
        assert_eq!(vals, vec![1.0, 0.3]);
        let mut vals = vec![0.5, 0.3];
        assert!(snap_integral(&m, &mut vals).is_err());
    }
}

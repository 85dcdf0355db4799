//! Exhaustive reference backend for tiny models.
//!
//! Binary variables are enumerated depth-first. Every other variable must be
//! a "slack": it may appear in at most one term per constraint alongside
//! binaries only, so once the binaries are fixed its feasible interval is the
//! intersection of one-variable bounds and the objective picks an end point.
//! All arithmetic happens in `T`, so with a rational scalar the optimum is
//! exact.

use std::time::Instant;

use super::{ConstraintSense, MipBackend, MipError, MipModel, SolveControls, SolveOutcome, SolveStatus, VarKind};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_BINARIES: usize = 30;

#[derive(Debug, Clone, Copy)]
pub struct EnumerationBackend {
    pub max_binaries: usize,
}

impl Default for EnumerationBackend {
    fn default() -> Self {
        Self {
            max_binaries: DEFAULT_MAX_BINARIES,
        }
    }
}

struct Layout<T> {
    binaries: Vec<usize>,
    slacks: Vec<usize>,
    /// For each constraint: the single non-binary variable and its coefficient.
    slack_of: Vec<Option<(usize, T)>>,
    /// For each constraint: binary terms only.
    binary_terms: Vec<Vec<(usize, T)>>,
    costs: Vec<T>,
}

impl<T: Scalar> Layout<T> {
    fn new(model: &MipModel<T>) -> Result<Self, MipError> {
        let vars = model.variables();
        let is_bin = |i: usize| vars[i].kind == VarKind::Binary;
        let binaries: Vec<usize> = (0..vars.len()).filter(|&i| is_bin(i)).collect();
        let slacks: Vec<usize> = (0..vars.len()).filter(|&i| !is_bin(i)).collect();
        let mut slack_of = Vec::with_capacity(model.constraints().len());
        let mut binary_terms = Vec::with_capacity(model.constraints().len());
        for c in model.constraints() {
            let mut slack: Option<(usize, T)> = None;
            let mut bins = Vec::new();
            for &(v, coef) in &c.expr.terms {
                if is_bin(v.0) {
                    bins.push((v.0, coef));
                    continue;
                }
                match &mut slack {
                    Some((s, acc)) if *s == v.0 => *acc = *acc + coef,
                    Some(_) => return Err(MipError::NotEnumerable(c.name.clone())),
                    None => slack = Some((v.0, coef)),
                }
            }
            slack_of.push(slack);
            binary_terms.push(bins);
        }
        let mut costs = vec![T::zero(); vars.len()];
        for &(v, c) in &model.objective().terms {
            costs[v.0] = costs[v.0] + c;
        }
        Ok(Self {
            binaries,
            slacks,
            slack_of,
            binary_terms,
            costs,
        })
    }
}

enum Leaf<T> {
    Infeasible,
    Unbounded,
    Feasible(T),
}

struct Search<'a, T> {
    model: &'a MipModel<T>,
    layout: Layout<T>,
    values: Vec<T>,
    best: Option<(T, Vec<T>)>,
    unbounded: bool,
    /// Constraints whose binary terms are all fixed after branching on
    /// `binaries[depth]`, grouped by depth.
    closing: Vec<Vec<usize>>,
}

impl<'a, T: Scalar> Search<'a, T> {
    fn new(model: &'a MipModel<T>, layout: Layout<T>) -> Self {
        let mut position = vec![usize::MAX; model.variables().len()];
        for (depth, &b) in layout.binaries.iter().enumerate() {
            position[b] = depth;
        }
        let mut closing = vec![Vec::new(); layout.binaries.len() + 1];
        for (ci, terms) in layout.binary_terms.iter().enumerate() {
            if layout.slack_of[ci].is_some() {
                continue;
            }
            let last = terms.iter().map(|&(v, _)| position[v]).max();
            closing[last.map_or(0, |d| d + 1)].push(ci);
        }
        let values = model.variables().iter().map(|v| v.lower).collect();
        Self {
            model,
            layout,
            values,
            best: None,
            unbounded: false,
            closing,
        }
    }

    fn pure_binary_ok(&self, ci: usize) -> bool {
        let c = &self.model.constraints()[ci];
        let lhs = self.layout.binary_terms[ci]
            .iter()
            .fold(T::zero(), |acc, &(v, coef)| acc + coef * self.values[v]);
        match c.sense {
            ConstraintSense::Le => lhs.approx_le(c.rhs),
            ConstraintSense::Ge => c.rhs.approx_le(lhs),
            ConstraintSense::Eq => lhs.approx_eq(c.rhs),
        }
    }

    fn descend(&mut self, depth: usize) {
        if self.unbounded {
            return;
        }
        for ci in 0..self.closing[depth].len() {
            if !self.pure_binary_ok(self.closing[depth][ci]) {
                return;
            }
        }
        if depth == self.layout.binaries.len() {
            match self.resolve_slacks() {
                Leaf::Infeasible => {}
                Leaf::Unbounded => self.unbounded = true,
                Leaf::Feasible(obj) => {
                    let better = match &self.best {
                        None => true,
                        Some((b, _)) => obj < *b - T::tolerance(),
                    };
                    if better {
                        self.best = Some((obj, self.values.clone()));
                    }
                }
            }
            return;
        }
        let var = self.layout.binaries[depth];
        for x in [T::zero(), T::one()] {
            self.values[var] = x;
            self.descend(depth + 1);
        }
        self.values[var] = T::zero();
    }

    fn resolve_slacks(&mut self) -> Leaf<T> {
        let vars = self.model.variables();
        let n_slacks = self.layout.slacks.len();
        let mut lo: Vec<Option<T>> = self.layout.slacks.iter().map(|&s| Some(vars[s].lower)).collect();
        let mut hi: Vec<Option<T>> = self.layout.slacks.iter().map(|&s| vars[s].upper).collect();
        let slot = |var: usize| self.layout.slacks.binary_search(&var).ok();

        for (ci, c) in self.model.constraints().iter().enumerate() {
            let Some((s, coef)) = self.layout.slack_of[ci] else {
                continue;
            };
            let fixed = self.layout.binary_terms[ci]
                .iter()
                .fold(T::zero(), |acc, &(v, k)| acc + k * self.values[v]);
            let residual = c.rhs - fixed;
            let i = slot(s).expect("slack index");
            if coef.is_zero() {
                let ok = match c.sense {
                    ConstraintSense::Le => T::zero().approx_le(residual),
                    ConstraintSense::Ge => residual.approx_le(T::zero()),
                    ConstraintSense::Eq => residual.approx_eq(T::zero()),
                };
                if !ok {
                    return Leaf::Infeasible;
                }
                continue;
            }
            let bound = residual / coef;
            let positive = coef > T::zero();
            let (tighten_hi, tighten_lo) = match c.sense {
                ConstraintSense::Le => (positive, !positive),
                ConstraintSense::Ge => (!positive, positive),
                ConstraintSense::Eq => (true, true),
            };
            if tighten_hi {
                hi[i] = Some(hi[i].map_or(bound, |h| if bound < h { bound } else { h }));
            }
            if tighten_lo {
                lo[i] = Some(lo[i].map_or(bound, |l| l.max_of(bound)));
            }
        }

        let mut objective = self.model.objective_constant();
        for &b in &self.layout.binaries {
            objective = objective + self.layout.costs[b] * self.values[b];
        }
        for i in 0..n_slacks {
            let var = self.layout.slacks[i];
            let integral = vars[var].kind == VarKind::Integer;
            let tol = T::tolerance();
            let (l, h) = if integral {
                (lo[i].map(|l| Scalar::ceil(l - tol)), hi[i].map(|h| Scalar::floor(h + tol)))
            } else {
                (lo[i], hi[i])
            };
            if let (Some(l), Some(h)) = (l, h) {
                if !l.approx_le(h) {
                    return Leaf::Infeasible;
                }
            }
            let cost = self.layout.costs[var];
            let value = if cost > T::zero() {
                match l {
                    Some(l) => l,
                    None => return Leaf::Unbounded,
                }
            } else if cost < T::zero() {
                match h {
                    Some(h) => h,
                    None => return Leaf::Unbounded,
                }
            } else {
                l.or(h).unwrap_or_else(T::zero)
            };
            self.values[var] = value;
            objective = objective + cost * value;
        }
        Leaf::Feasible(objective)
    }
}

/// Completes a candidate solution: binaries are taken from `values`, every
/// other variable is set to its cheapest value given the binaries. Returns
/// `None` when the model is not in slack form or the candidate is infeasible.
pub fn complete_start<T: Scalar>(model: &MipModel<T>, values: &[T]) -> Option<Vec<T>> {
    if values.len() != model.variables().len() {
        return None;
    }
    let layout = Layout::new(model).ok()?;
    let mut search = Search::new(model, layout);
    for &b in &search.layout.binaries {
        search.values[b] = values[b];
    }
    match search.resolve_slacks() {
        Leaf::Feasible(_) if model.is_feasible(&search.values) => Some(search.values),
        _ => None,
    }
}

impl<T: Scalar> MipBackend<T> for EnumerationBackend {
    fn name(&self) -> &'static str {
        "enumeration"
    }

    fn solve(&self, model: &MipModel<T>, _controls: &SolveControls) -> Result<SolveOutcome<T>, MipError> {
        model.validate()?;
        let start = Instant::now();
        let binaries = model.num_binaries();
        if binaries > self.max_binaries {
            return Err(MipError::TooLarge {
                binaries,
                limit: self.max_binaries,
            });
        }
        let layout = Layout::new(model)?;
        let mut search = Search::new(model, layout);
        search.descend(0);
        let wall_time = start.elapsed().as_secs_f64();
        if search.unbounded {
            return Ok(SolveOutcome::failed(SolveStatus::Error, wall_time, "unbounded"));
        }
        Ok(match search.best {
            Some((obj, values)) => SolveOutcome {
                status: SolveStatus::Optimal,
                objective_value: Some(obj),
                gap: Some(0.0),
                values: Some(values),
                wall_time,
                message: None,
            },
            None => SolveOutcome {
                status: SolveStatus::Infeasible,
                objective_value: None,
                gap: None,
                values: None,
                wall_time,
                message: None,
            },
        })
    }
}

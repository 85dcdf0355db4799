//! HiGHS backend.

use std::ffi::CString;
use std::io::Write;
use std::time::Instant;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem, Sense};

use super::{snap_integral, ConstraintSense, MipBackend, MipError, MipModel, SolveControls, SolveOutcome, SolveStatus, VarKind};
use crate::scalar::Scalar;

/// Linked HiGHS MIP solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsBackend {
    /// Echo the HiGHS log to stdout.
    pub verbose: bool,
}

impl HighsBackend {
    pub fn new() -> Self {
        Self::default()
    }
}

impl<T: Scalar> MipBackend<T> for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&self, model: &MipModel<T>, controls: &SolveControls) -> Result<SolveOutcome<T>, MipError> {
        model.validate()?;
        let start = Instant::now();

        if model.variables().is_empty() {
            return Ok(SolveOutcome {
                status: SolveStatus::Optimal,
                objective_value: Some(model.objective_constant()),
                gap: Some(0.0),
                values: Some(Vec::new()),
                wall_time: start.elapsed().as_secs_f64(),
                message: None,
            });
        }

        let mut costs = vec![0.0; model.variables().len()];
        for &(v, c) in &model.objective().terms {
            costs[v.0] += c.to_f64_lossy();
        }

        let mut problem = RowProblem::default();
        let cols: Vec<_> = model
            .variables()
            .iter()
            .zip(&costs)
            .map(|(v, &cost)| {
                let lo = v.lower.to_f64_lossy();
                let hi = v.upper.map_or(f64::INFINITY, |u| u.to_f64_lossy());
                problem.add_column_with_integrality(cost, lo..=hi, v.kind != VarKind::Continuous)
            })
            .collect();
        for c in model.constraints() {
            let row: Vec<_> = c
                .expr
                .terms
                .iter()
                .map(|&(v, coef)| (cols[v.0], coef.to_f64_lossy()))
                .collect();
            let rhs = c.rhs.to_f64_lossy();
            match c.sense {
                ConstraintSense::Le => problem.add_row(..=rhs, &row),
                ConstraintSense::Ge => problem.add_row(rhs.., &row),
                ConstraintSense::Eq => problem.add_row(rhs..=rhs, &row),
            }
        }

        let mut highs = problem
            .try_optimise(Sense::Minimise)
            .map_err(|s| MipError::Backend(format!("HiGHS rejected the model: {s:?}")))?;
        if self.verbose {
            highs.set_option("output_flag", true);
            highs.set_option("log_to_console", true);
        } else {
            highs.make_quiet();
        }
        highs.set_option("mip_rel_gap", controls.gap_tolerance);
        highs.set_option("time_limit", controls.time_limit_seconds);
        highs.set_option("mip_feasibility_tolerance", super::INTEGRALITY_TOLERANCE);
        if let Some(start) = model.start().filter(|s| s.len() == cols.len()) {
            let start: Vec<f64> = start.iter().map(|v| v.to_f64_lossy()).collect();
            if highs.try_set_solution(Some(&start), None, None, None).is_err() {
                log::debug!("HiGHS rejected the starting solution for {}", model.name);
            }
        }
        // The worker pool is process-global in HiGHS; ignore refusals to resize it.
        let _ = highs.try_set_option("threads", controls.threads.max(1) as i32);

        let solved = highs
            .try_solve()
            .map_err(|s| MipError::Backend(format!("HiGHS run failed: {s:?}")))?;
        let wall_time = start.elapsed().as_secs_f64();
        let model_status = solved.status();
        let has_incumbent = matches!(solved.primal_solution_status(), HighsSolutionStatus::Feasible);
        let has_integers = model.variables().iter().any(|v| v.kind.is_integral());
        let gap = if has_integers { solved.mip_gap() } else { 0.0 };

        let status = match model_status {
            HighsModelStatus::Optimal if gap <= controls.gap_tolerance + 1e-12 => SolveStatus::Optimal,
            HighsModelStatus::Optimal => SolveStatus::FeasibleGap,
            HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => SolveStatus::Infeasible,
            HighsModelStatus::ReachedTimeLimit => SolveStatus::TimeLimit,
            HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ReachedSolutionLimit
            | HighsModelStatus::ReachedInterrupt
                if has_incumbent =>
            {
                SolveStatus::FeasibleGap
            }
            other => {
                return Ok(SolveOutcome::failed(
                    SolveStatus::Error,
                    wall_time,
                    format!("HiGHS model status {other:?}"),
                ))
            }
        };

        if !has_incumbent || status == SolveStatus::Infeasible {
            return Ok(SolveOutcome {
                status,
                objective_value: None,
                gap: None,
                values: None,
                wall_time,
                message: None,
            });
        }

        let mut values: Vec<T> = solved
            .get_solution()
            .columns()
            .iter()
            .map(|&x| T::from_data(x))
            .collect();
        if let Err(msg) = snap_integral(model, &mut values) {
            return Ok(SolveOutcome::failed(SolveStatus::Error, wall_time, msg));
        }
        let objective = model.objective_value(&values);
        Ok(SolveOutcome {
            status,
            objective_value: Some(objective),
            gap: Some(if gap.is_finite() { gap } else { 0.0 }),
            values: Some(values),
            wall_time,
            message: None,
        })
    }
}

/// Result of solving an LP-format file through HiGHS's own reader.
#[derive(Debug, Clone, PartialEq)]
pub struct LpFileOutcome {
    pub status: SolveStatus,
    pub objective_value: Option<f64>,
}

/// Parses and solves LP text with the HiGHS file reader, bypassing this
/// crate's model layer entirely. Used to cross-check [`super::export_lp`].
pub fn solve_lp_text(text: &str, controls: &SolveControls) -> Result<LpFileOutcome, MipError> {
    let mut file = tempfile::Builder::new().suffix(".lp").tempfile()?;
    file.write_all(text.as_bytes())?;
    file.flush()?;
    let path = CString::new(file.path().to_string_lossy().as_bytes())
        .map_err(|e| MipError::Backend(e.to_string()))?;

    unsafe {
        use highs_sys::*;
        let h = Highs_create();
        if h.is_null() {
            return Err(MipError::BackendUnavailable("Highs_create returned null".into()));
        }
        let set_bool = |name: &str, v: bool| {
            let n = CString::new(name).unwrap();
            Highs_setBoolOptionValue(h, n.as_ptr(), v as HighsInt)
        };
        let set_double = |name: &str, v: f64| {
            let n = CString::new(name).unwrap();
            Highs_setDoubleOptionValue(h, n.as_ptr(), v)
        };
        set_bool("output_flag", false);
        set_double("mip_rel_gap", controls.gap_tolerance);
        set_double("time_limit", controls.time_limit_seconds);

        let read = Highs_readModel(h, path.as_ptr());
        if read == kHighsStatusError {
            Highs_destroy(h);
            return Err(MipError::Backend("HiGHS could not parse the LP file".into()));
        }
        Highs_run(h);
        let status = match Highs_getModelStatus(h) {
            s if s == kHighsModelStatusOptimal => SolveStatus::Optimal,
            s if s == kHighsModelStatusInfeasible || s == kHighsModelStatusUnboundedOrInfeasible => {
                SolveStatus::Infeasible
            }
            s if s == kHighsModelStatusTimeLimit => SolveStatus::TimeLimit,
            _ => SolveStatus::Error,
        };
        let objective_value = matches!(status, SolveStatus::Optimal | SolveStatus::TimeLimit)
            .then(|| Highs_getObjectiveValue(h));
        Highs_destroy(h);
        Ok(LpFileOutcome {
            status,
            objective_value,
        })
    }
}

//! CPLEX LP-format writer.

use std::fmt::Write;

use super::{LinExpr, MipError, MipModel, VarKind};
use crate::scalar::Scalar;

const TERMS_PER_LINE: usize = 8;

/// LP names may not contain brackets; `x[0,1]` becomes `x(0,1)`.
fn lp_name(name: &str) -> String {
    name.chars()
        .map(|c| match c {
            '[' => '(',
            ']' => ')',
            ' ' | ':' | '+' | '-' | '*' | '^' | '<' | '>' | '=' => '_',
            c => c,
        })
        .collect()
}

fn number(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn write_expr<T: Scalar>(out: &mut String, model: &MipModel<T>, expr: &LinExpr<T>) {
    for (i, &(var, coef)) in expr.terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let c = coef.to_f64_lossy();
        let sign = if c < 0.0 { '-' } else { '+' };
        if i == 0 && sign == '+' {
            let _ = write!(out, " {} {}", number(c.abs()), lp_name(&model.variables()[var.0].name));
        } else {
            let _ = write!(out, " {sign} {} {}", number(c.abs()), lp_name(&model.variables()[var.0].name));
        }
    }
}

/// Renders the model in LP format. Variables and constraints appear in
/// declaration order so the output is byte-stable.
pub fn export_lp<T: Scalar>(model: &MipModel<T>) -> Result<String, MipError> {
    model.validate()?;
    let mut out = String::new();
    let _ = writeln!(out, "\\ Model {}", lp_name(&model.name));
    out.push_str("Minimize\n obj:");
    if model.objective().is_empty() {
        match model.variables().first() {
            Some(v) => {
                let _ = write!(out, " 0 {}", lp_name(&v.name));
            }
            None => out.push_str(" 0"),
        }
    } else {
        write_expr(&mut out, model, model.objective());
    }
    let constant = model.objective_constant().to_f64_lossy();
    if constant != 0.0 {
        let sign = if constant < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {}", number(constant.abs()));
    }
    out.push_str("\nSubject To\n");
    for c in model.constraints() {
        let _ = write!(out, " {}:", lp_name(&c.name));
        write_expr(&mut out, model, &c.expr);
        let _ = writeln!(out, " {} {}", c.sense, number(c.rhs.to_f64_lossy()));
    }

    out.push_str("Bounds\n");
    for v in model.variables() {
        if v.kind == VarKind::Binary {
            continue;
        }
        let lo = v.lower.to_f64_lossy();
        match v.upper {
            Some(u) => {
                let _ = writeln!(out, " {} <= {} <= {}", number(lo), lp_name(&v.name), number(u.to_f64_lossy()));
            }
            None if lo != 0.0 => {
                let _ = writeln!(out, " {} >= {}", lp_name(&v.name), number(lo));
            }
            None => {}
        }
    }

    let integers: Vec<_> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Integer)
        .map(|v| lp_name(&v.name))
        .collect();
    if !integers.is_empty() {
        out.push_str("General\n");
        for chunk in integers.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    let binaries: Vec<_> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| lp_name(&v.name))
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        for chunk in binaries.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::ConstraintSense;

    fn one_var() -> MipModel<f64> {
        let mut m = MipModel::new("one");
        let x = m.add_var("x", VarKind::Integer).unwrap();
        m.add_constraint("lb", LinExpr::new().with(x, 1.0), ConstraintSense::Ge, 3.0)
            .unwrap();
        m.add_objective_term(x, 1.0);
        m
    }

    #[test]
    fn one_variable_model_has_single_sections() {
        let text = export_lp(&one_var()).unwrap();
        assert_eq!(text.matches("Minimize").count(), 1);
        assert_eq!(text.matches("Subject To").count(), 1);
        assert!(text.contains(" lb: 1 x >= 3\n"));
        assert!(text.contains("General\n x\n"));
    }

    #[test]
    fn export_is_deterministic() {
        let m = one_var();
        assert_eq!(export_lp(&m).unwrap(), export_lp(&m).unwrap());
    }

    #[test]
    fn bracket_names_are_rewritten() {
        assert_eq!(lp_name("x[1,2,0,0]"), "x(1,2,0,0)");
        assert_eq!(number(0.5), "0.5");
        assert_eq!(number(-3.0), "-3");
    }
}

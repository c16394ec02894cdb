use std::fmt::Write;

use super::ast::{Expr, GenProgram};

/// Canonical source text: one statement per line, every binary operation
/// parenthesized. Re-parsing the output yields an equal program.
pub fn pretty_print(program: &GenProgram) -> String {
    let mut out = String::new();
    for stmt in program.statements() {
        let _ = writeln!(out, "{} = {}", stmt.name, expr_to_string(&stmt.expr));
    }
    let _ = writeln!(out, "return {}", expr_to_string(program.result()));
    out
}

pub fn expr_to_string(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr);
    out
}

fn write_expr(out: &mut String, expr: &Expr) {
    match expr {
        Expr::VectorVar(name) | Expr::ScalarVar(name) => out.push_str(name),
        // Debug is the shortest representation that parses back exactly
        Expr::Const(v) => {
            let _ = write!(out, "{v:?}");
        }
        Expr::Binary { op, lhs, rhs } => {
            out.push('(');
            write_expr(out, lhs);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, rhs);
            out.push(')');
        }
        Expr::Dot(a, b) => call(out, "dot", &[a, b], ", "),
        Expr::Norm2(a) => call(out, "norm2", &[a], ", "),
        Expr::Max(a, b) => call(out, "max", &[a, b], ", "),
        Expr::Min(a, b) => call(out, "min", &[a, b], ", "),
        Expr::RandNormal => out.push_str("randn()"),
        Expr::RandUniform { lo, hi } => {
            let _ = write!(out, "rand({lo:?}, {hi:?})");
        }
        Expr::Choice(branches) => {
            let refs: Vec<&Expr> = branches.iter().collect();
            call(out, "choice", &refs, "; ")
        }
    }
}

fn call(out: &mut String, name: &str, args: &[&Expr], sep: &str) {
    out.push_str(name);
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        write_expr(out, a);
    }
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{built_in_final, built_in_initial, parse};

    #[test]
    fn final_program_round_trips() {
        let p = built_in_final();
        let text = pretty_print(&p);
        assert_eq!(
            text,
            "d = (x0 - x1)\n\
             norm = max(norm2(d), norm2(noise))\n\
             return ((x1 + (s * (d + (d / norm)))) + (s * (noise + (s * (noise / norm)))))\n"
        );
        assert_eq!(parse(&text).unwrap(), p);
    }

    #[test]
    fn choice_branches_use_semicolons() {
        let text = pretty_print(&built_in_initial());
        assert!(text.contains("choice((x + (n1 * noise)); (x - (n1 * noise)); (x * (n1 * noise)))"));
        assert!(text.contains("rand(0.5, 1.5)"));
    }

    #[test]
    fn nested_arithmetic_is_fully_parenthesized() {
        let p = parse("return x0 + x1 * s - noise / 2").unwrap();
        assert_eq!(
            pretty_print(&p),
            "return ((x0 + (x1 * s)) - (noise / 2.0))\n"
        );
    }

    #[test]
    fn odd_constants_round_trip() {
        let p = parse("return x0 * 1e-7 + x1 * -2.5e20 - noise * 0.1").unwrap();
        assert_eq!(parse(&pretty_print(&p)).unwrap(), p);
    }
}

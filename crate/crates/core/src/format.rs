//! Infix printer with minimal parentheses.
//!
//! Output re-parses to a structurally equal tree for every tree the parser
//! can produce. Negative and folded constants print as plain numbers, so they
//! come back as `Neg(..)` or `Int`/`Real` leaves.

use std::fmt::{self, Write};

use crate::expr::{Expr, ExprKind};

const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 4;

fn is_negative_leaf(e: &Expr) -> bool {
    match e.kind() {
        ExprKind::Int(n) => *n < 0,
        ExprKind::Real(x) | ExprKind::Folded { value: x, .. } => x.is_sign_negative() && !x.is_nan(),
        _ => false,
    }
}

fn precedence(e: &Expr) -> u8 {
    match e.kind() {
        ExprKind::Binary(op, _, _) => op.precedence(),
        ExprKind::Neg(_) => PREC_UNARY,
        _ if is_negative_leaf(e) => PREC_UNARY,
        _ => PREC_ATOM,
    }
}

/// Shortest decimal text for a double that reads back as a real literal.
pub(crate) fn real_literal(x: f64) -> String {
    format!("{x:?}")
}

/// Folded constants print as integers when they are exactly integral.
pub(crate) fn folded_literal(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 9_007_199_254_740_992.0 {
        format!("{}", x as i64)
    } else {
        real_literal(x)
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e.kind() {
        ExprKind::Var(v) => {
            let _ = write!(out, "x{}", v.0);
        }
        ExprKind::Int(n) => {
            let _ = write!(out, "{n}");
        }
        ExprKind::Real(x) => out.push_str(&real_literal(*x)),
        ExprKind::Folded { value, .. } => out.push_str(&folded_literal(*value)),
        ExprKind::Neg(c) => {
            out.push('-');
            let parens = precedence(c) <= PREC_UNARY;
            write_operand(out, c, parens);
        }
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            write_operand(out, l, precedence(l) < p);
            let _ = write!(out, " {} ", op.symbol());
            let parens = precedence(r) <= p || precedence(r) == PREC_UNARY;
            write_operand(out, r, parens);
        }
        ExprKind::Func(f, c) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(out, c);
            out.push(')');
        }
    }
}

fn write_operand(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

/// Render `e` as infix text.
pub fn format_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_expr(self))
    }
}

/// Indented tree dump, one node per line.
pub fn format_tree(e: &Expr) -> String {
    fn go(out: &mut String, e: &Expr, depth: usize) {
        let pad = "  ".repeat(depth);
        match e.kind() {
            ExprKind::Var(v) => {
                let _ = writeln!(out, "{pad}Var x{}", v.0);
            }
            ExprKind::Int(n) => {
                let _ = writeln!(out, "{pad}Int {n}");
            }
            ExprKind::Real(x) => {
                let _ = writeln!(out, "{pad}Real {x:?}");
            }
            ExprKind::Folded { value, provenance } => {
                let _ = writeln!(out, "{pad}Folded {value:?}  <- {provenance}");
            }
            ExprKind::Neg(c) => {
                let _ = writeln!(out, "{pad}Neg");
                go(out, c, depth + 1);
            }
            ExprKind::Binary(op, l, r) => {
                let _ = writeln!(out, "{pad}{op:?}");
                go(out, l, depth + 1);
                go(out, r, depth + 1);
            }
            ExprKind::Func(f, c) => {
                let _ = writeln!(out, "{pad}{}", f.name());
                go(out, c, depth + 1);
            }
        }
    }
    let mut out = String::new();
    go(&mut out, e, 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;

    fn x(i: usize) -> Expr {
        Expr::var(i)
    }

    #[test]
    fn basic() {
        assert_eq!(format_expr(&(x(0) + Expr::one())), "x0 + 1");
        assert_eq!(format_expr(&(Expr::int(3) * x(0)).exp()), "exp(3 * x0)");
    }

    #[test]
    fn folded_prints_value() {
        let three = Expr::int(3);
        let prov = three.clone() * three.clone() * three.clone() * three;
        assert_eq!(format_expr(&Expr::folded(81.0, prov)), "81");
        assert_eq!(format_expr(&Expr::folded(5.29, Expr::real(2.3) * Expr::real(2.3))), "5.29");
    }

    #[test]
    fn parentheses_are_minimal_but_sufficient() {
        let cases = [
            "x0 - (x1 - x2)",
            "x0 - x1 - x2",
            "x0 / (x1 * x2)",
            "x0 * x1 / x2",
            "(x0 + x1) * x2",
            "x0 + x1 * x2",
            "-(x0 + x1)",
            "-x0 * x1",
            "x0 - (-x1)",
            "-(-x0)",
            "x0 + (x1 + x2)",
            "sqrt(sqrt(x1 + sqrt(x2 + x3)))",
            "2.3 * x0 + 1e21",
        ];
        for text in cases {
            let e = parse_expr(text).unwrap();
            assert_eq!(format_expr(&e), text);
            assert_eq!(parse_expr(&format_expr(&e)).unwrap(), e);
        }
    }

    #[test]
    fn negative_constants() {
        assert_eq!(format_expr(&(x(0) - Expr::int(-3))), "x0 - (-3)");
        assert_eq!(format_expr(&(Expr::int(-3) * x(0))), "-3 * x0");
        assert_eq!(format_expr(&Expr::real(-0.5)), "-0.5");
    }
}

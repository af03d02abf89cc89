//! Bottom-up rewriting to a fixpoint.
//!
//! [`simplify_once`] makes one pass: children first, then at most one rule
//! at each node (the first match in [`catalog`] order). [`simplify`] repeats
//! passes until nothing changes.
//!
//! A node that comes out of a pass unchanged is in normal form and is marked
//! as such, so later passes and later `simplify` calls skip it. Differentiation
//! relies on this to keep interleaved simplification linear in tree size.

mod fold;
mod rules;

pub use fold::{fold_constants, fold_constants_with};
pub use rules::{catalog, rule_by_name, Rule};

use crate::expr::{Expr, ExprKind};

/// One applied rewrite, for `--explain` traces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleApplication {
    pub rule: &'static str,
    /// Child-index path from the root of the pass, e.g. `/0/1`; `/` is the root.
    pub path: String,
}

impl std::fmt::Display for RuleApplication {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} @ {}", self.rule, self.path)
    }
}

/// Counters collected while simplifying or differentiating.
#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    /// Exact integer folds that overflowed `i64` and were promoted to double.
    pub overflow_promotions: usize,
    pub rewrites: usize,
    pub passes: usize,
    /// Times the fixpoint loop stopped at its iteration cap. Should stay 0.
    pub cap_hits: usize,
    trace: Option<Vec<RuleApplication>>,
}

impl Diagnostics {
    /// Diagnostics that also record every rule application.
    pub fn traced() -> Diagnostics {
        Diagnostics {
            trace: Some(Vec::new()),
            ..Diagnostics::default()
        }
    }

    pub fn trace(&self) -> &[RuleApplication] {
        self.trace.as_deref().unwrap_or(&[])
    }

    fn record(&mut self, rule: &'static str, path: &[u8]) {
        self.rewrites += 1;
        if let Some(trace) = self.trace.as_mut() {
            let path = if path.is_empty() {
                "/".to_string()
            } else {
                path.iter().map(|i| format!("/{i}")).collect()
            };
            trace.push(RuleApplication { rule, path });
        }
    }
}

fn pass(e: &Expr, diag: &mut Diagnostics, path: &mut Vec<u8>) -> Expr {
    if e.is_marked_normal() {
        return e.clone();
    }
    let rebuilt = match e.kind() {
        ExprKind::Neg(c) => {
            path.push(0);
            let c2 = pass(c, diag, path);
            path.pop();
            if Expr::ptr_eq(c, &c2) {
                e.clone()
            } else {
                Expr::neg(c2)
            }
        }
        ExprKind::Func(f, c) => {
            path.push(0);
            let c2 = pass(c, diag, path);
            path.pop();
            if Expr::ptr_eq(c, &c2) {
                e.clone()
            } else {
                Expr::func(*f, c2)
            }
        }
        ExprKind::Binary(op, l, r) => {
            path.push(0);
            let l2 = pass(l, diag, path);
            path.pop();
            path.push(1);
            let r2 = pass(r, diag, path);
            path.pop();
            if Expr::ptr_eq(l, &l2) && Expr::ptr_eq(r, &r2) {
                e.clone()
            } else {
                Expr::binary(*op, l2, r2)
            }
        }
        _ => e.clone(),
    };
    for rule in catalog() {
        if let Some(out) = rule.try_apply(&rebuilt, diag) {
            diag.record(rule.name, path);
            return out;
        }
    }
    if Expr::ptr_eq(&rebuilt, e) {
        e.mark_normal();
    }
    rebuilt
}

/// One bottom-up rewriting pass.
pub fn simplify_once(e: &Expr) -> Expr {
    simplify_once_with(e, &mut Diagnostics::default())
}

pub fn simplify_once_with(e: &Expr, diag: &mut Diagnostics) -> Expr {
    pass(e, diag, &mut Vec::new())
}

/// Hard bound on fixpoint passes for `e`.
pub fn iteration_cap(e: &Expr) -> usize {
    2 * e.node_count()
}

/// Rewrite to normal form.
pub fn simplify(e: &Expr) -> Expr {
    simplify_with(e, &mut Diagnostics::default())
}

pub fn simplify_with(e: &Expr, diag: &mut Diagnostics) -> Expr {
    let mut current = e.clone();
    for _ in 0..iteration_cap(e) {
        diag.passes += 1;
        let next = simplify_once_with(&current, diag);
        if Expr::ptr_eq(&next, &current) {
            return current;
        }
        current = next;
    }
    diag.cap_hits += 1;
    current
}

/// True if no catalog rule matches anywhere in `e`.
pub fn is_normal_form(e: &Expr) -> bool {
    Expr::ptr_eq(&simplify_once(e), e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;

    fn p(text: &str) -> Expr {
        parse_expr(text).unwrap()
    }

    #[test]
    fn single_rules_through_simplify_once() {
        assert_eq!(simplify_once(&(Expr::var(3) + Expr::zero())), Expr::var(3));
        assert_eq!(simplify_once(&p("3*(4*x0)")), Expr::int(12) * Expr::var(0));
        assert_eq!(simplify_once(&p("exp(x0)/exp(x0)")), Expr::one());
    }

    #[test]
    fn blow_up_example_collapses() {
        let raw = p("0*(x1*exp(x2)) + 2*(1*exp(x2) + x1*(exp(x2)*0))");
        let s = simplify(&raw);
        assert_eq!(s, p("2*exp(x2)"));
        assert_eq!(s.node_count(), 4);
    }

    #[test]
    fn normal_forms_are_fixed() {
        assert_eq!(simplify(&Expr::var(0)), Expr::var(0));
        assert!(is_normal_form(&p("2*exp(x2)")));
        assert!(!is_normal_form(&p("exp(x2)*2")));
    }

    #[test]
    fn real_coefficients_fold_once() {
        let s = simplify(&p("2.3*(2.3*exp(x0))"));
        match s.kind() {
            ExprKind::Binary(crate::expr::BinOp::Mul, c, rest) => {
                assert_eq!(c.constant_value(), Some(2.3 * 2.3));
                assert!((c.constant_value().unwrap() - 5.29).abs() < 1e-12);
                assert_eq!(*rest, p("exp(x0)"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn x_minus_x_survives() {
        assert_eq!(simplify(&p("x0 - x0")), p("x0 - x0"));
    }

    #[test]
    fn trace_reports_rule_and_path() {
        let mut diag = Diagnostics::traced();
        let s = simplify_with(&p("x0 * (x1 + 0)"), &mut diag);
        assert_eq!(s, p("x0 * x1"));
        let lines: Vec<String> = diag.trace().iter().map(ToString::to_string).collect();
        assert_eq!(lines, vec!["add-zero @ /1".to_string()]);
    }

    #[test]
    fn marked_nodes_are_skipped_consistently() {
        let e = p("exp(x0)*1 + x1*0");
        let first = simplify(&e);
        // a second run over the same input gives the same answer
        assert_eq!(simplify(&e), first);
        assert_eq!(first, p("exp(x0)"));
        let mut diag = Diagnostics::default();
        let again = simplify_with(&first, &mut diag);
        assert!(Expr::ptr_eq(&again, &first));
        assert_eq!(diag.rewrites, 0);
    }
}

//! Constant arithmetic.
//!
//! Integer operands fold exactly while the result fits in `i64`; on overflow
//! the result is promoted to a double-valued `Folded` node and the event is
//! counted in [`Diagnostics`]. Any real operand makes the result a `Folded`
//! double computed once.

use crate::expr::{BinOp, Expr, ExprKind, Func};

use super::Diagnostics;

#[derive(Copy, Clone, Debug, PartialEq)]
enum Const {
    Int(i64),
    Float(f64),
}

impl Const {
    fn of(e: &Expr) -> Option<Const> {
        match e.kind() {
            ExprKind::Int(n) => Some(Const::Int(*n)),
            ExprKind::Real(x) => Some(Const::Float(*x)),
            ExprKind::Folded { value, .. } => Some(Const::Float(*value)),
            _ => None,
        }
    }

    fn as_f64(self) -> f64 {
        match self {
            Const::Int(n) => n as f64,
            Const::Float(x) => x,
        }
    }
}

/// Fold `left op right` where both are constant leaves. `provenance` is the
/// node being replaced.
pub(crate) fn fold_binary(
    op: BinOp,
    left: &Expr,
    right: &Expr,
    provenance: &Expr,
    diag: &mut Diagnostics,
) -> Option<Expr> {
    let a = Const::of(left)?;
    let b = Const::of(right)?;
    if let (Const::Int(a), Const::Int(b)) = (a, b) {
        let exact = match op {
            BinOp::Add => a.checked_add(b),
            BinOp::Sub => a.checked_sub(b),
            BinOp::Mul => a.checked_mul(b),
            BinOp::Div => {
                if b != 0 && a.checked_rem(b) == Some(0) {
                    a.checked_div(b)
                } else {
                    // inexact quotients are not an overflow, just real-valued
                    return Some(Expr::folded(op.apply(a as f64, b as f64), provenance.clone()));
                }
            }
        };
        return Some(match exact {
            Some(n) => Expr::int(n),
            None => {
                diag.overflow_promotions += 1;
                Expr::folded(op.apply(a as f64, b as f64), provenance.clone())
            }
        });
    }
    Some(Expr::folded(op.apply(a.as_f64(), b.as_f64()), provenance.clone()))
}

/// Fold `-c`.
pub(crate) fn fold_neg(child: &Expr, provenance: &Expr, diag: &mut Diagnostics) -> Option<Expr> {
    match Const::of(child)? {
        Const::Int(n) => Some(match n.checked_neg() {
            Some(m) => Expr::int(m),
            None => {
                diag.overflow_promotions += 1;
                Expr::folded(-(n as f64), provenance.clone())
            }
        }),
        Const::Float(x) => Some(Expr::folded(-x, provenance.clone())),
    }
}

/// Fold `f(c)`.
pub(crate) fn fold_func(f: Func, child: &Expr, provenance: &Expr) -> Option<Expr> {
    let c = Const::of(child)?;
    Some(Expr::folded(f.apply(c.as_f64()), provenance.clone()))
}

/// Replace every maximal variable-free subtree by a single constant.
///
/// Integer-only arithmetic stays an exact `Int` while representable. Constant
/// leaves are left as they are. No algebraic rewriting is done here.
pub fn fold_constants(e: &Expr) -> Expr {
    fold_constants_with(e, &mut Diagnostics::default())
}

pub fn fold_constants_with(e: &Expr, diag: &mut Diagnostics) -> Expr {
    if e.is_constant() {
        return fold_subtree(e, diag);
    }
    match e.kind() {
        ExprKind::Neg(c) => Expr::neg(fold_constants_with(c, diag)),
        ExprKind::Binary(op, l, r) => {
            Expr::binary(*op, fold_constants_with(l, diag), fold_constants_with(r, diag))
        }
        ExprKind::Func(f, c) => Expr::func(*f, fold_constants_with(c, diag)),
        _ => e.clone(),
    }
}

/// Collapse a variable-free tree to one leaf, bottom-up.
fn fold_subtree(e: &Expr, diag: &mut Diagnostics) -> Expr {
    match e.kind() {
        ExprKind::Var(_) => unreachable!("fold_subtree called on a tree with variables"),
        ExprKind::Int(_) | ExprKind::Real(_) | ExprKind::Folded { .. } => e.clone(),
        ExprKind::Neg(c) => {
            let c = fold_subtree(c, diag);
            fold_neg(&c, e, diag).expect("folded child is a constant leaf")
        }
        ExprKind::Binary(op, l, r) => {
            let l = fold_subtree(l, diag);
            let r = fold_subtree(r, diag);
            fold_binary(*op, &l, &r, e, diag).expect("folded children are constant leaves")
        }
        ExprKind::Func(f, c) => {
            let c = fold_subtree(c, diag);
            fold_func(*f, &c, e).expect("folded child is a constant leaf")
        }
    }
}

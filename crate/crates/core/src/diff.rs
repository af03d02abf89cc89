//! Structural differentiation.
//!
//! [`differentiate_raw`] applies the textbook rules and nothing else, which
//! makes trees grow quickly with the order. [`differentiate`] simplifies every
//! sub-derivative before it is combined and simplifies the combined node
//! again, so results stay in normal form at every level of the recursion.

use crate::expr::{BinOp, Expr, ExprKind, Func, VarId};
use crate::simplify::{simplify_with, Diagnostics};

/// Derivative of `f(F)` with respect to `F`, times `dF`, before simplification.
fn chain(f: Func, arg: &Expr, d_arg: Expr) -> Expr {
    match f {
        Func::Exp => Expr::func(Func::Exp, arg.clone()) * d_arg,
        Func::Log => d_arg / arg.clone(),
        Func::Sin => Expr::func(Func::Cos, arg.clone()) * d_arg,
        Func::Cos => -(Expr::func(Func::Sin, arg.clone()) * d_arg),
        Func::Tan => {
            let t = Expr::func(Func::Tan, arg.clone());
            (Expr::one() + t.clone() * t) * d_arg
        }
        Func::Sqrt => d_arg / (Expr::int(2) * Expr::func(Func::Sqrt, arg.clone())),
    }
}

fn combine(op: BinOp, l: &Expr, r: &Expr, dl: Expr, dr: Expr) -> Expr {
    match op {
        BinOp::Add => dl + dr,
        BinOp::Sub => dl - dr,
        BinOp::Mul => dl * r.clone() + l.clone() * dr,
        BinOp::Div => (dl * r.clone() - l.clone() * dr) / (r.clone() * r.clone()),
    }
}

fn leaf_derivative(e: &Expr, v: VarId) -> Option<Expr> {
    match e.kind() {
        ExprKind::Var(w) if *w == v => Some(Expr::one()),
        ExprKind::Var(_) | ExprKind::Int(_) | ExprKind::Real(_) | ExprKind::Folded { .. } => {
            Some(Expr::zero())
        }
        _ => None,
    }
}

/// Partial derivative with no simplification at all.
pub fn differentiate_raw(e: &Expr, v: VarId) -> Expr {
    if let Some(d) = leaf_derivative(e, v) {
        return d;
    }
    match e.kind() {
        ExprKind::Neg(c) => -differentiate_raw(c, v),
        ExprKind::Binary(op, l, r) => {
            combine(*op, l, r, differentiate_raw(l, v), differentiate_raw(r, v))
        }
        ExprKind::Func(f, c) => chain(*f, c, differentiate_raw(c, v)),
        _ => unreachable!("leaves handled above"),
    }
}

/// Partial derivative with interleaved simplification; the result is in
/// normal form.
pub fn differentiate(e: &Expr, v: VarId) -> Expr {
    differentiate_with(e, v, &mut Diagnostics::default())
}

pub fn differentiate_with(e: &Expr, v: VarId, diag: &mut Diagnostics) -> Expr {
    if let Some(d) = leaf_derivative(e, v) {
        return d;
    }
    let combined = match e.kind() {
        ExprKind::Neg(c) => -differentiate_with(c, v, diag),
        ExprKind::Binary(op, l, r) => {
            let dl = differentiate_with(l, v, diag);
            let dr = differentiate_with(r, v, diag);
            combine(*op, l, r, dl, dr)
        }
        ExprKind::Func(f, c) => {
            let dc = differentiate_with(c, v, diag);
            chain(*f, c, dc)
        }
        _ => unreachable!("leaves handled above"),
    };
    simplify_with(&combined, diag)
}

/// `n`-th partial derivative by repeated differentiation. `n = 0` returns the
/// simplified input.
pub fn derivative_n(e: &Expr, v: VarId, n: u32) -> Expr {
    derivative_n_with(e, v, n, &mut Diagnostics::default())
}

pub fn derivative_n_with(e: &Expr, v: VarId, n: u32, diag: &mut Diagnostics) -> Expr {
    if n == 0 {
        return simplify_with(e, diag);
    }
    let mut current = e.clone();
    for _ in 0..n {
        current = differentiate_with(&current, v, diag);
    }
    current
}

/// `n`-th derivative with no simplification anywhere.
pub fn derivative_n_raw(e: &Expr, v: VarId, n: u32) -> Expr {
    let mut current = e.clone();
    for _ in 0..n {
        current = differentiate_raw(&current, v);
    }
    current
}

/// All first partials, `arity` of them.
pub fn gradient(e: &Expr, arity: usize) -> Vec<Expr> {
    (0..arity).map(|i| differentiate(e, VarId(i))).collect()
}

/// What to differentiate and how.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct DiffRequest {
    pub wrt: VarId,
    pub order: u32,
    /// Simplify during differentiation. Turning this off reproduces the
    /// unsimplified blow-up.
    pub interleave: bool,
}

impl DiffRequest {
    pub fn new(wrt: VarId, order: u32) -> DiffRequest {
        DiffRequest {
            wrt,
            order,
            interleave: true,
        }
    }

    pub fn raw(self) -> DiffRequest {
        DiffRequest {
            interleave: false,
            ..self
        }
    }

    pub fn apply(&self, e: &Expr) -> Expr {
        self.apply_with(e, &mut Diagnostics::default())
    }

    pub fn apply_with(&self, e: &Expr, diag: &mut Diagnostics) -> Expr {
        if self.interleave {
            derivative_n_with(e, self.wrt, self.order, diag)
        } else {
            derivative_n_raw(e, self.wrt, self.order)
        }
    }
}

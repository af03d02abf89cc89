//! The rewrite catalog, in application order.
//!
//! Each rule looks at one node and at most its grandchildren. Constant
//! folding comes first, then the algebraic identities. Replacements never
//! have more nodes than the fragment they replace.

use crate::expr::{BinOp, Expr, ExprKind};

use super::fold::{fold_binary, fold_func, fold_neg};
use super::Diagnostics;

/// A named pattern -> replacement step.
pub struct Rule {
    pub name: &'static str,
    /// Human-readable pattern, e.g. `x + 0 -> x`.
    pub pattern: &'static str,
    apply: fn(&Expr, &mut Diagnostics) -> Option<Expr>,
}

impl Rule {
    /// Rewrite `e` at its root, or `None` if the rule does not match.
    pub fn try_apply(&self, e: &Expr, diag: &mut Diagnostics) -> Option<Expr> {
        (self.apply)(e, diag)
    }
}

impl std::fmt::Debug for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({})", self.name, self.pattern)
    }
}

static CATALOG: [Rule; 20] = [
    Rule { name: "fold-binary", pattern: "c1 op c2 -> c", apply: fold_binary_rule },
    Rule { name: "fold-unary", pattern: "-c -> c', f(c) -> c'", apply: fold_unary_rule },
    Rule { name: "fold-mul-chain", pattern: "c1 * (c2 * x) -> (c1 c2) * x", apply: fold_mul_chain },
    Rule { name: "mul-const-left", pattern: "x * c -> c * x", apply: mul_const_left },
    Rule { name: "add-zero", pattern: "x + 0 -> x, 0 + x -> x", apply: add_zero },
    Rule { name: "sub-zero", pattern: "x - 0 -> x", apply: sub_zero },
    Rule { name: "zero-sub", pattern: "0 - x -> -x", apply: zero_sub },
    Rule { name: "mul-zero", pattern: "x * 0 -> 0, 0 * x -> 0", apply: mul_zero },
    Rule { name: "mul-one", pattern: "x * 1 -> x, 1 * x -> x", apply: mul_one },
    Rule { name: "neg-sub", pattern: "-(x - y) -> y - x", apply: neg_sub },
    Rule { name: "neg-neg", pattern: "-(-x) -> x", apply: neg_neg },
    Rule { name: "add-neg", pattern: "x + (-y) -> x - y", apply: add_neg },
    Rule { name: "div-common-factor", pattern: "(x y) / (x z) -> y / z", apply: div_common_factor },
    Rule { name: "div-cancel-numerator", pattern: "(x y) / x -> y", apply: div_cancel_numerator },
    Rule { name: "div-cancel-denominator", pattern: "x / (x y) -> 1 / y", apply: div_cancel_denominator },
    Rule { name: "div-self", pattern: "x / x -> 1", apply: div_self },
    Rule { name: "zero-div", pattern: "0 / x -> 0", apply: zero_div },
    Rule { name: "div-one", pattern: "x / 1 -> x", apply: div_one },
    Rule { name: "recip-div", pattern: "1 / (x / y) -> y / x", apply: recip_div },
    Rule { name: "mul-recip", pattern: "x (1 / y) -> x / y", apply: mul_recip },
];

/// All rules in the order they are tried.
pub fn catalog() -> &'static [Rule] {
    &CATALOG
}

pub fn rule_by_name(name: &str) -> Option<&'static Rule> {
    CATALOG.iter().find(|r| r.name == name)
}

fn binary(e: &Expr, want: BinOp) -> Option<(&Expr, &Expr)> {
    match e.kind() {
        ExprKind::Binary(op, l, r) if *op == want => Some((l, r)),
        _ => None,
    }
}

fn negated(e: &Expr) -> Option<&Expr> {
    match e.kind() {
        ExprKind::Neg(c) => Some(c),
        _ => None,
    }
}

fn fold_binary_rule(e: &Expr, diag: &mut Diagnostics) -> Option<Expr> {
    match e.kind() {
        ExprKind::Binary(op, l, r) if l.is_constant_leaf() && r.is_constant_leaf() => {
            fold_binary(*op, l, r, e, diag)
        }
        _ => None,
    }
}

fn fold_unary_rule(e: &Expr, diag: &mut Diagnostics) -> Option<Expr> {
    match e.kind() {
        ExprKind::Neg(c) if c.is_constant_leaf() => fold_neg(c, e, diag),
        ExprKind::Func(f, c) if c.is_constant_leaf() => fold_func(*f, c, e),
        _ => None,
    }
}

fn fold_mul_chain(e: &Expr, diag: &mut Diagnostics) -> Option<Expr> {
    let (c1, rest) = binary(e, BinOp::Mul)?;
    let (c2, x) = binary(rest, BinOp::Mul)?;
    if !c1.is_constant_leaf() || !c2.is_constant_leaf() {
        return None;
    }
    let product = Expr::binary(BinOp::Mul, c1.clone(), c2.clone());
    let coefficient = fold_binary(BinOp::Mul, c1, c2, &product, diag)?;
    Some(Expr::binary(BinOp::Mul, coefficient, x.clone()))
}

fn mul_const_left(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (x, c) = binary(e, BinOp::Mul)?;
    (c.is_constant_leaf() && !x.is_constant_leaf())
        .then(|| Expr::binary(BinOp::Mul, c.clone(), x.clone()))
}

fn add_zero(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (l, r) = binary(e, BinOp::Add)?;
    if r.is_zero() {
        Some(l.clone())
    } else if l.is_zero() {
        Some(r.clone())
    } else {
        None
    }
}

fn sub_zero(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (l, r) = binary(e, BinOp::Sub)?;
    r.is_zero().then(|| l.clone())
}

fn zero_sub(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (l, r) = binary(e, BinOp::Sub)?;
    l.is_zero().then(|| Expr::neg(r.clone()))
}

fn mul_zero(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (l, r) = binary(e, BinOp::Mul)?;
    if r.is_zero() {
        Some(r.clone())
    } else if l.is_zero() {
        Some(l.clone())
    } else {
        None
    }
}

fn mul_one(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (l, r) = binary(e, BinOp::Mul)?;
    if r.is_one() {
        Some(l.clone())
    } else if l.is_one() {
        Some(r.clone())
    } else {
        None
    }
}

fn neg_sub(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (x, y) = binary(negated(e)?, BinOp::Sub)?;
    Some(Expr::binary(BinOp::Sub, y.clone(), x.clone()))
}

fn neg_neg(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    negated(negated(e)?).cloned()
}

fn add_neg(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (x, r) = binary(e, BinOp::Add)?;
    let y = negated(r)?;
    Some(Expr::binary(BinOp::Sub, x.clone(), y.clone()))
}

// Multiplication is commutative, so the factor patterns below accept the
// shared factor on either side of each product.

fn div_common_factor(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (num, den) = binary(e, BinOp::Div)?;
    let (a, b) = binary(num, BinOp::Mul)?;
    let (c, d) = binary(den, BinOp::Mul)?;
    let (y, z) = if a == c {
        (b, d)
    } else if a == d {
        (b, c)
    } else if b == c {
        (a, d)
    } else if b == d {
        (a, c)
    } else {
        return None;
    };
    Some(Expr::binary(BinOp::Div, y.clone(), z.clone()))
}

fn div_cancel_numerator(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (num, x) = binary(e, BinOp::Div)?;
    let (a, b) = binary(num, BinOp::Mul)?;
    if a == x {
        Some(b.clone())
    } else if b == x {
        Some(a.clone())
    } else {
        None
    }
}

fn div_cancel_denominator(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (x, den) = binary(e, BinOp::Div)?;
    let (a, b) = binary(den, BinOp::Mul)?;
    let y = if x == a {
        b
    } else if x == b {
        a
    } else {
        return None;
    };
    Some(Expr::binary(BinOp::Div, Expr::one(), y.clone()))
}

fn div_self(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (l, r) = binary(e, BinOp::Div)?;
    (l == r).then(Expr::one)
}

fn zero_div(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (l, _) = binary(e, BinOp::Div)?;
    l.is_zero().then(|| l.clone())
}

fn div_one(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (l, r) = binary(e, BinOp::Div)?;
    r.is_one().then(|| l.clone())
}

fn recip_div(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (one, den) = binary(e, BinOp::Div)?;
    if !one.is_one() {
        return None;
    }
    let (x, y) = binary(den, BinOp::Div)?;
    Some(Expr::binary(BinOp::Div, y.clone(), x.clone()))
}

fn reciprocal(e: &Expr) -> Option<&Expr> {
    let (one, y) = binary(e, BinOp::Div)?;
    one.is_one().then_some(y)
}

fn mul_recip(e: &Expr, _: &mut Diagnostics) -> Option<Expr> {
    let (l, r) = binary(e, BinOp::Mul)?;
    if let Some(y) = reciprocal(r) {
        Some(Expr::binary(BinOp::Div, l.clone(), y.clone()))
    } else {
        reciprocal(l).map(|y| Expr::binary(BinOp::Div, r.clone(), y.clone()))
    }
}

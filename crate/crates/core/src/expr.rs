//! Expression syntax trees.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Leaves are positional
//! variables `x0, x1, ...` or constants; internal nodes are negation, the four
//! binary arithmetic operators, and a fixed set of analytic functions.
//!
//! Every node caches its size, a structural hash, and the number of variables
//! it needs, so `node_count`, arity checks and most inequality tests are O(1).

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::error::EvalError;

/// Position of an independent variable in the evaluation point.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    /// Binding strength used by the printer: additive 1, multiplicative 2.
    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Analytic functions of one argument.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Exp, Func::Log, Func::Sin, Func::Cos, Func::Tan, Func::Sqrt];

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sqrt => x.sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// The shape of one tree node.
#[derive(Clone, Debug)]
pub enum ExprKind {
    Var(VarId),
    /// Exact integer constant.
    Int(i64),
    /// Real constant given as a decimal literal.
    Real(f64),
    /// A variable-free subtree evaluated once. `provenance` is kept for
    /// inspection only; it never takes part in evaluation or equality.
    Folded { value: f64, provenance: Expr },
    Neg(Expr),
    Binary(BinOp, Expr, Expr),
    Func(Func, Expr),
}

struct Node {
    kind: ExprKind,
    size: usize,
    hash: u64,
    /// 1 + the largest variable index in the tree, or 0 if there is none.
    arity: usize,
    /// Set once the simplifier has seen this exact node come out of a pass
    /// unchanged.
    normal: AtomicBool,
}

/// Immutable expression tree. Cloning is a reference-count bump.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

fn mix(h: u64, v: u64) -> u64 {
    // splitmix64 finalizer over a running combination
    let mut z = h ^ v.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Expr {
    fn from_kind(kind: ExprKind) -> Expr {
        let (size, hash, arity) = match &kind {
            ExprKind::Var(v) => (1, mix(1, v.0 as u64), v.0 + 1),
            ExprKind::Int(n) => (1, mix(2, *n as u64), 0),
            ExprKind::Real(x) => (1, mix(3, x.to_bits()), 0),
            ExprKind::Folded { value, .. } => (1, mix(4, value.to_bits()), 0),
            ExprKind::Neg(c) => (1 + c.size(), mix(5, c.0.hash), c.0.arity),
            ExprKind::Binary(op, l, r) => (
                1 + l.size() + r.size(),
                mix(mix(6 + *op as u64, l.0.hash), r.0.hash),
                l.0.arity.max(r.0.arity),
            ),
            ExprKind::Func(f, c) => (1 + c.size(), mix(20 + *f as u64, c.0.hash), c.0.arity),
        };
        Expr(Arc::new(Node {
            kind,
            size,
            hash,
            arity,
            normal: AtomicBool::new(false),
        }))
    }

    pub fn var(index: usize) -> Expr {
        Expr::from_kind(ExprKind::Var(VarId(index)))
    }

    pub fn int(value: i64) -> Expr {
        Expr::from_kind(ExprKind::Int(value))
    }

    pub fn real(value: f64) -> Expr {
        Expr::from_kind(ExprKind::Real(value))
    }

    /// A folded constant. `provenance` must be variable-free.
    pub fn folded(value: f64, provenance: Expr) -> Expr {
        debug_assert!(provenance.is_constant(), "folded provenance contains a variable");
        Expr::from_kind(ExprKind::Folded { value, provenance })
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn neg(child: Expr) -> Expr {
        Expr::from_kind(ExprKind::Neg(child))
    }

    pub fn binary(op: BinOp, left: Expr, right: Expr) -> Expr {
        Expr::from_kind(ExprKind::Binary(op, left, right))
    }

    pub fn func(f: Func, child: Expr) -> Expr {
        Expr::from_kind(ExprKind::Func(f, child))
    }

    pub fn exp(self) -> Expr {
        Expr::func(Func::Exp, self)
    }

    pub fn log(self) -> Expr {
        Expr::func(Func::Log, self)
    }

    pub fn sin(self) -> Expr {
        Expr::func(Func::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::func(Func::Cos, self)
    }

    pub fn tan(self) -> Expr {
        Expr::func(Func::Tan, self)
    }

    pub fn sqrt(self) -> Expr {
        Expr::func(Func::Sqrt, self)
    }

    pub fn kind(&self) -> &ExprKind {
        &self.0.kind
    }

    /// Total number of nodes. A folded constant counts as one node.
    pub fn node_count(&self) -> usize {
        self.0.size
    }

    fn size(&self) -> usize {
        self.0.size
    }

    /// Minimum point arity needed to evaluate this tree.
    pub fn arity(&self) -> usize {
        self.0.arity
    }

    /// True if the tree contains no variable.
    pub fn is_constant(&self) -> bool {
        self.0.arity == 0
    }

    /// True for `Int`, `Real` and `Folded` leaves.
    pub fn is_constant_leaf(&self) -> bool {
        matches!(self.kind(), ExprKind::Int(_) | ExprKind::Real(_) | ExprKind::Folded { .. })
    }

    /// Numeric value of a constant leaf.
    pub fn constant_value(&self) -> Option<f64> {
        match self.kind() {
            ExprKind::Int(n) => Some(*n as f64),
            ExprKind::Real(x) => Some(*x),
            ExprKind::Folded { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant_value() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.constant_value() == Some(1.0)
    }

    /// Number of operations a straight-line lowering of this tree executes:
    /// every node that is neither a leaf nor a folded constant.
    pub fn operation_count(&self) -> usize {
        match self.kind() {
            ExprKind::Var(_) | ExprKind::Int(_) | ExprKind::Real(_) | ExprKind::Folded { .. } => 0,
            ExprKind::Neg(c) | ExprKind::Func(_, c) => 1 + c.operation_count(),
            ExprKind::Binary(_, l, r) => 1 + l.operation_count() + r.operation_count(),
        }
    }

    pub fn ptr_eq(a: &Expr, b: &Expr) -> bool {
        Arc::ptr_eq(&a.0, &b.0)
    }

    pub(crate) fn is_marked_normal(&self) -> bool {
        self.0.normal.load(Ordering::Relaxed)
    }

    pub(crate) fn mark_normal(&self) {
        self.0.normal.store(true, Ordering::Relaxed);
    }

    /// Reference evaluator. Fails only if `point` is too short.
    pub fn eval(&self, point: &Point) -> Result<f64, EvalError> {
        eval_tree(self, point)
    }

    /// Evaluate against a raw slice without the arity check.
    ///
    /// Panics if a variable index is out of bounds.
    pub fn eval_slice(&self, x: &[f64]) -> f64 {
        match self.kind() {
            ExprKind::Var(v) => x[v.0],
            ExprKind::Int(n) => *n as f64,
            ExprKind::Real(v) => *v,
            ExprKind::Folded { value, .. } => *value,
            ExprKind::Neg(c) => -c.eval_slice(x),
            ExprKind::Binary(op, l, r) => op.apply(l.eval_slice(x), r.eval_slice(x)),
            ExprKind::Func(f, c) => f.apply(c.eval_slice(x)),
        }
    }
}

/// Evaluate `e` at `p` with IEEE-754 double semantics. Domain violations
/// produce NaN or infinities; only an arity mismatch is an error.
pub fn eval_tree(e: &Expr, p: &Point) -> Result<f64, EvalError> {
    if e.arity() > p.arity() {
        return Err(EvalError::Arity {
            needed: e.arity(),
            got: p.arity(),
        });
    }
    Ok(e.eval_slice(p.values()))
}

pub fn node_count(e: &Expr) -> usize {
    e.node_count()
}

fn kinds_equal(a: &ExprKind, b: &ExprKind) -> bool {
    use ExprKind::*;
    match (a, b) {
        (Var(x), Var(y)) => x == y,
        (Int(x), Int(y)) => x == y,
        (Real(x), Real(y)) => x.to_bits() == y.to_bits(),
        (Folded { value: x, .. }, Folded { value: y, .. }) => x.to_bits() == y.to_bits(),
        (Neg(x), Neg(y)) => x == y,
        (Binary(o1, l1, r1), Binary(o2, l2, r2)) => o1 == o2 && l1 == l2 && r1 == r2,
        (Func(f1, c1), Func(f2, c2)) => f1 == f2 && c1 == c2,
        _ => false,
    }
}

/// Structural equality. `Int(2)` and `Real(2.0)` differ; floats compare by
/// bit pattern; a folded constant compares by value only.
impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        if Expr::ptr_eq(self, other) {
            return true;
        }
        if self.0.hash != other.0.hash || self.0.size != other.0.size {
            return false;
        }
        kinds_equal(self.kind(), other.kind())
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            ExprKind::Var(v) => write!(f, "Var({})", v.0),
            ExprKind::Int(n) => write!(f, "Int({n})"),
            ExprKind::Real(x) => write!(f, "Real({x:?})"),
            ExprKind::Folded { value, .. } => write!(f, "Folded({value:?})"),
            ExprKind::Neg(c) => write!(f, "Neg({c:?})"),
            ExprKind::Binary(op, l, r) => write!(f, "{op:?}({l:?}, {r:?})"),
            ExprKind::Func(func, c) => write!(f, "{func:?}({c:?})"),
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Add, self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Sub, self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Mul, self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Div, self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

/// A point in R^n, indexed by variable id.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    values: Vec<f64>,
}

impl Point {
    pub fn new(values: Vec<f64>) -> Point {
        Point { values }
    }

    pub fn arity(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, v: VarId) -> Option<f64> {
        self.values.get(v.0).copied()
    }

    /// Copy of this point with coordinate `v` replaced.
    pub fn with(&self, v: VarId, value: f64) -> Point {
        let mut values = self.values.clone();
        values[v.0] = value;
        Point { values }
    }
}

impl From<Vec<f64>> for Point {
    fn from(values: Vec<f64>) -> Point {
        Point::new(values)
    }
}

impl From<&[f64]> for Point {
    fn from(values: &[f64]) -> Point {
        Point::new(values.to_vec())
    }
}

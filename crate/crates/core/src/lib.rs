//! Staged symbolic differentiation.
//!
//! Expressions are immutable trees ([`Expr`]). Partial derivatives of any
//! order are built by structural rules with a small rewrite system applied
//! at every step, and the resulting trees are lowered to straight-line code
//! that is compiled once and then called like a hand-written function.
//!
//! ```
//! use stagediff::{parse_expr, derivative_n, VarId};
//!
//! let f = parse_expr("exp(3*x0)").unwrap();
//! let d4 = derivative_n(&f, VarId(0), 4);
//! assert_eq!(d4.to_string(), "81 * exp(3 * x0)");
//! ```

pub mod error;
pub mod expr;
pub mod format;
pub mod parse;
pub mod simplify;
pub mod diff;
pub mod baselines;
pub mod codegen;
pub mod corpus;
pub mod verify;
pub mod bench;

pub use diff::{
    derivative_n, derivative_n_raw, derivative_n_with, differentiate, differentiate_raw,
    differentiate_with, gradient, DiffRequest,
};
pub use error::{BenchError, EvalError, ParseError, ParseErrorKind, StageError};
pub use expr::{eval_tree, node_count, BinOp, Expr, ExprKind, Func, Point, VarId};
pub use format::{format_expr, format_tree};
pub use parse::parse_expr;
pub use simplify::{
    fold_constants, simplify, simplify_once, simplify_with, Diagnostics, RuleApplication,
};
pub use baselines::{dual_eval, fd_derivative, interpreted_derivative, Dual};
pub use codegen::{emit_source, stage_compile, GeneratedFn};

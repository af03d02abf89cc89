//! Independent derivative oracles: forward-mode dual numbers, central
//! finite differences, and the unsimplified tree as a runtime baseline.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::diff::differentiate_raw;
use crate::error::EvalError;
use crate::expr::{BinOp, Expr, ExprKind, Func, Point, VarId};

/// A value together with its derivative along one direction.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    pub fn new(value: f64, deriv: f64) -> Dual {
        Dual { value, deriv }
    }

    pub fn constant(value: f64) -> Dual {
        Dual::new(value, 0.0)
    }

    pub fn variable(value: f64) -> Dual {
        Dual::new(value, 1.0)
    }

    pub fn apply(self, f: Func) -> Dual {
        let x = self.value;
        match f {
            Func::Exp => {
                let e = x.exp();
                Dual::new(e, e * self.deriv)
            }
            Func::Log => Dual::new(x.ln(), self.deriv / x),
            Func::Sin => Dual::new(x.sin(), x.cos() * self.deriv),
            Func::Cos => Dual::new(x.cos(), -(x.sin() * self.deriv)),
            Func::Tan => {
                let t = x.tan();
                Dual::new(t, (1.0 + t * t) * self.deriv)
            }
            Func::Sqrt => {
                let s = x.sqrt();
                Dual::new(s, self.deriv / (2.0 * s))
            }
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.value + o.value, self.deriv + o.deriv)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.value - o.value, self.deriv - o.deriv)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.value * o.value, self.deriv * o.value + self.value * o.deriv)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual::new(
            self.value / o.value,
            (self.deriv * o.value - self.value * o.deriv) / (o.value * o.value),
        )
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.deriv)
    }
}

fn walk(e: &Expr, x: &[f64], v: VarId) -> Dual {
    match e.kind() {
        ExprKind::Var(w) => Dual::new(x[w.0], if *w == v { 1.0 } else { 0.0 }),
        ExprKind::Int(n) => Dual::constant(*n as f64),
        ExprKind::Real(c) => Dual::constant(*c),
        ExprKind::Folded { value, .. } => Dual::constant(*value),
        ExprKind::Neg(c) => -walk(c, x, v),
        ExprKind::Binary(op, l, r) => {
            let (a, b) = (walk(l, x, v), walk(r, x, v));
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
            }
        }
        ExprKind::Func(f, c) => walk(c, x, v).apply(*f),
    }
}

/// One tree walk seeded along `x_v`; returns `(f, df/dx_v)`.
pub fn dual_eval(e: &Expr, p: &Point, v: VarId) -> Result<(f64, f64), EvalError> {
    if e.arity() > p.arity() {
        return Err(EvalError::Arity {
            needed: e.arity(),
            got: p.arity(),
        });
    }
    let d = walk(e, p.values(), v);
    Ok((d.value, d.deriv))
}

/// Derivative component of [`dual_eval`] on a raw slice. Panics on a short slice.
pub fn dual_derivative_slice(e: &Expr, x: &[f64], v: VarId) -> f64 {
    walk(e, x, v).deriv
}

/// Default step for [`fd_derivative`] at coordinate value `x`.
pub fn default_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

/// Central difference `(f(x + h e_v) - f(x - h e_v)) / 2h`.
pub fn fd_derivative(e: &Expr, p: &Point, v: VarId, h: f64) -> Result<f64, EvalError> {
    assert!(h > 0.0, "finite-difference step must be positive");
    let x = p.get(v).unwrap_or(0.0);
    if v.0 >= p.arity() {
        // f does not depend on a coordinate the point does not have
        crate::expr::eval_tree(e, p)?;
        return Ok(0.0);
    }
    let hi = crate::expr::eval_tree(e, &p.with(v, x + h))?;
    let lo = crate::expr::eval_tree(e, &p.with(v, x - h))?;
    Ok((hi - lo) / (2.0 * h))
}

/// The unsimplified derivative tree, meant to be evaluated by the tree
/// interpreter as the naive baseline.
pub fn interpreted_derivative(e: &Expr, v: VarId) -> Expr {
    differentiate_raw(e, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;

    fn p(text: &str) -> Expr {
        parse_expr(text).unwrap()
    }

    #[test]
    fn elementary() {
        let pt = Point::new(vec![0.0]);
        assert_eq!(dual_eval(&p("exp(x0)"), &pt, VarId(0)).unwrap(), (1.0, 1.0));
        assert_eq!(dual_eval(&p("sin(x0)"), &pt, VarId(0)).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn eq2_f_partial_x0() {
        let f = p("x0*tan(x1*x2)/(tan(x1*x2)-x3)");
        let pt = Point::new(vec![1.0, 0.7, 0.9, 0.3]);
        let (_, d) = dual_eval(&f, &pt, VarId(0)).unwrap();
        let t = 0.63f64.tan();
        let closed = t / (t - 0.3);
        assert!((d - closed).abs() <= 1e-14 * closed.abs());
        let fd = fd_derivative(&f, &pt, VarId(0), 1e-6).unwrap();
        assert!((fd - closed).abs() <= 1e-8 * closed.abs());
    }

    #[test]
    fn finite_differences() {
        let sq = fd_derivative(&p("x0*x0"), &Point::new(vec![1.0]), VarId(0), 1e-6).unwrap();
        assert!((sq - 2.0).abs() <= 1e-9);
        assert_eq!(fd_derivative(&Expr::int(7), &Point::new(vec![0.3]), VarId(0), 1e-6).unwrap(), 0.0);
        let e = fd_derivative(&p("exp(x0)"), &Point::new(vec![1.0]), VarId(0), 1e-6).unwrap();
        assert!(((e - std::f64::consts::E) / std::f64::consts::E).abs() <= 1e-8);
    }

    #[test]
    fn value_matches_tree_evaluation_bitwise() {
        let f = p("x0 + sqrt(sqrt(x1 + sqrt(x2 + x3))) - log(x1)/cos(x2)");
        let pt = Point::new(vec![0.3, 0.7, 0.9, 0.3]);
        let (value, _) = dual_eval(&f, &pt, VarId(2)).unwrap();
        assert_eq!(value.to_bits(), f.eval(&pt).unwrap().to_bits());
    }

    #[test]
    fn interpreted_is_raw() {
        assert_eq!(interpreted_derivative(&Expr::one(), VarId(0)), Expr::zero());
        assert_eq!(interpreted_derivative(&p("2*(x1*exp(x2))"), VarId(1)).node_count(), 20);
    }

    #[test]
    fn arity_is_checked() {
        assert!(dual_eval(&p("x3"), &Point::new(vec![1.0]), VarId(0)).is_err());
    }
}

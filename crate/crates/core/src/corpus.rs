//! Benchmark functions and seeded random expressions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{BinOp, Expr, Func, Point};
use crate::parse::parse_expr;

fn parsed(text: &str) -> Expr {
    parse_expr(text).expect("built-in expression parses")
}

/// `2 x2 + exp(x0 x1)`.
pub fn sample() -> Expr {
    parsed("2*x2 + exp(x0*x1)")
}

/// `sum_{j=1..n} exp(j x0)`, with the `j = 1` term written `exp(x0)`.
pub fn sumexp(n: u32) -> Expr {
    assert!(n >= 1, "sumexp needs at least one term");
    let x = Expr::var(0);
    (2..=n).fold(x.clone().exp(), |acc, j| acc + (Expr::int(j as i64) * x.clone()).exp())
}

/// `x0 tan(x1 x2) / (tan(x1 x2) - x3)`.
pub fn mv_f() -> Expr {
    parsed("x0*tan(x1*x2)/(tan(x1*x2)-x3)")
}

/// `x0 + sqrt(sqrt(x1 + sqrt(x2 + x3)))`.
pub fn mv_g() -> Expr {
    parsed("x0 + sqrt(sqrt(x1 + sqrt(x2 + x3)))")
}

/// `x^2 y^3 + y log(x)` with `x = x0`, `y = x1`.
pub fn nehmeier1() -> Expr {
    parsed("x0*x0*x1*x1*x1 + x1*log(x0)")
}

/// `3 x^2 y - y^3`.
pub fn nehmeier2() -> Expr {
    parsed("3*x0*x0*x1 - x1*x1*x1")
}

/// `(1 - x)^2 + 100 (y - x^2)`, exactly as tabulated (not the usual
/// Rosenbrock square on the second term).
pub fn nehmeier3() -> Expr {
    parsed("(1-x0)*(1-x0) + 100*(x1 - x0*x0)")
}

/// Named corpus: the fixed functions plus `sumexp(1..=25)`.
pub fn named() -> Vec<(String, Expr)> {
    let mut out = vec![
        ("sample".to_string(), sample()),
        ("mv_f".to_string(), mv_f()),
        ("mv_g".to_string(), mv_g()),
        ("nehmeier1".to_string(), nehmeier1()),
        ("nehmeier2".to_string(), nehmeier2()),
        ("nehmeier3".to_string(), nehmeier3()),
    ];
    out.extend((1..=25).map(|n| (format!("sumexp{n}"), sumexp(n))));
    out
}

/// Seeded generator of random expression trees over `x0..x{vars-1}`.
pub struct TreeGen {
    rng: ChaCha8Rng,
    vars: usize,
}

const REALS: [f64; 4] = [0.5, 1.5, 2.5, 0.25];

impl TreeGen {
    pub fn new(seed: u64, vars: usize) -> TreeGen {
        assert!(vars >= 1);
        TreeGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            vars,
        }
    }

    fn leaf(&mut self) -> Expr {
        let roll: f64 = self.rng.random();
        if roll < 0.7 {
            Expr::var(self.rng.random_range(0..self.vars))
        } else if roll < 0.9 {
            Expr::int(self.rng.random_range(1..=4))
        } else {
            Expr::real(REALS[self.rng.random_range(0..REALS.len())])
        }
    }

    /// A tree of depth at most `depth` (a single leaf has depth 0).
    pub fn tree(&mut self, depth: u32) -> Expr {
        if depth == 0 || self.rng.random_bool(0.2) {
            return self.leaf();
        }
        let roll: f64 = self.rng.random();
        if roll < 0.64 {
            let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][self.rng.random_range(0..4)];
            let l = self.tree(depth - 1);
            let r = self.tree(depth - 1);
            Expr::binary(op, l, r)
        } else if roll < 0.70 {
            Expr::neg(self.tree(depth - 1))
        } else {
            let f = Func::ALL[self.rng.random_range(0..Func::ALL.len())];
            Expr::func(f, self.tree(depth - 1))
        }
    }

    /// A tree with at least one variable, so it has something to differentiate.
    pub fn non_constant_tree(&mut self, depth: u32) -> Expr {
        loop {
            let t = self.tree(depth);
            if !t.is_constant() {
                return t;
            }
        }
    }
}

/// `count` seeded random trees of depth at most `depth` over four variables.
pub fn random_trees(seed: u64, count: usize, depth: u32) -> Vec<Expr> {
    let mut gen = TreeGen::new(seed, 4);
    (0..count).map(|_| gen.non_constant_tree(depth)).collect()
}

/// Seeded sampler of evaluation points with coordinates in `[lo, hi)`.
pub struct PointGen {
    rng: ChaCha8Rng,
    lo: f64,
    hi: f64,
}

impl PointGen {
    pub fn new(seed: u64) -> PointGen {
        PointGen::with_range(seed, 0.1, 1.5)
    }

    pub fn with_range(seed: u64, lo: f64, hi: f64) -> PointGen {
        PointGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            lo,
            hi,
        }
    }

    pub fn point(&mut self, arity: usize) -> Point {
        Point::new((0..arity).map(|_| self.rng.random_range(self.lo..self.hi)).collect())
    }
}

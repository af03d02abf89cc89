//! Cross-checks of symbolic derivatives against the dual-number and
//! finite-difference oracles.
//!
//! Errors are measured as `|a - b| / max(1, |b|)`: relative for values of
//! magnitude above one, absolute below.
//!
//! Skips (counted, never silent):
//! - a (point, variable) pair is out of domain when `f`, the symbolic
//!   derivative or the dual derivative is not finite;
//! - a pair is ill-conditioned when nudging every coordinate by four ulps
//!   moves the dual derivative by more than a tenth of the dual tolerance.
//!   No two evaluation orders can be expected to agree to 1e-12 there;
//! - the finite-difference check additionally skips pairs where `|f|` or
//!   `|f'|` exceeds 1e12, where `f(x +- 2h)` is not finite, where the
//!   difference quotient is dominated by rounding (`eps |f| / h` above a
//!   tenth of the tolerance), or where the truncation error estimate
//!   `|D(2h) - D(h)| / 3` exceeds a tenth of the tolerance.

use crate::baselines::{default_step, dual_derivative_slice};
use crate::codegen::GeneratedFn;
use crate::corpus::PointGen;
use crate::diff::{differentiate, differentiate_raw};
use crate::expr::{Expr, Point, VarId};
use crate::simplify::{simplify, simplify_with, Diagnostics};

pub const DUAL_TOLERANCE: f64 = 1e-12;
pub const FD_TOLERANCE: f64 = 1e-6;
pub const FD_MAGNITUDE_LIMIT: f64 = 1e12;

/// `|a - b| / max(1, |b|)`.
pub fn scaled_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub pairs_checked: usize,
    pub pairs_out_of_domain: usize,
    pub pairs_ill_conditioned: usize,
    pub fd_checked: usize,
    pub fd_skipped: usize,
    pub max_symbolic_vs_dual: f64,
    pub max_symbolic_vs_fd: f64,
    pub max_raw_vs_symbolic: f64,
}

impl VerifyReport {
    pub fn passes(&self) -> bool {
        self.max_symbolic_vs_dual <= DUAL_TOLERANCE && self.max_symbolic_vs_fd <= FD_TOLERANCE
    }

    pub fn merge(&mut self, other: &VerifyReport) {
        self.pairs_checked += other.pairs_checked;
        self.pairs_out_of_domain += other.pairs_out_of_domain;
        self.pairs_ill_conditioned += other.pairs_ill_conditioned;
        self.fd_checked += other.fd_checked;
        self.fd_skipped += other.fd_skipped;
        self.max_symbolic_vs_dual = self.max_symbolic_vs_dual.max(other.max_symbolic_vs_dual);
        self.max_symbolic_vs_fd = self.max_symbolic_vs_fd.max(other.max_symbolic_vs_fd);
        self.max_raw_vs_symbolic = self.max_raw_vs_symbolic.max(other.max_raw_vs_symbolic);
    }
}

/// Check every partial of `e` at every point.
pub fn verify_expr(e: &Expr, points: &[Point]) -> VerifyReport {
    let arity = e.arity().max(1);
    let partials: Vec<(Expr, Expr)> = (0..arity)
        .map(|i| (differentiate(e, VarId(i)), differentiate_raw(e, VarId(i))))
        .collect();
    let mut report = VerifyReport::default();
    for p in points {
        let x = p.values();
        let f = e.eval_slice(x);
        for (i, (sym, raw)) in partials.iter().enumerate() {
            let v = VarId(i);
            let s = sym.eval_slice(x);
            let d = dual_derivative_slice(e, x, v);
            if !(f.is_finite() && s.is_finite() && d.is_finite()) {
                report.pairs_out_of_domain += 1;
                continue;
            }
            if ill_conditioned(e, x, v, d) {
                report.pairs_ill_conditioned += 1;
                continue;
            }
            report.pairs_checked += 1;
            report.max_symbolic_vs_dual = report.max_symbolic_vs_dual.max(scaled_error(s, d));
            let r = raw.eval_slice(x);
            if r.is_finite() {
                report.max_raw_vs_symbolic = report.max_raw_vs_symbolic.max(scaled_error(r, s));
            }
            match fd_check(e, p, v, f, s) {
                Some(err) => {
                    report.fd_checked += 1;
                    report.max_symbolic_vs_fd = report.max_symbolic_vs_fd.max(err);
                }
                None => report.fd_skipped += 1,
            }
        }
    }
    report
}

fn ill_conditioned(e: &Expr, x: &[f64], v: VarId, d: f64) -> bool {
    let nudged: Vec<f64> = x.iter().map(|xi| xi * (1.0 + 4.0 * f64::EPSILON)).collect();
    let d2 = dual_derivative_slice(e, &nudged, v);
    !d2.is_finite() || scaled_error(d2, d) > 0.1 * DUAL_TOLERANCE
}

fn fd_check(e: &Expr, p: &Point, v: VarId, f: f64, s: f64) -> Option<f64> {
    if f.abs() > FD_MAGNITUDE_LIMIT || s.abs() > FD_MAGNITUDE_LIMIT {
        return None;
    }
    let x = p.values()[v.0];
    let h = default_step(x);
    let at = |dx: f64| e.eval_slice(p.with(v, x + dx).values());
    let (hi, lo, hi2, lo2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
    if ![hi, lo, hi2, lo2].iter().all(|y| y.is_finite()) {
        return None;
    }
    let limit = 0.1 * FD_TOLERANCE * s.abs().max(1.0);
    let rounding = f64::EPSILON * [f, hi, lo, hi2, lo2].iter().fold(0f64, |m, y| m.max(y.abs())) / h;
    let d1 = (hi - lo) / (2.0 * h);
    let d2 = (hi2 - lo2) / (4.0 * h);
    if rounding > limit || (d2 - d1).abs() / 3.0 > limit {
        return None;
    }
    Some(scaled_error(s, d1))
}

/// Relative tolerance for `simplify(e)` against `e`.
pub const SOUNDNESS_TOLERANCE: f64 = 1e-12;

/// Simplifier laws over one expression.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LawReport {
    pub idempotent: bool,
    pub non_growing: bool,
    pub cap_hits: usize,
    pub points_checked: usize,
    pub points_not_finite: usize,
    pub points_ill_conditioned: usize,
    pub max_error: f64,
}

impl LawReport {
    pub fn passes(&self) -> bool {
        self.idempotent && self.non_growing && self.cap_hits == 0 && self.max_error <= SOUNDNESS_TOLERANCE
    }
}

/// Check idempotence, non-growth, the iteration cap and soundness of
/// `simplify` on `e` at `points`. A point counts as ill-conditioned when
/// nudging every coordinate by four ulps moves `e` by more than a tenth of
/// the tolerance; such points are counted and skipped.
pub fn check_simplifier_laws(e: &Expr, points: &[Point]) -> LawReport {
    let mut diag = Diagnostics::default();
    let s = simplify_with(e, &mut diag);
    let mut report = LawReport {
        idempotent: simplify(&s) == s,
        non_growing: s.node_count() <= e.node_count(),
        cap_hits: diag.cap_hits,
        ..LawReport::default()
    };
    for p in points {
        let x = p.values();
        let (a, b) = (e.eval_slice(x), s.eval_slice(x));
        if !(a.is_finite() && b.is_finite()) {
            report.points_not_finite += 1;
            continue;
        }
        let nudged: Vec<f64> = x.iter().map(|xi| xi * (1.0 + 4.0 * f64::EPSILON)).collect();
        let a2 = e.eval_slice(&nudged);
        if !a2.is_finite() || scaled_error(a2, a) > 0.1 * SOUNDNESS_TOLERANCE {
            report.points_ill_conditioned += 1;
            continue;
        }
        report.points_checked += 1;
        report.max_error = report.max_error.max(scaled_error(b, a));
    }
    report
}

/// Up to `count` points where `f` and every dual partial are finite, drawn
/// from `gen`. Gives up after `20 * count` draws, so constant-free domains
/// that are mostly empty yield fewer points rather than looping.
pub fn in_domain_points(e: &Expr, gen: &mut PointGen, count: usize) -> Vec<Point> {
    let arity = e.arity().max(1);
    let mut out = Vec::with_capacity(count);
    for _ in 0..20 * count {
        if out.len() == count {
            break;
        }
        let p = gen.point(arity);
        let x = p.values();
        if e.eval_slice(x).is_finite()
            && (0..arity).all(|i| dual_derivative_slice(e, x, VarId(i)).is_finite())
        {
            out.push(p);
        }
    }
    out
}

/// Bitwise agreement of compiled functions with the interpreter.
pub fn staged_mismatches(f: &GeneratedFn, e: &Expr, points: &[Point]) -> usize {
    points
        .iter()
        .filter(|p| !crate::codegen::bitwise_agrees(f, e, p))
        .count()
}

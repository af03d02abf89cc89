//! Benchmark harness.
//!
//! Every case runs the same loop: `x[0]` starts at `0.0` and each iteration
//! does `x[0] -= 0.1; sum += f(x)`. Multivariate cases keep the other
//! coordinates fixed at `0.7, 0.9, 0.3` (in that order), which keeps `tan`
//! and `sqrt` in their domains. The reported time is the loop time minus an
//! empty loop with the same trip count, each taken as the minimum over the
//! requested repeats. Every implementation is called through an opaque
//! function pointer or trait object so none of them can be inlined into the
//! loop.

use std::fmt;
use std::hint::black_box;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::baselines::{default_step, dual_derivative_slice};
use crate::codegen::{stage_or_interpret_many, GeneratedFn, StagedEntry};
use crate::corpus;
use crate::diff::{derivative_n, derivative_n_raw, differentiate};
use crate::error::BenchError;
use crate::expr::{Expr, VarId};

pub const DEFAULT_ITERS: u64 = 10_000_000;
/// Fixed values of `x1, x2, x3` in the benchmark loop.
pub const FIXED_COORDS: [f64; 3] = [0.7, 0.9, 0.3];
pub const CSV_HEADER: [&str; 7] = ["case", "params", "impl", "iters", "elapsed_ms", "checksum", "staged"];

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum CaseName {
    SumexpOrder,
    SumexpTerms,
    MvF,
    MvG,
    Nehmeier1,
    Nehmeier2,
    Nehmeier3,
}

impl CaseName {
    pub const ALL: [CaseName; 7] = [
        CaseName::SumexpOrder,
        CaseName::SumexpTerms,
        CaseName::MvF,
        CaseName::MvG,
        CaseName::Nehmeier1,
        CaseName::Nehmeier2,
        CaseName::Nehmeier3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseName::SumexpOrder => "sumexp_order",
            CaseName::SumexpTerms => "sumexp_terms",
            CaseName::MvF => "mv_f",
            CaseName::MvG => "mv_g",
            CaseName::Nehmeier1 => "nehmeier1",
            CaseName::Nehmeier2 => "nehmeier2",
            CaseName::Nehmeier3 => "nehmeier3",
        }
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for CaseName {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<CaseName, BenchError> {
        CaseName::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| BenchError::UnknownCase(s.to_string()))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Impl {
    Staged,
    Hand,
    Interpreted,
    Dual,
    Fd,
}

impl Impl {
    pub const ALL: [Impl; 5] = [Impl::Staged, Impl::Hand, Impl::Interpreted, Impl::Dual, Impl::Fd];

    pub fn name(self) -> &'static str {
        match self {
            Impl::Staged => "staged",
            Impl::Hand => "hand",
            Impl::Interpreted => "interpreted",
            Impl::Dual => "dual",
            Impl::Fd => "fd",
        }
    }
}

impl fmt::Display for Impl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Impl {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Impl, BenchError> {
        Impl::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| BenchError::UnknownImpl(s.to_string()))
    }
}

/// A benchmark case.
///
/// `sumexp_order` differentiates `sumexp(3)` `order` times; `sumexp_terms`
/// differentiates `sumexp(terms)` `order` times; `mv_f`/`mv_g` take the
/// first partial along `wrt`; the `nehmeier*` cases evaluate the full
/// gradient and accumulate the sum of its components.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchCase {
    pub name: CaseName,
    pub order: u32,
    pub terms: u32,
    pub wrt: usize,
    pub iters: u64,
}

impl BenchCase {
    pub fn new(name: CaseName) -> BenchCase {
        BenchCase {
            name,
            order: 1,
            terms: 3,
            wrt: 0,
            iters: DEFAULT_ITERS,
        }
    }

    pub fn sumexp_order(order: u32) -> BenchCase {
        BenchCase {
            order,
            ..BenchCase::new(CaseName::SumexpOrder)
        }
    }

    pub fn sumexp_terms(terms: u32) -> BenchCase {
        BenchCase {
            terms,
            ..BenchCase::new(CaseName::SumexpTerms)
        }
    }

    pub fn partial(name: CaseName, wrt: usize) -> BenchCase {
        BenchCase {
            wrt,
            ..BenchCase::new(name)
        }
    }

    pub fn with_iters(mut self, iters: u64) -> BenchCase {
        self.iters = iters;
        self
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::InvalidParam(msg));
        if self.iters == 0 {
            return bad("iters must be at least 1".into());
        }
        match self.name {
            CaseName::SumexpOrder | CaseName::SumexpTerms => {
                if self.order == 0 {
                    return bad("order must be at least 1".into());
                }
                if self.name == CaseName::SumexpTerms && self.terms == 0 {
                    return bad("n must be at least 1".into());
                }
            }
            CaseName::MvF | CaseName::MvG if self.wrt > 3 => {
                return bad(format!("{} has variables x0..x3, got wrt={}", self.name, self.wrt));
            }
            _ => {}
        }
        Ok(())
    }

    /// Parameter column of the CSV output.
    pub fn params(&self) -> String {
        match self.name {
            CaseName::SumexpOrder => format!("N={}", self.order),
            CaseName::SumexpTerms => format!("n={};N={}", self.terms, self.order),
            CaseName::MvF | CaseName::MvG => format!("wrt={}", self.wrt),
            _ => "gradient".into(),
        }
    }

    fn terms_count(&self) -> u32 {
        match self.name {
            CaseName::SumexpOrder => 3,
            _ => self.terms,
        }
    }

    /// The function being differentiated.
    pub fn function(&self) -> Expr {
        match self.name {
            CaseName::SumexpOrder | CaseName::SumexpTerms => corpus::sumexp(self.terms_count()),
            CaseName::MvF => corpus::mv_f(),
            CaseName::MvG => corpus::mv_g(),
            CaseName::Nehmeier1 => corpus::nehmeier1(),
            CaseName::Nehmeier2 => corpus::nehmeier2(),
            CaseName::Nehmeier3 => corpus::nehmeier3(),
        }
    }

    /// `(variable, order)` of every derivative component summed per call.
    fn components(&self) -> Vec<(VarId, u32)> {
        match self.name {
            CaseName::SumexpOrder | CaseName::SumexpTerms => vec![(VarId(0), self.order)],
            CaseName::MvF | CaseName::MvG => vec![(VarId(self.wrt), 1)],
            _ => vec![(VarId(0), 1), (VarId(1), 1)],
        }
    }

    /// Simplified derivative components, as staged.
    pub fn derivatives(&self) -> Vec<Expr> {
        let f = self.function();
        self.components().into_iter().map(|(v, n)| derivative_n(&f, v, n)).collect()
    }

    /// Initial loop point.
    pub fn start_point(&self) -> Vec<f64> {
        let arity = match self.name {
            CaseName::SumexpOrder | CaseName::SumexpTerms => 1,
            CaseName::MvF | CaseName::MvG => 4,
            _ => 2,
        };
        let mut x = vec![0.0];
        x.extend_from_slice(&FIXED_COORDS[..arity - 1]);
        x
    }
}

impl fmt::Display for BenchCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.name, self.params())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchResult {
    pub case: String,
    pub params: String,
    pub implementation: Impl,
    pub iters: u64,
    pub elapsed_ms: f64,
    /// Empty-loop time already subtracted from `elapsed_ms`.
    pub overhead_ms: f64,
    pub checksum: f64,
    pub staged: bool,
}

impl BenchResult {
    fn record(&self) -> [String; 7] {
        [
            self.case.clone(),
            self.params.clone(),
            self.implementation.to_string(),
            self.iters.to_string(),
            format!("{:.3}", self.elapsed_ms),
            format!("{:e}", self.checksum),
            self.staged.to_string(),
        ]
    }
}

type Kernel = Box<dyn Fn(&[f64]) -> f64>;

/// Human-written closed forms of the benchmarked derivatives. They keep the
/// operation order of the engine's normal form, so results agree bitwise
/// with the staged code, but hoist repeated subexpressions into locals the
/// way a person would.
pub fn hand_coded(case: &BenchCase) -> Option<Kernel> {
    let kernel: Kernel = match (case.name, case.wrt) {
        (CaseName::SumexpOrder | CaseName::SumexpTerms, _) => {
            // exact while j^N < 2^53, which covers every order the engine keeps exact
            let coeffs: Vec<f64> = (2..=case.terms_count())
                .map(|j| (j as f64).powi(case.order as i32))
                .collect();
            Box::new(move |x: &[f64]| {
                let x0 = x[0];
                let mut acc = x0.exp();
                for (k, c) in coeffs.iter().enumerate() {
                    acc += c * ((k + 2) as f64 * x0).exp();
                }
                acc
            })
        }
        (CaseName::MvF, 0) => Box::new(|x: &[f64]| {
            let t = (x[1] * x[2]).tan();
            t / (t - x[3])
        }),
        (CaseName::MvF, 1) => Box::new(|x: &[f64]| {
            let t = (x[1] * x[2]).tan();
            let s = (1.0 + t * t) * x[2];
            let d = t - x[3];
            (x[0] * s * d - x[0] * t * s) / (d * d)
        }),
        (CaseName::MvF, 2) => Box::new(|x: &[f64]| {
            let t = (x[1] * x[2]).tan();
            let s = (1.0 + t * t) * x[1];
            let d = t - x[3];
            (x[0] * s * d - x[0] * t * s) / (d * d)
        }),
        (CaseName::MvF, 3) => Box::new(|x: &[f64]| {
            let t = (x[1] * x[2]).tan();
            let d = t - x[3];
            x[0] * t / (d * d)
        }),
        (CaseName::MvG, 0) => Box::new(|_: &[f64]| 1.0),
        (CaseName::MvG, 1) => Box::new(|x: &[f64]| {
            let b = (x[1] + (x[2] + x[3]).sqrt()).sqrt();
            1.0 / (2.0 * b) / (2.0 * b.sqrt())
        }),
        (CaseName::MvG, 2 | 3) => Box::new(|x: &[f64]| {
            let a = (x[2] + x[3]).sqrt();
            let b = (x[1] + a).sqrt();
            1.0 / (2.0 * a) / (2.0 * b) / (2.0 * b.sqrt())
        }),
        (CaseName::Nehmeier1, _) => Box::new(|x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let aab = a * a * b;
            let dx = (a + a) * b * b * b + b / a;
            let dy = (aab + aab) * b + aab * b + a.ln();
            dx + dy
        }),
        (CaseName::Nehmeier2, _) => Box::new(|x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let dx = (3.0 * a + 3.0 * a) * b;
            let dy = 3.0 * a * a - ((b + b) * b + b * b);
            dx + dy
        }),
        (CaseName::Nehmeier3, _) => Box::new(|x: &[f64]| {
            let u = 1.0 - x[0];
            let dx = -u + -u + 100.0 * -(x[0] + x[0]);
            dx + 100.0
        }),
        _ => return None,
    };
    Some(kernel)
}

fn unsupported(case: &BenchCase, implementation: Impl, why: &'static str) -> BenchError {
    BenchError::Unsupported {
        case: case.to_string(),
        impl_name: implementation.name(),
        why,
    }
}

fn sum2(kernels: Vec<Kernel>) -> Kernel {
    let mut it = kernels.into_iter();
    let first = it.next().expect("at least one component");
    match it.next() {
        None => first,
        Some(second) => Box::new(move |x: &[f64]| first(x) + second(x)),
    }
}

enum Runner {
    Native(StagedEntry),
    NativePair(StagedEntry, StagedEntry),
    Boxed(Kernel),
}

struct Prepared {
    runner: Runner,
    staged: bool,
    _fns: Vec<GeneratedFn>,
}

impl Prepared {
    fn boxed(kernel: Kernel) -> Prepared {
        Prepared {
            runner: Runner::Boxed(kernel),
            staged: false,
            _fns: Vec::new(),
        }
    }
}

fn prepare(case: &BenchCase, implementation: Impl) -> Result<Prepared, BenchError> {
    case.validate()?;
    let f = case.function();
    let comps = case.components();
    let first_order_only = || {
        if comps.iter().any(|&(_, n)| n != 1) {
            Err(unsupported(case, implementation, "only first derivatives are supported"))
        } else {
            Ok(())
        }
    };
    let prepared = match implementation {
        Impl::Staged => {
            let fns = stage_or_interpret_many(&case.derivatives());
            let entries: Option<Vec<StagedEntry>> = fns.iter().map(|g| g.entry()).collect();
            match entries.as_deref() {
                Some(&[e]) => Prepared {
                    runner: Runner::Native(e),
                    staged: true,
                    _fns: fns,
                },
                Some(&[e0, e1]) => Prepared {
                    runner: Runner::NativePair(e0, e1),
                    staged: true,
                    _fns: fns,
                },
                // interpreter fallback, reported through `staged = false`
                _ => Prepared::boxed(sum2(
                    fns.into_iter()
                        .map(|g| -> Kernel { Box::new(move |x: &[f64]| g.call_slice(x)) })
                        .collect(),
                )),
            }
        }
        Impl::Hand => Prepared::boxed(
            hand_coded(case).ok_or_else(|| unsupported(case, implementation, "no closed form registered"))?,
        ),
        Impl::Interpreted => Prepared::boxed(sum2(
            comps
                .iter()
                .map(|&(v, n)| -> Kernel {
                    let raw = derivative_n_raw(&f, v, n);
                    Box::new(move |x: &[f64]| raw.eval_slice(x))
                })
                .collect(),
        )),
        Impl::Dual => {
            first_order_only()?;
            Prepared::boxed(sum2(
                comps
                    .iter()
                    .map(|&(v, _)| -> Kernel {
                        let f = f.clone();
                        Box::new(move |x: &[f64]| dual_derivative_slice(&f, x, v))
                    })
                    .collect(),
            ))
        }
        Impl::Fd => {
            first_order_only()?;
            Prepared::boxed(sum2(
                comps
                    .iter()
                    .map(|&(v, _)| -> Kernel {
                        let f = f.clone();
                        Box::new(move |x: &[f64]| {
                            let mut buf = [0.0; 4];
                            let y = &mut buf[..x.len()];
                            y.copy_from_slice(x);
                            let h = default_step(x[v.0]);
                            y[v.0] = x[v.0] + h;
                            let hi = f.eval_slice(y);
                            y[v.0] = x[v.0] - h;
                            let lo = f.eval_slice(y);
                            (hi - lo) / (2.0 * h)
                        })
                    })
                    .collect(),
            ))
        }
    };
    Ok(prepared)
}

fn timed_loop(iters: u64, start: &[f64], kernel: impl Fn(&[f64]) -> f64) -> (Duration, f64) {
    let mut x = start.to_vec();
    let mut sum = 0.0;
    let t = Instant::now();
    for _ in 0..iters {
        x[0] -= 0.1;
        sum += kernel(black_box(&x));
    }
    (t.elapsed(), black_box(sum))
}

fn empty_kernel(_: &[f64]) -> f64 {
    0.0
}

/// Run one case once; see [`run_benchmark_with`].
pub fn run_benchmark(case: &BenchCase, implementation: Impl) -> Result<BenchResult, BenchError> {
    run_benchmark_with(case, implementation, 1)
}

/// Run one case `repeats` times and keep the fastest loop and fastest empty loop.
pub fn run_benchmark_with(case: &BenchCase, implementation: Impl, repeats: u32) -> Result<BenchResult, BenchError> {
    let prepared = prepare(case, implementation)?;
    let start = case.start_point();
    let empty: fn(&[f64]) -> f64 = black_box(empty_kernel);
    let mut best = Duration::MAX;
    let mut best_empty = Duration::MAX;
    let mut checksum = 0.0;
    for _ in 0..repeats.max(1) {
        // SAFETY (native arms): points have the case's arity and `prepared`
        // keeps the shared object loaded.
        let (t, sum) = match &prepared.runner {
            Runner::Native(e) => {
                let e = black_box(*e);
                timed_loop(case.iters, &start, |x| unsafe { e(x.as_ptr()) })
            }
            Runner::NativePair(e0, e1) => {
                let (e0, e1) = black_box((*e0, *e1));
                timed_loop(case.iters, &start, |x| unsafe { e0(x.as_ptr()) + e1(x.as_ptr()) })
            }
            Runner::Boxed(k) => {
                let k: &dyn Fn(&[f64]) -> f64 = black_box(&**k);
                timed_loop(case.iters, &start, k)
            }
        };
        best = best.min(t);
        checksum = sum;
        best_empty = best_empty.min(timed_loop(case.iters, &start, empty).0);
    }
    Ok(BenchResult {
        case: case.name.to_string(),
        params: case.params(),
        implementation,
        iters: case.iters,
        elapsed_ms: best.saturating_sub(best_empty).as_secs_f64() * 1e3,
        overhead_ms: best_empty.as_secs_f64() * 1e3,
        checksum,
        staged: prepared.staged,
    })
}

/// Checksum agreement: staged and hand bitwise (NaN matches NaN), others
/// within 1e-9 relative of the staged sum. Returns one message per mismatch.
pub fn cross_validate(results: &[BenchResult]) -> Vec<String> {
    let Some(reference) = results.iter().find(|r| r.implementation == Impl::Staged) else {
        return Vec::new();
    };
    let same_bits = |a: f64, b: f64| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan());
    results
        .iter()
        .filter(|r| r.implementation != Impl::Staged)
        .filter_map(|r| {
            let ok = match r.implementation {
                Impl::Hand => same_bits(r.checksum, reference.checksum),
                _ => {
                    same_bits(r.checksum, reference.checksum)
                        || (r.checksum - reference.checksum).abs() <= 1e-9 * reference.checksum.abs()
                }
            };
            (!ok).then(|| {
                format!(
                    "{} {}: checksum {:e} disagrees with staged {:e}",
                    r.case, r.implementation, r.checksum, reference.checksum
                )
            })
        })
        .collect()
}

/// Append rows to a CSV file, writing the header first if the file is new or empty.
pub fn append_csv(path: &Path, results: &[BenchResult]) -> Result<(), BenchError> {
    let mut file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let fresh = file.metadata()?.len() == 0;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(&mut file);
    if fresh {
        writer.write_record(CSV_HEADER)?;
    }
    for r in results {
        writer.write_record(r.record())?;
    }
    writer.flush()?;
    drop(writer);
    file.flush()?;
    Ok(())
}

/// Wall time of `differentiate` (with interleaved simplification) for
/// `sumexp(n)`, minimum over `repeats` runs on freshly built trees.
pub fn generation_time(n: u32, repeats: u32) -> Duration {
    (0..repeats.max(1))
        .map(|_| {
            let f = corpus::sumexp(n);
            let t = Instant::now();
            black_box(differentiate(black_box(&f), VarId(0)));
            t.elapsed()
        })
        .min()
        .expect("at least one repeat")
}

/// Least-squares line `y = a + b x`; returns `(a, b, r_squared)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (a, b, r2)
}

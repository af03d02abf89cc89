use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use stagediff::bench::{self, BenchCase, CaseName, Impl};
use stagediff::corpus::PointGen;
use stagediff::verify::{in_domain_points, verify_expr, DUAL_TOLERANCE, FD_TOLERANCE};
use stagediff::{emit_source, format_tree, parse_expr, BenchError, Diagnostics, DiffRequest, Expr, VarId};

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "stagediff", version, about = "Symbolic differentiation with staged code generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum Emit {
    Tree,
    Infix,
    Code,
}

#[derive(Subcommand)]
enum Command {
    /// Differentiate an expression and print the result.
    Diff {
        #[arg(long)]
        expr: String,
        /// Variable index k of x<k>.
        #[arg(long, default_value_t = 0)]
        wrt: usize,
        #[arg(long, default_value_t = 1)]
        order: u32,
        /// Skip simplification entirely.
        #[arg(long)]
        raw: bool,
        #[arg(long, value_enum, default_value_t = Emit::Infix)]
        emit: Emit,
        /// Print every rewrite applied and the simplifier counters.
        #[arg(long)]
        explain: bool,
    },
    /// Cross-check symbolic derivatives against dual numbers and finite differences.
    Verify {
        #[arg(long)]
        expr: String,
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Sampling seed; STAGEDIFF_SEED overrides the default of 42.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the benchmark loop and append rows to a CSV file.
    ///
    /// Each iteration does `x0 -= 0.1; sum += f(x)` starting from x0 = 0.
    /// Multivariate cases hold x1, x2, x3 at 0.7, 0.9, 0.3.
    Bench {
        /// sumexp_order, sumexp_terms, mv_f, mv_g, nehmeier1, nehmeier2 or nehmeier3.
        #[arg(long)]
        case: String,
        /// Number of exponential terms (sumexp_terms).
        #[arg(long, default_value_t = 3)]
        n: u32,
        /// Derivative order (sumexp cases).
        #[arg(long, default_value_t = 1)]
        order: u32,
        /// Variable of the partial derivative (mv_f, mv_g).
        #[arg(long, default_value_t = 0)]
        wrt: usize,
        #[arg(long, default_value_t = bench::DEFAULT_ITERS)]
        iters: u64,
        /// all, or a comma-separated list of staged, hand, interpreted, dual, fd.
        #[arg(long = "impl", default_value = "all")]
        implementation: String,
        /// Keep the fastest of this many runs.
        #[arg(long, default_value_t = 1)]
        repeats: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time differentiation plus simplification of sum_j exp(j x0) for each n.
    GenTime {
        #[arg(long, default_value = "sumexp_terms")]
        case: String,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<u32>,
        #[arg(long, default_value_t = 5)]
        repeats: u32,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
    Check,
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Failure {
        match e {
            BenchError::Io(_) | BenchError::Csv(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn parse(text: &str) -> Result<Expr, Failure> {
    parse_expr(text).map_err(|e| Failure::Usage(format!("{e}\n  {text}\n  {:>w$}", "^", w = e.position + 1)))
}

fn run_diff(expr: &str, wrt: usize, order: u32, raw: bool, emit: Emit, explain: bool) -> Result<(), Failure> {
    let e = parse(expr)?;
    let mut request = DiffRequest::new(VarId(wrt), order);
    if raw {
        request = request.raw();
    }
    let mut diag = if explain { Diagnostics::traced() } else { Diagnostics::default() };
    let d = request.apply_with(&e, &mut diag);
    match emit {
        Emit::Infix => println!("{d}"),
        Emit::Tree => print!("{}", format_tree(&d)),
        Emit::Code => print!("{}", emit_source(&d, "derivative")),
    }
    if explain {
        for step in diag.trace() {
            println!("rewrite {step}");
        }
        println!(
            "nodes {} passes {} rewrites {} overflow_promotions {} cap_hits {}",
            d.node_count(),
            diag.passes,
            diag.rewrites,
            diag.overflow_promotions,
            diag.cap_hits
        );
    }
    Ok(())
}

fn default_seed() -> Result<u64, Failure> {
    match std::env::var("STAGEDIFF_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("STAGEDIFF_SEED is not an unsigned integer: {s:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn run_verify(expr: &str, points: usize, seed: Option<u64>) -> Result<(), Failure> {
    let e = parse(expr)?;
    let seed = match seed {
        Some(s) => s,
        None => default_seed()?,
    };
    let pts = in_domain_points(&e, &mut PointGen::new(seed), points);
    let r = verify_expr(&e, &pts);
    println!("seed {seed}");
    println!("points {} of {} requested", pts.len(), points);
    println!(
        "pairs checked {} out_of_domain {} ill_conditioned {}",
        r.pairs_checked, r.pairs_out_of_domain, r.pairs_ill_conditioned
    );
    println!("fd checked {} skipped {}", r.fd_checked, r.fd_skipped);
    println!("max symbolic-vs-dual {:e} (tolerance {DUAL_TOLERANCE:e})", r.max_symbolic_vs_dual);
    println!("max symbolic-vs-fd {:e} (tolerance {FD_TOLERANCE:e})", r.max_symbolic_vs_fd);
    println!("max raw-vs-symbolic {:e}", r.max_raw_vs_symbolic);
    if r.passes() {
        println!("ok");
        Ok(())
    } else {
        println!("FAILED");
        Err(Failure::Check)
    }
}

fn parse_impls(text: &str) -> Result<Vec<Impl>, Failure> {
    if text == "all" {
        return Ok(Impl::ALL.to_vec());
    }
    text.split(',').map(|s| s.trim().parse::<Impl>().map_err(Failure::from)).collect()
}

#[allow(clippy::too_many_arguments)]
fn run_bench(
    case: &str,
    n: u32,
    order: u32,
    wrt: usize,
    iters: u64,
    implementation: &str,
    repeats: u32,
    out: &std::path::Path,
) -> Result<(), Failure> {
    let name: CaseName = case.parse()?;
    let bench_case = BenchCase {
        name,
        order,
        terms: n,
        wrt,
        iters,
    };
    bench_case.validate()?;
    let all = implementation == "all";
    let mut results = Vec::new();
    for imp in parse_impls(implementation)? {
        match bench::run_benchmark_with(&bench_case, imp, repeats) {
            Ok(r) => {
                println!(
                    "{:<12} {:<14} {:<12} {:>12.3} ms  checksum {:e}{}",
                    r.case,
                    r.params,
                    r.implementation,
                    r.elapsed_ms,
                    r.checksum,
                    if imp == Impl::Staged && !r.staged { "  (interpreter fallback)" } else { "" }
                );
                results.push(r);
            }
            Err(e @ BenchError::Unsupported { .. }) if all => eprintln!("skipped: {e}"),
            Err(e) => return Err(e.into()),
        }
    }
    for warning in bench::cross_validate(&results) {
        eprintln!("warning: {warning}");
    }
    bench::append_csv(out, &results)?;
    Ok(())
}

fn run_gen_time(case: &str, n_list: &[u32], repeats: u32) -> Result<(), Failure> {
    if case != "sumexp_terms" {
        return Err(Failure::Usage(format!("gen-time supports only sumexp_terms, got {case}")));
    }
    if n_list.contains(&0) {
        return Err(Failure::Usage("n must be at least 1".into()));
    }
    println!("n,ms");
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in n_list {
        let ms = bench::generation_time(n, repeats).as_secs_f64() * 1e3;
        println!("{n},{ms:.6}");
        xs.push(n as f64);
        ys.push(ms);
    }
    if xs.len() >= 3 {
        let (a, b, r2) = bench::linear_fit(&xs, &ys);
        println!("# linear fit: ms = {a:.6} + {b:.6} * n, R^2 = {r2:.4}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Diff {
            expr,
            wrt,
            order,
            raw,
            emit,
            explain,
        } => run_diff(&expr, wrt, order, raw, emit, explain),
        Command::Verify { expr, points, seed } => run_verify(&expr, points, seed),
        Command::Bench {
            case,
            n,
            order,
            wrt,
            iters,
            implementation,
            repeats,
            out,
        } => run_bench(&case, n, order, wrt, iters, &implementation, repeats, &out),
        Command::GenTime { case, n_list, repeats } => run_gen_time(&case, &n_list, repeats),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

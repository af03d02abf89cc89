use std::process::{Command, Output};

fn stagediff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stagediff"))
        .args(args)
        .env_remove("STAGEDIFF_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn diff_prints_the_simplified_derivative() {
    let o = stagediff(&["diff", "--expr", "2*(x1*exp(x2))", "--wrt", "1", "--emit", "infix"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "2 * exp(x2)");

    let o = stagediff(&["diff", "--expr", "exp(3*x0)", "--wrt", "0", "--order", "4", "--emit", "infix"]);
    assert_eq!(stdout(&o).trim(), "81 * exp(3 * x0)");
}

#[test]
fn diff_raw_and_other_emitters() {
    let o = stagediff(&["diff", "--expr", "2*(x1*exp(x2))", "--wrt", "1", "--raw"]);
    assert_eq!(stdout(&o).trim(), "0 * (x1 * exp(x2)) + 2 * (1 * exp(x2) + x1 * (exp(x2) * 0))");

    let o = stagediff(&["diff", "--expr", "2*(x1*exp(x2))", "--wrt", "1", "--emit", "code"]);
    assert_eq!(
        stdout(&o),
        "program derivative(x[0..3])\nt0 = exp(x[2]);\nt1 = 2 * t0;\nreturn t1;\n"
    );

    let o = stagediff(&["diff", "--expr", "x0*x1", "--wrt", "1", "--emit", "tree"]);
    assert_eq!(stdout(&o).trim(), "Var x0");
}

#[test]
fn explain_lists_rewrites() {
    let o = stagediff(&["diff", "--expr", "2*(x1*exp(x2))", "--wrt", "1", "--explain"]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("rewrite mul-zero @ ")), "{text}");
    assert!(text.contains("cap_hits 0"), "{text}");
}

#[test]
fn verify_passes_and_is_deterministic() {
    let args = ["verify", "--expr", "x0*tan(x1*x2)/(tan(x1*x2)-x3)"];
    let a = stagediff(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert!(stdout(&a).contains("seed 42"));
    assert_eq!(stdout(&a), stdout(&stagediff(&args)));

    let seeded = Command::new(env!("CARGO_BIN_EXE_stagediff"))
        .args(args)
        .env("STAGEDIFF_SEED", "7")
        .output()
        .unwrap();
    assert!(stdout(&seeded).contains("seed 7"));
    let flag = stagediff(&["verify", "--expr", "x0*x0", "--seed", "9", "--points", "5"]);
    assert!(stdout(&flag).contains("seed 9"));
    assert!(stdout(&flag).contains("points 5 of 5"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["diff", "--expr", "2*(x1"],
        vec!["diff", "--expr", "foo(x0)"],
        vec!["diff"],
        vec!["frobnicate"],
        vec!["bench", "--case", "nope", "--out", "/dev/null"],
        vec!["bench", "--case", "mv_f", "--impl", "magic", "--out", "/dev/null"],
        vec!["bench", "--case", "sumexp_order", "--order", "2", "--impl", "dual", "--iters", "5", "--out", "/dev/null"],
        vec!["gen-time", "--case", "mv_f", "--n-list", "1,2"],
    ] {
        let o = stagediff(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn bench_appends_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    let out_s = out.to_str().unwrap();
    for _ in 0..2 {
        let o = stagediff(&["bench", "--case", "mv_f", "--wrt", "1", "--iters", "1000", "--out", out_s]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(!String::from_utf8_lossy(&o.stderr).contains("warning"));
    }
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("case,params,impl,iters,elapsed_ms,checksum,staged"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert!(rows[0].starts_with("mv_f,wrt=1,staged,1000,"));
    assert!(rows[0].ends_with(",true"));
    assert!(rows[1].starts_with("mv_f,wrt=1,hand,1000,"));
}

#[test]
fn bench_all_skips_unsupported_impls() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let o = stagediff(&["bench", "--case", "sumexp_order", "--order", "3", "--iters", "100", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipped"));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 4);
}

#[test]
fn gen_time_reports_each_n() {
    let o = stagediff(&["gen-time", "--case", "sumexp_terms", "--n-list", "10,20,30"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,ms");
    assert!(lines[1].starts_with("10,") && lines[3].starts_with("30,"));
    assert!(lines[4].starts_with("# linear fit"));
}

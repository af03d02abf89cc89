use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;

fn crate_file(rel: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)).unwrap()
}

fn names_after(text: &str, marker: &str) -> BTreeSet<String> {
    text.match_indices(marker)
        .map(|(i, _)| {
            text[i + marker.len()..]
                .chars()
                .take_while(|c| c.is_alphanumeric() || *c == '_')
                .collect()
        })
        .collect()
}

#[test]
fn header_declares_every_export() {
    let source = crate_file("src/lib.rs");
    let header = crate_file("include/stagediff.h");
    let exported: BTreeSet<String> = names_after(&source, "extern \"C\" fn ");
    let declared: BTreeSet<String> = header
        .lines()
        .filter(|l| !l.trim_start().starts_with("/*") && !l.trim_start().starts_with('*') && l.contains('('))
        .flat_map(|l| names_after(l, "sd_"))
        .map(|n| format!("sd_{n}"))
        .collect();
    assert!(!exported.is_empty());
    assert_eq!(exported, declared);
}

#[test]
fn status_codes_match() {
    use stagediff_ffi::SdStatus::*;
    let header = crate_file("include/stagediff.h");
    for (name, status) in [
        ("OK", Ok),
        ("NULL_POINTER", NullPointer),
        ("INVALID_UTF8", InvalidUtf8),
        ("PARSE", Parse),
        ("ARITY", Arity),
        ("STAGE", Stage),
        ("PANIC", Panic),
    ] {
        let line = format!("SD_STATUS_{name} = {},", status as i32);
        assert!(header.contains(&line), "missing `{line}`");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = tempfile_dir();
    let probe = dir.join("probe.c");
    std::fs::write(
        &probe,
        r#"#include "stagediff.h"
int probe(void) {
    SdExpr *e = 0;
    SdFn *f = 0;
    char *s = 0;
    double y = 0.0, x[1] = {1.0};
    if (sd_parse("x0*x0", &e) != SD_STATUS_OK) return 1;
    sd_format(e, &s);
    sd_string_free(s);
    sd_stage(e, &f);
    sd_fn_call(f, x, 1, &y);
    (void)sd_fn_flop_count(f);
    sd_fn_free(f);
    sd_expr_free(e);
    return sd_last_error()[0] != 0;
}
"#,
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&probe)
        .output()
        .expect("C compiler runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("stagediff-header-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

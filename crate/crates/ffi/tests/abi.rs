use std::ffi::{CStr, CString};
use std::ptr;

use stagediff_ffi::*;

unsafe fn parse(text: &str) -> *mut SdExpr {
    let c = CString::new(text).unwrap();
    let mut e = ptr::null_mut();
    assert_eq!(sd_parse(c.as_ptr(), &mut e), SdStatus::Ok);
    e
}

unsafe fn text_of(e: *const SdExpr) -> String {
    let mut s = ptr::null_mut();
    assert_eq!(sd_format(e, &mut s), SdStatus::Ok);
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    sd_string_free(s);
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(sd_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn blow_up_example_through_the_abi() {
    unsafe {
        let f = parse("2*(x1*exp(x2))");
        let mut raw = ptr::null_mut();
        assert_eq!(sd_differentiate(f, 1, 1, 1, &mut raw), SdStatus::Ok);
        assert_eq!(sd_node_count(raw), 20);
        let mut simplified = ptr::null_mut();
        assert_eq!(sd_simplify(raw, &mut simplified), SdStatus::Ok);
        assert_eq!(text_of(simplified), "2 * exp(x2)");
        assert_eq!(sd_node_count(simplified), 4);
        assert_eq!(sd_arity(simplified), 3);
        for h in [f, raw, simplified] {
            sd_expr_free(h);
        }
    }
}

#[test]
fn nth_derivative_and_eval() {
    unsafe {
        let f = parse("exp(3*x0)");
        let mut d = ptr::null_mut();
        assert_eq!(sd_derivative_n(f, 0, 4, &mut d), SdStatus::Ok);
        assert_eq!(text_of(d), "81 * exp(3 * x0)");
        let x = [0.5];
        let mut y = 0.0;
        assert_eq!(sd_eval(d, x.as_ptr(), 1, &mut y), SdStatus::Ok);
        assert_eq!(y, 81.0 * 1.5f64.exp());
        sd_expr_free(f);
        sd_expr_free(d);
    }
}

#[test]
fn stage_and_call() {
    unsafe {
        let e = parse("2*exp(x2)");
        let mut f = ptr::null_mut();
        assert_eq!(sd_stage(e, &mut f), SdStatus::Ok, "{}", last_error());
        assert_eq!(sd_fn_flop_count(f), 2);
        assert_eq!(sd_fn_arity(f), 3);
        let x = [0.1, 0.2, 0.3];
        let (mut staged, mut interpreted) = (0.0f64, 0.0f64);
        assert_eq!(sd_fn_call(f, x.as_ptr(), 3, &mut staged), SdStatus::Ok);
        assert_eq!(sd_eval(e, x.as_ptr(), 3, &mut interpreted), SdStatus::Ok);
        assert_eq!(staged.to_bits(), interpreted.to_bits());
        assert_eq!(sd_fn_call(f, x.as_ptr(), 2, &mut staged), SdStatus::Arity);
        assert!(last_error().contains("need 3"));
        sd_fn_free(f);
        sd_expr_free(e);
    }
}

#[test]
fn emitted_source() {
    unsafe {
        let e = parse("2*exp(x2)");
        let mut s = ptr::null_mut();
        assert_eq!(sd_emit_source(e, &mut s), SdStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap();
        assert!(text.contains("t0 = exp(x[2]);\nt1 = 2 * t0;\nreturn t1;"), "{text}");
        sd_string_free(s);
        sd_expr_free(e);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let bad = CString::new("2*(x1").unwrap();
        let mut e = ptr::null_mut();
        assert_eq!(sd_parse(bad.as_ptr(), &mut e), SdStatus::Parse);
        assert!(e.is_null());
        assert!(last_error().contains("position 5"), "{}", last_error());

        let mut out = ptr::null_mut();
        assert_eq!(sd_simplify(ptr::null(), &mut out), SdStatus::NullPointer);
        assert_eq!(sd_parse(ptr::null(), &mut out), SdStatus::NullPointer);

        let invalid = [0xffu8, 0];
        assert_eq!(sd_parse(invalid.as_ptr().cast(), &mut out), SdStatus::InvalidUtf8);

        let ok = parse("x0");
        assert_eq!(last_error(), "");
        assert_eq!(sd_eval(ok, ptr::null(), 0, &mut 0.0), SdStatus::Arity);
        sd_expr_free(ok);

        assert_eq!(sd_node_count(ptr::null()), 0);
        sd_expr_free(ptr::null_mut());
        sd_fn_free(ptr::null_mut());
        sd_string_free(ptr::null_mut());
    }
}

//! C ABI over the `stagediff` engine.
//!
//! Handles are opaque heap objects owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns an [`SdStatus`];
//! on failure a description is available from [`sd_last_error`] on the same
//! thread. Strings returned through out-parameters are NUL-terminated and
//! released with [`sd_string_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use stagediff::{
    derivative_n, emit_source, format_expr, parse_expr, simplify, stage_compile, DiffRequest, Expr, GeneratedFn,
    VarId,
};

/// Opaque expression handle.
pub struct SdExpr(Expr);

/// Opaque compiled-function handle.
pub struct SdFn(GeneratedFn);

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Arity = 4,
    Stage = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn guard(f: impl FnOnce() -> Result<(), (SdStatus, String)>) -> SdStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SdStatus::Panic
        }
    }
}

fn null(what: &str) -> (SdStatus, String) {
    (SdStatus::NullPointer, format!("{what} is null"))
}

unsafe fn expr_ref<'a>(e: *const SdExpr) -> Result<&'a Expr, (SdStatus, String)> {
    e.as_ref().map(|h| &h.0).ok_or_else(|| null("expression handle"))
}

unsafe fn write_expr(out: *mut *mut SdExpr, e: Expr) -> Result<(), (SdStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(SdExpr(e)));
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), (SdStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw();
    Ok(())
}

unsafe fn point<'a>(x: *const f64, len: usize, arity: usize) -> Result<&'a [f64], (SdStatus, String)> {
    if len < arity {
        return Err((SdStatus::Arity, format!("need {arity} values, got {len}")));
    }
    if len == 0 {
        return Ok(&[]);
    }
    if x.is_null() {
        return Err(null("point"));
    }
    Ok(std::slice::from_raw_parts(x, len))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer is valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn sd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_parse(text: *const c_char, out: *mut *mut SdExpr) -> SdStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| (SdStatus::InvalidUtf8, e.to_string()))?;
        let e = parse_expr(text).map_err(|e| (SdStatus::Parse, e.to_string()))?;
        write_expr(out, e)
    })
}

/// # Safety
/// `e` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sd_expr_free(e: *mut SdExpr) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Infix text of `e`, parseable back by [`sd_parse`].
///
/// # Safety
/// `e` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_format(e: *const SdExpr, out: *mut *mut c_char) -> SdStatus {
    guard(|| write_string(out, format_expr(expr_ref(e)?)))
}

/// Order-`order` partial derivative along `x<wrt>`. `raw != 0` disables
/// simplification.
///
/// # Safety
/// `e` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_differentiate(
    e: *const SdExpr,
    wrt: usize,
    order: u32,
    raw: c_int,
    out: *mut *mut SdExpr,
) -> SdStatus {
    guard(|| {
        let e = expr_ref(e)?;
        let mut request = DiffRequest::new(VarId(wrt), order);
        if raw != 0 {
            request = request.raw();
        }
        write_expr(out, request.apply(e))
    })
}

/// Simplified order-`order` derivative; `order == 0` simplifies `e`.
///
/// # Safety
/// `e` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_derivative_n(e: *const SdExpr, wrt: usize, order: u32, out: *mut *mut SdExpr) -> SdStatus {
    guard(|| write_expr(out, derivative_n(expr_ref(e)?, VarId(wrt), order)))
}

/// # Safety
/// `e` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_simplify(e: *const SdExpr, out: *mut *mut SdExpr) -> SdStatus {
    guard(|| write_expr(out, simplify(expr_ref(e)?)))
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_node_count(e: *const SdExpr) -> usize {
    e.as_ref().map_or(0, |h| h.0.node_count())
}

/// One more than the highest variable index, or 0 for a null handle.
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_arity(e: *const SdExpr) -> usize {
    e.as_ref().map_or(0, |h| h.0.arity())
}

/// Tree-interpreter evaluation at `x[0..len)`.
///
/// # Safety
/// `e` must be a live handle, `x` must point to `len` doubles, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_eval(e: *const SdExpr, x: *const f64, len: usize, out: *mut f64) -> SdStatus {
    guard(|| {
        let e = expr_ref(e)?;
        let x = point(x, len, e.arity())?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = e.eval_slice(x);
        Ok(())
    })
}

/// Straight-line source of `e` in the neutral dialect.
///
/// # Safety
/// `e` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_emit_source(e: *const SdExpr, out: *mut *mut c_char) -> SdStatus {
    guard(|| write_string(out, emit_source(expr_ref(e)?, "f")))
}

/// Compile `e` to native code. Fails with `Stage` when no C toolchain works.
///
/// # Safety
/// `e` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_stage(e: *const SdExpr, out: *mut *mut SdFn) -> SdStatus {
    guard(|| {
        let e = expr_ref(e)?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let f = stage_compile(e).map_err(|err| (SdStatus::Stage, err.to_string()))?;
        *out = Box::into_raw(Box::new(SdFn(f)));
        Ok(())
    })
}

/// # Safety
/// `f` must be a live handle, `x` must point to `len` doubles, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_fn_call(f: *const SdFn, x: *const f64, len: usize, out: *mut f64) -> SdStatus {
    guard(|| {
        let f = &f.as_ref().ok_or_else(|| null("function handle"))?.0;
        let x = point(x, len, f.arity())?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = f.call_slice(x);
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_fn_flop_count(f: *const SdFn) -> usize {
    f.as_ref().map_or(0, |h| h.0.flop_count())
}

/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_fn_arity(f: *const SdFn) -> usize {
    f.as_ref().map_or(0, |h| h.0.arity())
}

/// # Safety
/// `f` must be null or a handle from [`sd_stage`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sd_fn_free(f: *mut SdFn) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

//! Ahead-of-time staging through the system C compiler.
//!
//! Expressions are lowered to C functions, compiled into a shared object
//! with `$CC` (default `cc`) and loaded with `dlopen`. Calls then run native
//! straight-line code with no per-node dispatch. Floating-point contraction
//! is disabled and the transcendental builtins are turned off so every
//! operation, and every libm call, matches the tree interpreter bit for bit.
//! The libm functions are redeclared `const`: the C compiler may merge
//! repeated calls on equal arguments, but never folds them at build time
//! with its own (differently rounded) math library.

use std::ffi::{CStr, CString};
use std::fmt::Write;
use std::process::Command;
use std::sync::Arc;

use crate::error::StageError;
use crate::expr::{eval_tree, Expr, Point};

use super::program::{emit_c_function, emit_source, Program};

/// Native entry point of a staged function: reads `x[0..arity)`.
pub type StagedEntry = unsafe extern "C" fn(*const f64) -> f64;

struct SharedLibrary {
    handle: *mut libc::c_void,
}

// The handle is only used for dlsym/dlclose, both thread-safe.
unsafe impl Send for SharedLibrary {}
unsafe impl Sync for SharedLibrary {}

impl SharedLibrary {
    fn open(path: &std::path::Path) -> Result<SharedLibrary, StageError> {
        let c_path = CString::new(path.as_os_str().as_encoded_bytes())
            .map_err(|e| StageError::Load(e.to_string()))?;
        let handle = unsafe { libc::dlopen(c_path.as_ptr(), libc::RTLD_NOW | libc::RTLD_LOCAL) };
        if handle.is_null() {
            return Err(StageError::Load(last_dl_error()));
        }
        Ok(SharedLibrary { handle })
    }

    fn symbol(&self, name: &str) -> Result<StagedEntry, StageError> {
        let c_name = CString::new(name).map_err(|e| StageError::Load(e.to_string()))?;
        let ptr = unsafe { libc::dlsym(self.handle, c_name.as_ptr()) };
        if ptr.is_null() {
            return Err(StageError::Load(last_dl_error()));
        }
        // SAFETY: every symbol we look up was emitted as `double f(const double *)`.
        Ok(unsafe { std::mem::transmute::<*mut libc::c_void, StagedEntry>(ptr) })
    }
}

impl Drop for SharedLibrary {
    fn drop(&mut self) {
        unsafe {
            libc::dlclose(self.handle);
        }
    }
}

fn last_dl_error() -> String {
    let msg = unsafe { libc::dlerror() };
    if msg.is_null() {
        "unknown dlopen error".into()
    } else {
        unsafe { CStr::from_ptr(msg) }.to_string_lossy().into_owned()
    }
}

enum Backend {
    Staged {
        entry: StagedEntry,
        _library: Arc<SharedLibrary>,
    },
    Interpreted {
        expr: Expr,
        reason: String,
    },
}

/// A compiled evaluation function.
pub struct GeneratedFn {
    arity: usize,
    flop_count: usize,
    source: String,
    backend: Backend,
}

impl GeneratedFn {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn flop_count(&self) -> usize {
        self.flop_count
    }

    /// Neutral straight-line text of the function.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// False if this function fell back to the tree interpreter.
    pub fn is_staged(&self) -> bool {
        matches!(self.backend, Backend::Staged { .. })
    }

    /// Why staging was not used, if it was not.
    pub fn fallback_reason(&self) -> Option<&str> {
        match &self.backend {
            Backend::Staged { .. } => None,
            Backend::Interpreted { reason, .. } => Some(reason),
        }
    }

    /// Raw native entry point. The pointer stays valid while `self` lives.
    pub fn entry(&self) -> Option<StagedEntry> {
        match self.backend {
            Backend::Staged { entry, .. } => Some(entry),
            Backend::Interpreted { .. } => None,
        }
    }

    /// Evaluate at `x`. Panics if `x` is shorter than the arity.
    pub fn call_slice(&self, x: &[f64]) -> f64 {
        assert!(x.len() >= self.arity, "point has {} values, need {}", x.len(), self.arity);
        match &self.backend {
            // SAFETY: length checked above; the library is kept alive by self.
            Backend::Staged { entry, .. } => unsafe { entry(x.as_ptr()) },
            Backend::Interpreted { expr, .. } => expr.eval_slice(x),
        }
    }

    pub fn call(&self, p: &Point) -> f64 {
        self.call_slice(p.values())
    }

    /// Interpreter-backed function, flagged as not staged.
    pub fn interpreted(e: &Expr, reason: impl Into<String>) -> GeneratedFn {
        GeneratedFn {
            arity: e.arity(),
            flop_count: e.operation_count(),
            source: emit_source(e, "f"),
            backend: Backend::Interpreted {
                expr: e.clone(),
                reason: reason.into(),
            },
        }
    }
}

impl std::fmt::Debug for GeneratedFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeneratedFn")
            .field("arity", &self.arity)
            .field("flop_count", &self.flop_count)
            .field("staged", &self.is_staged())
            .finish()
    }
}

fn compiler() -> String {
    std::env::var("CC").ok().filter(|s| !s.is_empty()).unwrap_or_else(|| "cc".into())
}

const C_FLAGS: &[&str] = &[
    "-std=c99",
    "-O2",
    "-fPIC",
    "-shared",
    "-ffp-contract=off",
    "-fno-fast-math",
    "-fno-math-errno",
    "-fno-builtin-exp",
    "-fno-builtin-log",
    "-fno-builtin-sin",
    "-fno-builtin-cos",
    "-fno-builtin-tan",
];

const C_PRELUDE: &str = "\
double exp(double) __attribute__((const));
double log(double) __attribute__((const));
double sin(double) __attribute__((const));
double cos(double) __attribute__((const));
double tan(double) __attribute__((const));
double sqrt(double) __attribute__((const));

";

/// Compile one function.
pub fn stage_compile(e: &Expr) -> Result<GeneratedFn, StageError> {
    let mut fns = stage_compile_many(std::slice::from_ref(e))?;
    Ok(fns.pop().expect("one function per input"))
}

/// Compile several functions into one shared object with a single compiler run.
pub fn stage_compile_many(exprs: &[Expr]) -> Result<Vec<GeneratedFn>, StageError> {
    let programs: Vec<Program> = exprs.iter().map(Program::lower).collect();
    let mut c_source = String::from(C_PRELUDE);
    for (i, program) in programs.iter().enumerate() {
        let _ = write!(c_source, "{}", emit_c_function(program, &format!("stagediff_fn_{i}")));
    }

    let dir = tempfile::Builder::new().prefix("stagediff-").tempdir()?;
    let src_path = dir.path().join("staged.c");
    let lib_path = dir.path().join("libstaged.so");
    std::fs::write(&src_path, &c_source)?;

    let cc = compiler();
    let output = Command::new(&cc)
        .args(C_FLAGS)
        .arg("-o")
        .arg(&lib_path)
        .arg(&src_path)
        .arg("-lm")
        .output()
        .map_err(|e| StageError::Compiler {
            compiler: cc.clone(),
            stderr: e.to_string(),
        })?;
    if !output.status.success() {
        return Err(StageError::Compiler {
            compiler: cc,
            stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        });
    }

    // the object stays mapped after its file is removed with `dir`
    let library = Arc::new(SharedLibrary::open(&lib_path)?);
    exprs
        .iter()
        .zip(&programs)
        .enumerate()
        .map(|(i, (e, program))| {
            Ok(GeneratedFn {
                arity: program.arity,
                flop_count: program.flop_count(),
                source: emit_source(e, &format!("f{i}")),
                backend: Backend::Staged {
                    entry: library.symbol(&format!("stagediff_fn_{i}"))?,
                    _library: Arc::clone(&library),
                },
            })
        })
        .collect()
}

/// Stage if the toolchain works, otherwise fall back to the interpreter with
/// the failure recorded in [`GeneratedFn::fallback_reason`].
pub fn stage_or_interpret(e: &Expr) -> GeneratedFn {
    stage_compile(e).unwrap_or_else(|err| GeneratedFn::interpreted(e, err.to_string()))
}

/// Batch version of [`stage_or_interpret`].
pub fn stage_or_interpret_many(exprs: &[Expr]) -> Vec<GeneratedFn> {
    match stage_compile_many(exprs) {
        Ok(fns) => fns,
        Err(err) => {
            let reason = err.to_string();
            exprs.iter().map(|e| GeneratedFn::interpreted(e, reason.clone())).collect()
        }
    }
}

/// Convenience check used by tests and `verify`: staged value vs interpreter.
pub fn bitwise_agrees(f: &GeneratedFn, e: &Expr, p: &Point) -> bool {
    let staged = f.call(p);
    let reference = eval_tree(e, p).expect("point covers expression");
    staged.to_bits() == reference.to_bits() || (staged.is_nan() && reference.is_nan())
}

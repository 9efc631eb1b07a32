//! C ABI over the `qtriple` solvers.
//!
//! A run is described by the same TOML document the command-line tool reads.
//! Results come back behind an opaque [`QtRun`] handle; every entry point
//! returns a [`QtStatus`] and records a message retrievable with
//! [`qt_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qtriple::cli::{self, CliError, Command, RunOutput};
use qtriple::QError;

/// Status codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Domain = 4,
    Hypothesis = 5,
    NonConvergence = 6,
    Conditioning = 7,
    IterationDiverged = 8,
    OutOfRange = 9,
    Solver = 10,
    Panic = 11,
}

/// Commands accepted by [`qt_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtCommand {
    /// Use the `command` key of the configuration.
    FromConfig = 0,
    Verify = 1,
    SolveDual = 2,
    SolveTriple = 3,
    SolveTriple2 = 4,
    Example1 = 5,
    Example2 = 6,
}

/// Opaque result of one run.
pub struct QtRun {
    out: RunOutput,
    summary: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of_q(e: &QError) -> QtStatus {
    match e {
        QError::Domain(_) | QError::Pole(_) | QError::NoLimit(_) => QtStatus::Domain,
        QError::Hypothesis(_) => QtStatus::Hypothesis,
        QError::NonConvergence { .. } | QError::Divergence(_) => QtStatus::NonConvergence,
        QError::Conditioning { .. } => QtStatus::Conditioning,
        QError::IterationDiverged { .. } => QtStatus::IterationDiverged,
        QError::Window(_) => QtStatus::Solver,
    }
}

fn status_of(e: &CliError) -> QtStatus {
    match e {
        CliError::Config(_) => QtStatus::Config,
        CliError::Solver { source, .. } => status_of_q(source),
        CliError::Io(_) => QtStatus::Solver,
    }
}

fn guarded(f: impl FnOnce() -> QtStatus) -> QtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            QtStatus::Panic
        }
    }
}

/// Runs `command` on the TOML configuration `config` and stores a new handle
/// in `*out`. Nothing is written to disk.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qt_run(config: *const c_char, command: QtCommand, out: *mut *mut QtRun) -> QtStatus {
    guarded(|| {
        if config.is_null() || out.is_null() {
            set_error("null pointer argument");
            return QtStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(config).to_str() else {
            set_error("configuration is not valid UTF-8");
            return QtStatus::InvalidUtf8;
        };
        let cfg = match cli::parse_config(text) {
            Ok(c) => c,
            Err(e) => {
                set_error(e.to_string());
                return status_of(&e);
            }
        };
        let cmd = match command {
            QtCommand::FromConfig => match cfg.command {
                Some(c) => c,
                None => {
                    set_error("config: command missing");
                    return QtStatus::Config;
                }
            },
            QtCommand::Verify => Command::Verify,
            QtCommand::SolveDual => Command::SolveDual,
            QtCommand::SolveTriple => Command::SolveTriple,
            QtCommand::SolveTriple2 => Command::SolveTriple2,
            QtCommand::Example1 => Command::Example1,
            QtCommand::Example2 => Command::Example2,
        };
        match cli::run(&cfg, cmd, false) {
            Ok(o) => {
                let summary = CString::new(o.summary.replace('\0', " ")).unwrap_or_default();
                *out = Box::into_raw(Box::new(QtRun { out: o, summary }));
                QtStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `run` must come from [`qt_run`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qt_run_free(run: *mut QtRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of `(k, u, psi)` samples.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qt_run_len(run: *const QtRun) -> usize {
    run.as_ref().map_or(0, |r| r.out.psi.len())
}

/// Reads sample `index`.
///
/// # Safety
/// `run` must be a live handle; the output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qt_run_sample(run: *const QtRun, index: usize, k: *mut i64, u: *mut f64, psi: *mut f64) -> QtStatus {
    let Some(r) = run.as_ref() else {
        set_error("null handle");
        return QtStatus::NullPointer;
    };
    if k.is_null() || u.is_null() || psi.is_null() {
        set_error("null output pointer");
        return QtStatus::NullPointer;
    }
    let Some(&(kk, uu, pp)) = r.out.psi.get(index) else {
        set_error(format!("index {index} out of range (len {})", r.out.psi.len()));
        return QtStatus::OutOfRange;
    };
    *k = kk;
    *u = uu;
    *psi = pp;
    QtStatus::Ok
}

/// Largest residual of the run, or NaN for a null handle.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qt_run_max_residual(run: *const QtRun) -> f64 {
    run.as_ref()
        .map_or(f64::NAN, |r| r.out.residuals.iter().fold(0.0, |m, x| m.max(x.residual)))
}

/// 1 when every check met its threshold, else 0.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qt_run_passed(run: *const QtRun) -> i32 {
    run.as_ref().map_or(0, |r| r.out.passed as i32)
}

/// Human-readable summary; valid until the handle is freed.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qt_run_summary(run: *const QtRun) -> *const c_char {
    run.as_ref().map_or(ptr::null(), |r| r.summary.as_ptr())
}

/// `J_nu(z; qb)` for the third Jackson q-Bessel function.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qt_qbessel3(nu: f64, z: f64, qb: f64, out: *mut f64) -> QtStatus {
    if out.is_null() {
        set_error("null output pointer");
        return QtStatus::NullPointer;
    }
    guarded(|| match qtriple::qspecial::qbessel3(nu, z, qb) {
        Ok(v) => {
            *out = v;
            QtStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_of_q(&e)
        }
    })
}

/// Message for the last failure on this thread; empty if none.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

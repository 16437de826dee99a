//! C ABI over `subdiff`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free`. Every entry point returns an [`SdcStatus`]
//! (or a sentinel such as NaN for plain getters) and never unwinds across
//! the boundary. The message of the most recent failure on the calling
//! thread is available from [`sdc_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use subdiff::actuators::is_strategic;
use subdiff::config::{Problem, ProblemConfig};
use subdiff::penalty::energy;
use subdiff::rhum::{solve_rhum, RhumSolution};
use subdiff::special::mittag_leffler;
use subdiff::Error;

/// Result codes. `SdcStatus::Ok` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdcStatus {
    Ok = 0,
    NullPointer,
    InvalidUtf8,
    Parse,
    Validation,
    Domain,
    NonStrategic,
    SingularGramian,
    Quadrature,
    Numerical,
    TransferMissed,
    BufferTooSmall,
    Io,
    Panic,
}

impl From<&Error> for SdcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse(_) => SdcStatus::Parse,
            Error::Validation { .. } | Error::InvalidSignal(_) | Error::Interval(_) | Error::Location(_) | Error::Rank(_) => {
                SdcStatus::Validation
            }
            Error::Domain(_) | Error::Pole(_) => SdcStatus::Domain,
            Error::NonStrategic { .. } | Error::Infeasible { .. } => SdcStatus::NonStrategic,
            Error::SingularGramian { .. } => SdcStatus::SingularGramian,
            Error::Quadrature(_) | Error::NonIntegrableSingularity { .. } => SdcStatus::Quadrature,
            Error::NonConvergence(_) | Error::LossOfPrecision(_) => SdcStatus::Numerical,
            Error::TransferMissed { .. } => SdcStatus::TransferMissed,
            Error::Io(_) => SdcStatus::Io,
        }
    }
}

/// A validated problem.
pub struct SdcProblem {
    problem: Problem,
}

/// A synthesized minimum-energy control and its verification.
pub struct SdcSynthesis {
    solution: RhumSolution,
    energy: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: SdcStatus, msg: impl Into<String>) -> SdcStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> SdcStatus {
    fail(SdcStatus::from(&e), e.to_string())
}

/// Runs `f`, converting a panic into `SdcStatus::Panic`.
fn guard<F: FnOnce() -> SdcStatus>(f: F) -> SdcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            fail(SdcStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

/// Parses and validates a JSON problem description.
///
/// # Safety
/// `json` must be null or a NUL-terminated string; `out` must be null or
/// valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn sdc_problem_from_json(json: *const c_char, out: *mut *mut SdcProblem) -> SdcStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(SdcStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(e) => return fail(SdcStatus::InvalidUtf8, e.to_string()),
        };
        match ProblemConfig::from_json(text).and_then(|c| c.build()) {
            Ok(problem) => {
                *out = Box::into_raw(Box::new(SdcProblem { problem }));
                SdcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `problem` must be null or a handle from `sdc_problem_from_json` that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn sdc_problem_free(problem: *mut SdcProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// `E_{p,q}(z)` for real `z`.
///
/// # Safety
/// `out` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sdc_mittag_leffler(p: f64, q: f64, z: f64, out: *mut f64) -> SdcStatus {
    guard(|| {
        if out.is_null() {
            return fail(SdcStatus::NullPointer, "null output");
        }
        match mittag_leffler(p, q, z) {
            Ok(v) => {
                *out = v;
                SdcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Synthesizes the minimum-energy control steering the problem into its
/// target subspace.
///
/// # Safety
/// `problem` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sdc_synthesize(problem: *const SdcProblem, out: *mut *mut SdcSynthesis) -> SdcStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            return fail(SdcStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let p = &(*problem).problem;
        match solve_rhum(p) {
            Ok(solution) => {
                let energy = energy(&solution.u_star);
                *out = Box::into_raw(Box::new(SdcSynthesis { solution, energy }));
                SdcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of control samples (`n_steps + 1`); 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sdc_synthesis_control_len(s: *const SdcSynthesis) -> usize {
    if s.is_null() {
        0
    } else {
        (*s).solution.u_star.values().len()
    }
}

/// Copies the control samples into `buf`, which must hold at least
/// `sdc_synthesis_control_len` values.
///
/// # Safety
/// `s` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sdc_synthesis_control(s: *const SdcSynthesis, buf: *mut f64, len: usize) -> SdcStatus {
    guard(|| {
        if s.is_null() || buf.is_null() {
            return fail(SdcStatus::NullPointer, "null argument");
        }
        let values = (*s).solution.u_star.values();
        if len < values.len() {
            return fail(
                SdcStatus::BufferTooSmall,
                format!("buffer holds {len} values, {} needed", values.len()),
            );
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        SdcStatus::Ok
    })
}

/// `½∫u²`; NaN for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sdc_synthesis_energy(s: *const SdcSynthesis) -> f64 {
    if s.is_null() {
        f64::NAN
    } else {
        (*s).energy
    }
}

/// Distance of the simulated final state to the target; NaN for a null
/// handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sdc_synthesis_distance(s: *const SdcSynthesis) -> f64 {
    if s.is_null() {
        f64::NAN
    } else {
        (*s).solution.distance
    }
}

/// # Safety
/// `s` must be null or a handle from `sdc_synthesize` that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn sdc_synthesis_free(s: *mut SdcSynthesis) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Strategic-actuator check. Writes 1 or 0 to `strategic`, the number of
/// dead modes to `n_dead`, and up to `cap` of the (1-based) dead modes to
/// `dead`. Returns `BufferTooSmall` when `cap < *n_dead`; the count is
/// still written.
///
/// # Safety
/// `problem` must be a live handle, `strategic` and `n_dead` valid for one
/// write, and `dead` null (with `cap == 0`) or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn sdc_analyze(
    problem: *const SdcProblem,
    strategic: *mut i32,
    dead: *mut usize,
    cap: usize,
    n_dead: *mut usize,
) -> SdcStatus {
    guard(|| {
        if problem.is_null() || strategic.is_null() || n_dead.is_null() || (dead.is_null() && cap > 0) {
            return fail(SdcStatus::NullPointer, "null argument");
        }
        let p = &(*problem).problem;
        let report = is_strategic(&p.actuator, &p.target, p.tolerances.gramian_rank);
        *strategic = i32::from(report.strategic);
        *n_dead = report.dead_modes.len();
        if cap < report.dead_modes.len() {
            return fail(
                SdcStatus::BufferTooSmall,
                format!("{} dead modes, buffer holds {cap}", report.dead_modes.len()),
            );
        }
        if !report.dead_modes.is_empty() {
            ptr::copy_nonoverlapping(report.dead_modes.as_ptr(), dead, report.dead_modes.len());
        }
        SdcStatus::Ok
    })
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn sdc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

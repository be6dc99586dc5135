//! C interface to the hyperqual model checker.
//!
//! Handles are opaque and owned by the caller; release each one with its
//! `*_free` function. Every fallible call returns an [`HqStatus`] and, on
//! failure, leaves a message readable through [`hq_last_error`].

#![allow(clippy::not_unsafe_ptr_arg_deref)]

use hyperqual::checker::{check, mc_prop_value, Answer, CheckError, Options, Query, Verdict};
use hyperqual::formula::{parse_formula, Formula};
use hyperqual::kripke::{parse_kripke, WeightedKripke};
use hyperqual::rational::{fmt_rational, parse_rational, Rational};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HqStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InputError = 4,
    CapExceeded = 5,
    NeedsEpsilon = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HqOp {
    Ge = 0,
    Le = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HqAnswer {
    Holds = 0,
    Fails = 1,
    UnknownWithinEpsilon = 2,
}

/// A parsed weighted Kripke structure.
pub struct HqKripke(WeightedKripke);

/// A parsed closed formula.
pub struct HqFormula(Formula);

/// Result of a threshold check.
pub struct HqVerdict(Verdict);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: HqStatus, msg: impl Into<String>) -> HqStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> HqStatus) -> HqStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(HqStatus::Panic, "panic inside hyperqual"))
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, HqStatus> {
    if p.is_null() {
        return Err(fail(HqStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(HqStatus::InvalidUtf8, "string is not UTF-8"))
}

fn rational(s: &str) -> Result<Rational, HqStatus> {
    parse_rational(s).map_err(|e| fail(HqStatus::ParseError, e.to_string()))
}

fn check_status(e: CheckError) -> HqStatus {
    let status = if e.is_cap() {
        HqStatus::CapExceeded
    } else if e == CheckError::NeedsEpsilon {
        HqStatus::NeedsEpsilon
    } else {
        HqStatus::InputError
    };
    fail(status, e.to_string())
}

fn options(state_cap: usize) -> Options {
    if state_cap == 0 {
        Options::default()
    } else {
        Options { state_cap }
    }
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(HqStatus::NullArgument, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

/// Message for the most recent failure on this thread, or null. The
/// pointer stays valid until the next hyperqual call on the same thread.
#[no_mangle]
pub extern "C" fn hq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a structure in the `.wks` text format.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn hq_kripke_parse(src: *const c_char, out: *mut *mut HqKripke) -> HqStatus {
    guard(|| {
        non_null!(out);
        let s = try_status!(text(src));
        match parse_kripke(s) {
            Ok(k) => {
                *out = Box::into_raw(Box::new(HqKripke(k)));
                HqStatus::Ok
            }
            Err(e) => fail(HqStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `k` must be null or a handle from [`hq_kripke_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hq_kripke_free(k: *mut HqKripke) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Parses a closed formula in the `.hq` text format.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn hq_formula_parse(src: *const c_char, out: *mut *mut HqFormula) -> HqStatus {
    guard(|| {
        non_null!(out);
        let s = try_status!(text(src));
        match parse_formula(s) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(HqFormula(f)));
                HqStatus::Ok
            }
            Err(e) => fail(HqStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `f` must be null or a handle from [`hq_formula_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hq_formula_free(f: *mut HqFormula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Decides `value(formula) op threshold` on `kripke`. `threshold` and
/// `epsilon` are rationals such as `"1/2"` or `"0.25"`; `epsilon` may be
/// null, in which case formulas outside the exact fragments yield
/// `NeedsEpsilon`. A `state_cap` of 0 selects the default cap.
///
/// # Safety
/// Handles must be live, strings NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hq_check(
    kripke: *const HqKripke,
    formula: *const HqFormula,
    op: HqOp,
    threshold: *const c_char,
    epsilon: *const c_char,
    state_cap: usize,
    out: *mut *mut HqVerdict,
) -> HqStatus {
    guard(|| {
        non_null!(kripke, formula, out);
        let v = try_status!(rational(try_status!(text(threshold))));
        let eps = if epsilon.is_null() { None } else { Some(try_status!(rational(try_status!(text(epsilon))))) };
        let q = match op {
            HqOp::Ge => Query::Ge(v),
            HqOp::Le => Query::Le(v),
        };
        match check(&(*formula).0, &(*kripke).0, &q, eps.as_ref(), &options(state_cap)) {
            Ok(verdict) => {
                *out = Box::into_raw(Box::new(HqVerdict(verdict)));
                HqStatus::Ok
            }
            Err(e) => check_status(e),
        }
    })
}

/// Exact value of a propositional-quality formula, written to `out` as a
/// string to be released with [`hq_string_free`].
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hq_prop_value(
    kripke: *const HqKripke,
    formula: *const HqFormula,
    state_cap: usize,
    out: *mut *mut c_char,
) -> HqStatus {
    guard(|| {
        non_null!(kripke, formula, out);
        match mc_prop_value(&(*formula).0, &(*kripke).0, &options(state_cap)) {
            Ok(v) => {
                *out = CString::new(fmt_rational(&v)).unwrap_or_default().into_raw();
                HqStatus::Ok
            }
            Err(e) => check_status(e),
        }
    })
}

/// # Safety
/// `v` must be a live verdict handle.
#[no_mangle]
pub unsafe extern "C" fn hq_verdict_answer(v: *const HqVerdict) -> HqAnswer {
    match (*v).0.answer {
        Answer::Holds => HqAnswer::Holds,
        Answer::Fails => HqAnswer::Fails,
        Answer::UnknownWithinEpsilon => HqAnswer::UnknownWithinEpsilon,
    }
}

/// Verdict as a JSON document; release with [`hq_string_free`].
///
/// # Safety
/// `v` must be null or a live verdict handle.
#[no_mangle]
pub unsafe extern "C" fn hq_verdict_json(v: *const HqVerdict) -> *mut c_char {
    if v.is_null() {
        return ptr::null_mut();
    }
    CString::new((*v).0.to_json().to_string()).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `v` must be null or a handle from [`hq_check`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hq_verdict_free(v: *mut HqVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parse_errors_set_message() {
        assert_eq!(rational("nope"), Err(HqStatus::ParseError));
        assert!(!hq_last_error().is_null());
    }

    #[test]
    fn zero_cap_means_default() {
        assert_eq!(options(0), Options::default());
        assert_eq!(options(7).state_cap, 7);
    }
}

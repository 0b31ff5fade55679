//! C bindings: parse an election once, then run JSON requests against it.
//!
//! Every function returns an `ApStatus`. On failure the message is available
//! from `ap_last_error` until the next call on the same thread. Strings
//! returned through out-pointers must be released with `ap_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use approbust::cli::{error_report, run, run_on, RunRequest};
use approbust::format::parse_election;
use approbust::{Election, Error};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Validation = 3,
    CapExceeded = 4,
    InvalidRequest = 5,
    Panic = 6,
}

/// Opaque parsed election.
pub struct ApElection {
    inner: Election,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn from_error(err: &Error) -> ApStatus {
    set_error(err.to_string());
    if err.is_cap_exceeded() {
        ApStatus::CapExceeded
    } else {
        ApStatus::Validation
    }
}

unsafe fn read_str<'a>(text: *const c_char) -> Result<&'a str, ApStatus> {
    if text.is_null() {
        set_error("null string argument");
        return Err(ApStatus::NullPointer);
    }
    CStr::from_ptr(text).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        ApStatus::InvalidUtf8
    })
}

fn guarded(body: impl FnOnce() -> ApStatus) -> ApStatus {
    clear_error();
    catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|_| {
        set_error("internal panic");
        ApStatus::Panic
    })
}

/// Parses an election in the text format into `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ap_election_parse(text: *const c_char, out: *mut *mut ApElection) -> ApStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return ApStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match parse_election(text) {
            Ok(e) => {
                *out = Box::into_raw(Box::new(ApElection { inner: e }));
                ApStatus::Ok
            }
            Err(err) => from_error(&err),
        }
    })
}

/// Releases an election; null is ignored.
///
/// # Safety
/// `election` must come from `ap_election_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ap_election_free(election: *mut ApElection) {
    if !election.is_null() {
        drop(Box::from_raw(election));
    }
}

/// Number of candidates, or 0 for null.
///
/// # Safety
/// `election` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ap_election_num_candidates(election: *const ApElection) -> usize {
    election.as_ref().map_or(0, |e| e.inner.num_candidates())
}

/// Number of voters, or 0 for null.
///
/// # Safety
/// `election` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ap_election_num_voters(election: *const ApElection) -> usize {
    election.as_ref().map_or(0, |e| e.inner.num_voters())
}

/// Runs a JSON request. With a non-null `election` the request runs on it
/// (`winners`, `radius`, `count`, `level`); otherwise the request must carry
/// its own inputs. On success `*out` holds the JSON result; on a validation
/// or cap error it holds the JSON error body.
///
/// # Safety
/// `request_json` must be a NUL-terminated string, `out` a valid pointer and
/// `election` null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ap_run_json(
    election: *const ApElection,
    request_json: *const c_char,
    out: *mut *mut c_char,
) -> ApStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return ApStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let text = match read_str(request_json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let req: RunRequest = match serde_json::from_str(text) {
            Ok(r) => r,
            Err(e) => {
                set_error(format!("invalid request: {e}"));
                return ApStatus::InvalidRequest;
            }
        };
        let result = match election.as_ref() {
            Some(e) => run_on(&req, &e.inner),
            None => run(&req),
        };
        let (body, status) = match result {
            Ok(value) => (value, ApStatus::Ok),
            Err(err) => {
                let status = from_error(&err);
                (error_report(&err).0, status)
            }
        };
        match CString::new(body.to_string()) {
            Ok(s) => {
                *out = s.into_raw();
                status
            }
            Err(_) => {
                set_error("result contains a NUL byte");
                ApStatus::Panic
            }
        }
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ap_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failure on this thread, or null. Valid until the
/// next call into the library.
#[no_mangle]
pub extern "C" fn ap_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

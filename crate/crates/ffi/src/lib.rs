//! C ABI for the skellamk toolkit: opaque handles, integer status codes,
//! and a cbindgen-generated header (`include/skellamk.h`).
//!
//! Conventions:
//! - every fallible call returns [`SkStatus`]; non-`Ok` codes leave a
//!   message retrievable via [`skellamk_last_error`]
//! - handles created by `*_new`/`*_parse` functions must be released with
//!   the matching `*_free`
//! - all pointers must be valid for the duration of the call; strings are
//!   NUL-terminated UTF-8

use skellamk::analytic::{self, PmfTable};
use skellamk::error::Error;
use skellamk::montecarlo;
use skellamk::process::ProcessSpec;
use skellamk::trajectories;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    DomainError = 4,
    UnsupportedFamily = 5,
    NonConvergence = 6,
    Overflow = 7,
    IoError = 8,
    InternalError = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap_or_default());
}

fn status_of(err: &Error) -> SkStatus {
    match err {
        Error::Domain(_) => SkStatus::DomainError,
        Error::UnsupportedFamily { .. } => SkStatus::UnsupportedFamily,
        Error::NonConvergence { .. } => SkStatus::NonConvergence,
        Error::Overflow(_) => SkStatus::Overflow,
        Error::PrecisionLoss { .. } => SkStatus::NonConvergence,
        Error::Support(_) | Error::Size(_) | Error::Coverage { .. } => SkStatus::DomainError,
        Error::Parse(_) | Error::Json(_) => SkStatus::ParseError,
        Error::Io(_) => SkStatus::IoError,
    }
}

fn fail(err: Error) -> SkStatus {
    let code = status_of(&err);
    set_error(&err.to_string());
    code
}

/// Opaque process handle.
pub struct SkProcess {
    spec: ProcessSpec,
}

/// Opaque PMF table handle.
pub struct SkPmfTable {
    table: PmfTable,
}

/// Copy the last error message into `buf` (NUL-terminated, truncated to
/// `len` bytes including the terminator). Returns the full message length.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes, or be NULL (in which
/// case only the required length is returned).
#[no_mangle]
pub unsafe extern "C" fn skellamk_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            // always terminate
            *buf.add(n - 1) = 0;
        }
        bytes.len() - 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn skellamk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, SkStatus> {
    if ptr.is_null() {
        set_error("null string pointer");
        return Err(SkStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        SkStatus::InvalidUtf8
    })
}

/// Create a process handle from a family name and `key=value` parameters
/// (same syntax as the CLI, e.g. `"spok"`, `"k=2,l1=1,l2=1"`).
///
/// # Safety
/// `name` and `params` are NUL-terminated strings; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn skellamk_process_parse(
    name: *const c_char,
    params: *const c_char,
    out: *mut *mut SkProcess,
) -> SkStatus {
    if out.is_null() {
        set_error("null output pointer");
        return SkStatus::NullPointer;
    }
    let name = match read_str(name) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let params = match read_str(params) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match skellamk::cli::parse_process(name, params) {
        Ok(spec) => {
            *out = Box::into_raw(Box::new(SkProcess { spec }));
            SkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Create a process handle from its JSON description.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn skellamk_process_from_json(
    json: *const c_char,
    out: *mut *mut SkProcess,
) -> SkStatus {
    if out.is_null() {
        set_error("null output pointer");
        return SkStatus::NullPointer;
    }
    let json = match read_str(json) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let spec: ProcessSpec = match serde_json::from_str(json) {
        Ok(s) => s,
        Err(e) => {
            set_error(&e.to_string());
            return SkStatus::ParseError;
        }
    };
    if let Err(e) = spec.validate() {
        return fail(e);
    }
    *out = Box::into_raw(Box::new(SkProcess { spec }));
    SkStatus::Ok
}

/// Release a process handle.
///
/// # Safety
/// `p` must come from a `skellamk_process_*` constructor (or be NULL).
#[no_mangle]
pub unsafe extern "C" fn skellamk_process_free(p: *mut SkProcess) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Evaluate `P(X(t) = m)`.
///
/// # Safety
/// `p` is a live process handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn skellamk_pmf(
    p: *const SkProcess,
    t: f64,
    m: i64,
    tol: f64,
    out: *mut f64,
) -> SkStatus {
    if p.is_null() || out.is_null() {
        set_error("null pointer");
        return SkStatus::NullPointer;
    }
    match analytic::pmf_point(&(*p).spec, t, m, tol) {
        Ok(v) => {
            *out = v;
            SkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Mean and variance of `X(t)`.
///
/// # Safety
/// `p` is a live process handle; `mean` and `variance` must be valid.
#[no_mangle]
pub unsafe extern "C" fn skellamk_moments(
    p: *const SkProcess,
    t: f64,
    mean: *mut f64,
    variance: *mut f64,
) -> SkStatus {
    if p.is_null() || mean.is_null() || variance.is_null() {
        set_error("null pointer");
        return SkStatus::NullPointer;
    }
    match analytic::moments(&(*p).spec, t) {
        Ok((m, v)) => {
            *mean = m;
            *variance = v;
            SkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Build the PMF table over the automatically selected window.
///
/// # Safety
/// `p` is a live process handle; `out` must be valid. The returned handle
/// must be released with [`skellamk_pmf_table_free`].
#[no_mangle]
pub unsafe extern "C" fn skellamk_pmf_table_new(
    p: *const SkProcess,
    t: f64,
    tol: f64,
    out: *mut *mut SkPmfTable,
) -> SkStatus {
    if p.is_null() || out.is_null() {
        set_error("null pointer");
        return SkStatus::NullPointer;
    }
    match analytic::pmf_table(&(*p).spec, t, tol) {
        Ok(table) => {
            *out = Box::into_raw(Box::new(SkPmfTable { table }));
            SkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Lowest location of the table window.
///
/// # Safety
/// `table` must be a live table handle.
#[no_mangle]
pub unsafe extern "C" fn skellamk_pmf_table_lo(table: *const SkPmfTable) -> i64 {
    (*table).table.m_lo
}

/// Highest location of the table window.
///
/// # Safety
/// `table` must be a live table handle.
#[no_mangle]
pub unsafe extern "C" fn skellamk_pmf_table_hi(table: *const SkPmfTable) -> i64 {
    (*table).table.m_hi
}

/// Bound on the probability mass outside the window.
///
/// # Safety
/// `table` must be a live table handle.
#[no_mangle]
pub unsafe extern "C" fn skellamk_pmf_table_bound(table: *const SkPmfTable) -> f64 {
    (*table).table.truncation_bound
}

/// Probability at `m` (0 outside the window).
///
/// # Safety
/// `table` must be a live table handle.
#[no_mangle]
pub unsafe extern "C" fn skellamk_pmf_table_prob(table: *const SkPmfTable, m: i64) -> f64 {
    (*table).table.prob_or_zero(m)
}

/// Release a table handle.
///
/// # Safety
/// `table` must come from [`skellamk_pmf_table_new`] (or be NULL).
#[no_mangle]
pub unsafe extern "C" fn skellamk_pmf_table_free(table: *mut SkPmfTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Simulate one path over `[0, horizon]` and write it as `t,value` CSV.
///
/// # Safety
/// `p` is a live process handle; `path` is a NUL-terminated file path.
#[no_mangle]
pub unsafe extern "C" fn skellamk_simulate_csv(
    p: *const SkProcess,
    horizon: f64,
    seed: u64,
    path: *const c_char,
) -> SkStatus {
    if p.is_null() {
        set_error("null process handle");
        return SkStatus::NullPointer;
    }
    let path = match read_str(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let mut rng = montecarlo::replicate_rng(seed, 0);
    let traj = match trajectories::simulate(&(*p).spec, horizon, &mut rng) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let mut buf = Vec::new();
    if let Err(e) = traj.write_csv(&mut buf) {
        return fail(e);
    }
    match std::fs::write(path, buf) {
        Ok(()) => SkStatus::Ok,
        Err(e) => fail(Error::Io(e)),
    }
}

/// One terminal draw of `X(t)` under the replicate-keyed stream
/// `(seed, replicate)`.
///
/// # Safety
/// `p` is a live process handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn skellamk_sample_terminal(
    p: *const SkProcess,
    t: f64,
    seed: u64,
    replicate: u64,
    out: *mut f64,
) -> SkStatus {
    if p.is_null() || out.is_null() {
        set_error("null pointer");
        return SkStatus::NullPointer;
    }
    let mut rng = montecarlo::replicate_rng(seed, replicate);
    match trajectories::sample_terminal(&(*p).spec, t, &mut rng) {
        Ok(v) => {
            *out = v;
            SkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

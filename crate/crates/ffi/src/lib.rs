// SPDX-License-Identifier: Apache-2.0

//! C ABI over the `chirocool` solvers.
//!
//! Configurations and steady-state results are opaque handles created and
//! released through this interface. Every entry point returns a [`CcStatus`];
//! on failure a description is available from [`cc_last_error_message`] on
//! the same thread. Panics are caught at the boundary and reported as
//! [`CcStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chirocool::analytic::{minima, single_ion_nst, target_nst};
use chirocool::cli::{parse_config_file, resolve_config};
use chirocool::model::{validate_config, ChainConfig};
use chirocool::reduced::solve_reduced;
use chirocool::steady_state::{solve_config, SteadyObservables, SteadyOptions};
use chirocool::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed or physically invalid configuration.
    InvalidConfig = 3,
    /// Argument out of range (ion index, rate, ...).
    InvalidArgument = 4,
    /// A solver failed; see the error message.
    SolverError = 5,
    /// The requested quantity is undefined for this input.
    Undefined = 6,
    Panic = 7,
}

/// Opaque chain configuration.
pub struct CcConfig(ChainConfig);

/// Opaque steady-state result.
pub struct CcSteady(SteadyObservables);

/// Closed-form minima; unavailable values are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CcMinima {
    pub n1_min: f64,
    pub gamma_r_min_low: f64,
    pub gamma_r_min_high: f64,
    pub beta0: f64,
    /// 1 when the minimum is reachable at this β, else 0.
    pub feasible: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CcStatus {
    match e {
        Error::InvalidConfig(_) | Error::InvalidTruncation(_) => CcStatus::InvalidConfig,
        Error::SiteOutOfRange { .. } | Error::DimensionMismatch { .. } => CcStatus::InvalidArgument,
        Error::UndefinedNormalization { .. } | Error::OutOfValidity(_) => CcStatus::Undefined,
        _ => CcStatus::SolverError,
    }
}

fn fail(status: CcStatus, msg: &str) -> CcStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> CcStatus) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(CcStatus::Panic, &format!("internal panic: {msg}"))
        }
    }
}

fn from_result(r: chirocool::Result<f64>, out: *mut f64) -> CcStatus {
    match r {
        Ok(v) => {
            // SAFETY: callers check `out` for null before calling.
            unsafe { *out = v };
            CcStatus::Ok
        }
        Err(e) => fail(status_of(&e), &e.to_string()),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses and validates a JSON configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_config_from_json(json: *const c_char, out: *mut *mut CcConfig) -> CcStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(CcStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(CcStatus::InvalidUtf8, "configuration is not valid UTF-8");
        };
        let cfg = match parse_config_file(text).and_then(resolve_config) {
            Ok(c) => c,
            Err(m) => return fail(CcStatus::InvalidConfig, &m),
        };
        if let Err(e) = cfg.validated() {
            return fail(CcStatus::InvalidConfig, &e.to_string());
        }
        *out = Box::into_raw(Box::new(CcConfig(cfg)));
        CcStatus::Ok
    })
}

/// Releases a configuration; null is ignored.
///
/// # Safety
/// `cfg` must come from [`cc_config_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cc_config_free(cfg: *mut CcConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Counts validation errors and warnings of a configuration.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_config_validate(cfg: *const CcConfig, n_errors: *mut usize, n_warnings: *mut usize) -> CcStatus {
    guard(|| {
        if cfg.is_null() || n_errors.is_null() || n_warnings.is_null() {
            return fail(CcStatus::NullPointer, "null argument");
        }
        let report = validate_config(&(*cfg).0);
        *n_errors = report.errors.len();
        *n_warnings = report.warnings.len();
        CcStatus::Ok
    })
}

/// Number of ions in a configuration, 0 for null.
///
/// # Safety
/// `cfg` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn cc_config_n_ions(cfg: *const CcConfig) -> usize {
    if cfg.is_null() {
        0
    } else {
        (*cfg).0.n_ions
    }
}

/// Solves for the steady state of the full master equation.
///
/// # Safety
/// `cfg` must be valid and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_steady_solve(cfg: *const CcConfig, out: *mut *mut CcSteady) -> CcStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return fail(CcStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        match solve_config(&(*cfg).0, &SteadyOptions::default()) {
            Ok((_, obs)) => {
                *out = Box::into_raw(Box::new(CcSteady(obs)));
                CcStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Releases a steady-state result; null is ignored.
///
/// # Safety
/// `s` must come from [`cc_steady_solve`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cc_steady_free(s: *mut CcSteady) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

unsafe fn steady_ion(s: *const CcSteady, ion: usize, out: *mut f64, pick: impl Fn(&SteadyObservables, usize) -> Option<Option<f64>>) -> CcStatus {
    guard(|| {
        if s.is_null() || out.is_null() {
            return fail(CcStatus::NullPointer, "null argument");
        }
        let obs = &(*s).0;
        if ion == 0 || ion > obs.n.len() {
            return fail(CcStatus::InvalidArgument, &format!("ion {ion} out of range 1..={}", obs.n.len()));
        }
        match pick(obs, ion - 1) {
            Some(Some(v)) => {
                *out = v;
                CcStatus::Ok
            }
            _ => fail(CcStatus::Undefined, &format!("quantity undefined for ion {ion}")),
        }
    })
}

/// ⟨a†a⟩ of ion `ion` (1-based).
///
/// # Safety
/// `s` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_steady_occupation(s: *const CcSteady, ion: usize, out: *mut f64) -> CcStatus {
    steady_ion(s, ion, out, |o, i| Some(Some(o.n[i])))
}

/// Occupation normalized by the isolated single ion; `Undefined` when Ω_ion = 0.
///
/// # Safety
/// `s` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_steady_ntilde(s: *const CcSteady, ion: usize, out: *mut f64) -> CcStatus {
    steady_ion(s, ion, out, |o, i| o.ntilde.get(i).copied())
}

/// Excited-state population of ion `ion` (1-based).
///
/// # Safety
/// `s` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_steady_excited(s: *const CcSteady, ion: usize, out: *mut f64) -> CcStatus {
    steady_ion(s, ion, out, |o, i| Some(Some(o.excited[i])))
}

/// Spin correlation C_st of ions 1 and 2; `Undefined` for a single ion.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_steady_correlation(s: *const CcSteady, re: *mut f64, im: *mut f64) -> CcStatus {
    guard(|| {
        if s.is_null() || re.is_null() || im.is_null() {
            return fail(CcStatus::NullPointer, "null argument");
        }
        match (*s).0.c_st {
            Some(c) => {
                *re = c.re;
                *im = c.im;
                CcStatus::Ok
            }
            None => fail(CcStatus::Undefined, "correlation needs at least two ions"),
        }
    })
}

/// Frobenius norm of `L[ρ]` at the returned steady state.
///
/// # Safety
/// `s` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_steady_residual(s: *const CcSteady, out: *mut f64) -> CcStatus {
    guard(|| {
        if s.is_null() || out.is_null() {
            return fail(CcStatus::NullPointer, "null argument");
        }
        *out = (*s).0.residual;
        CcStatus::Ok
    })
}

/// Single-ion sideband-cooling limit `(Γ/4)² + (ηΩ)²/8`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_analytic_single_ion(gamma_total: f64, eta: f64, omega: f64, out: *mut f64) -> CcStatus {
    guard(|| {
        if out.is_null() {
            return fail(CcStatus::NullPointer, "null argument");
        }
        *out = single_ion_nst(gamma_total, eta, omega);
        CcStatus::Ok
    })
}

/// Closed-form steady occupation of the target ion of a two-ion chain.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_analytic_target(gamma_r: f64, gamma_l: f64, gamma_ng: f64, eta: f64, omega: f64, out: *mut f64) -> CcStatus {
    guard(|| {
        if out.is_null() {
            return fail(CcStatus::NullPointer, "null argument");
        }
        from_result(target_nst(gamma_r, gamma_l, gamma_ng, eta, omega), out)
    })
}

/// Minimum occupation, its location and the threshold β₀.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_analytic_minima(eta: f64, omega: f64, total: f64, beta: f64, out: *mut CcMinima) -> CcStatus {
    guard(|| {
        if out.is_null() {
            return fail(CcStatus::NullPointer, "null argument");
        }
        let m = minima(eta, omega, total, beta);
        let [lo, hi] = m.gamma_r_min.unwrap_or([f64::NAN; 2]);
        *out = CcMinima {
            n1_min: m.n1_min.unwrap_or(f64::NAN),
            gamma_r_min_low: lo,
            gamma_r_min_high: hi,
            beta0: m.beta0.unwrap_or(f64::NAN),
            feasible: i32::from(m.feasible),
        };
        CcStatus::Ok
    })
}

/// Reduced N-ion solve for the target ion; writes ⟨n₁⟩ and ñ₁.
///
/// # Safety
/// `n1` and `ntilde1` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_reduced_solve(
    n_ions: usize,
    gamma_r: f64,
    gamma_l: f64,
    gamma_ng: f64,
    eta: f64,
    omega: f64,
    n1: *mut f64,
    ntilde1: *mut f64,
) -> CcStatus {
    guard(|| {
        if n1.is_null() || ntilde1.is_null() {
            return fail(CcStatus::NullPointer, "null argument");
        }
        match solve_reduced(n_ions, gamma_r, gamma_l, gamma_ng, eta, omega) {
            Ok(s) => {
                *n1 = s.n1;
                *ntilde1 = s.ntilde1;
                CcStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

//! C ABI over the genairy toolkit: opaque potential handles, plain-data
//! result structs, and integer status codes. Every function is
//! panic-safe; null pointers are reported, never dereferenced.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use genairy::potential::Potential;
use genairy::resolvent::{estimate, PowerIterationConfig, ResolventError};
use genairy::semigroup::semigroup_norm;
use genairy::spectral::{profile, SpectralError};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenairyStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BelowLambdaZero = 3,
    OverflowGuard = 4,
    NoConvergence = 5,
    Unsupported = 6,
    Internal = 7,
}

/// Opaque handle to an immutable potential; free with
/// `genairy_potential_free`.
pub struct GenairyPotential {
    inner: Potential,
}

/// Lambda-dependent scalars of the spectral analysis.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GenairyProfileData {
    pub lambda: f64,
    pub x_lambda: f64,
    pub f_at_xlambda: f64,
    pub wprime_at_xlambda: f64,
    pub x_lambda_0: f64,
    pub delta_lambda: f64,
    pub upsilon1: f64,
    pub rho: f64,
}

/// The four log-domain resolvent-norm estimates. `has_numeric` is 0 when
/// the overflow guard suppressed the discretized estimate (then
/// `log_numeric` is NaN).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GenairyResolventData {
    pub lambda: f64,
    pub log_asymptotic: f64,
    pub log_schur_upper: f64,
    pub log_witness_lower: f64,
    pub log_numeric: f64,
    pub has_numeric: i32,
}

fn spectral_status(e: &SpectralError) -> GenairyStatus {
    match e {
        SpectralError::BelowLambdaZero { .. } => GenairyStatus::BelowLambdaZero,
        _ => GenairyStatus::Internal,
    }
}

fn resolvent_status(e: &ResolventError) -> GenairyStatus {
    match e {
        ResolventError::OverflowGuard { .. } => GenairyStatus::OverflowGuard,
        ResolventError::PowerIteration { .. } => GenairyStatus::NoConvergence,
        ResolventError::UnsupportedFamily => GenairyStatus::Unsupported,
        ResolventError::Spectral(s) => spectral_status(s),
        ResolventError::Numerics(_) => GenairyStatus::Internal,
    }
}

fn guarded(body: impl FnOnce() -> GenairyStatus) -> GenairyStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or(GenairyStatus::Internal)
}

/// Parse a potential spec string (`pow:2`, `logpow:1.5`, `exppow:1`) into
/// a new handle written to `out`.
///
/// # Safety
/// `spec` must point to a NUL-terminated string and `out` to a writable
/// pointer slot; nulls are reported, never dereferenced.
#[no_mangle]
pub unsafe extern "C" fn genairy_potential_parse(
    spec: *const c_char,
    out: *mut *mut GenairyPotential,
) -> GenairyStatus {
    if spec.is_null() || out.is_null() {
        return GenairyStatus::NullPointer;
    }
    guarded(|| {
        let text = match unsafe { CStr::from_ptr(spec) }.to_str() {
            Ok(t) => t,
            Err(_) => return GenairyStatus::InvalidArgument,
        };
        match text.parse::<Potential>() {
            Ok(inner) => {
                unsafe {
                    *out = Box::into_raw(Box::new(GenairyPotential { inner }));
                }
                GenairyStatus::Ok
            }
            Err(_) => {
                unsafe {
                    *out = ptr::null_mut();
                }
                GenairyStatus::InvalidArgument
            }
        }
    })
}

/// Release a handle produced by `genairy_potential_parse`. Null is a no-op.
///
/// # Safety
/// `pot` must be null or a handle from `genairy_potential_parse` that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn genairy_potential_free(pot: *mut GenairyPotential) {
    if !pot.is_null() {
        drop(unsafe { Box::from_raw(pot) });
    }
}

/// Evaluate (W, W', W'') at x.
///
/// # Safety
/// `pot` must be a live handle; the three output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn genairy_potential_eval(
    pot: *const GenairyPotential,
    x: f64,
    w: *mut f64,
    w_prime: *mut f64,
    w_second: *mut f64,
) -> GenairyStatus {
    if pot.is_null() || w.is_null() || w_prime.is_null() || w_second.is_null() {
        return GenairyStatus::NullPointer;
    }
    guarded(|| {
        let (w0, w1, w2) = unsafe { &*pot }.inner.eval(x);
        unsafe {
            *w = w0;
            *w_prime = w1;
            *w_second = w2;
        }
        GenairyStatus::Ok
    })
}

/// Turning point, action integral and window data at `lambda`.
///
/// # Safety
/// `pot` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn genairy_profile(
    pot: *const GenairyPotential,
    lambda: f64,
    out: *mut GenairyProfileData,
) -> GenairyStatus {
    if pot.is_null() || out.is_null() {
        return GenairyStatus::NullPointer;
    }
    guarded(|| match profile(&unsafe { &*pot }.inner, lambda) {
        Ok(p) => {
            unsafe {
                *out = GenairyProfileData {
                    lambda: p.lambda,
                    x_lambda: p.x_lambda,
                    f_at_xlambda: p.f_at_xlambda,
                    wprime_at_xlambda: p.wprime_at_xlambda,
                    x_lambda_0: p.x_lambda_0,
                    delta_lambda: p.delta_lambda,
                    upsilon1: p.upsilon1,
                    rho: p.rho,
                };
            }
            GenairyStatus::Ok
        }
        Err(e) => spectral_status(&e),
    })
}

/// All four log-domain estimates of the resolvent norm at `lambda`.
/// Pass 0 for `points_per_rho` or `schur_grid_n` to take the defaults
/// (20 and 2000).
///
/// # Safety
/// `pot` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn genairy_resolvent_estimate(
    pot: *const GenairyPotential,
    lambda: f64,
    points_per_rho: u32,
    schur_grid_n: u32,
    seed: u64,
    out: *mut GenairyResolventData,
) -> GenairyStatus {
    if pot.is_null() || out.is_null() {
        return GenairyStatus::NullPointer;
    }
    guarded(|| {
        let ppr = if points_per_rho == 0 { 20 } else { points_per_rho as usize };
        let grid_n = if schur_grid_n == 0 { 2000 } else { schur_grid_n as usize };
        let cfg = PowerIterationConfig {
            seed,
            ..PowerIterationConfig::default()
        };
        match estimate(&unsafe { &*pot }.inner, lambda, ppr, grid_n, &cfg) {
            Ok(est) => {
                unsafe {
                    *out = GenairyResolventData {
                        lambda: est.lambda,
                        log_asymptotic: est.log_asymptotic,
                        log_schur_upper: est.log_schur_upper,
                        log_witness_lower: est.log_witness_lower,
                        log_numeric: est.log_numeric.unwrap_or(f64::NAN),
                        has_numeric: est.log_numeric.is_some() as i32,
                    };
                }
                GenairyStatus::Ok
            }
            Err(e) => resolvent_status(&e),
        }
    })
}

/// log of the closed-form resolvent norm of a built-in family.
///
/// # Safety
/// `pot` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn genairy_closed_form_log_norm(
    pot: *const GenairyPotential,
    lambda: f64,
    out: *mut f64,
) -> GenairyStatus {
    if pot.is_null() || out.is_null() {
        return GenairyStatus::NullPointer;
    }
    guarded(
        || match genairy::resolvent::closed_form_norm(&unsafe { &*pot }.inner, lambda) {
            Ok(v) => {
                unsafe { *out = v };
                GenairyStatus::Ok
            }
            Err(e) => resolvent_status(&e),
        },
    )
}

/// log ||S_t|| of the contraction semigroup.
///
/// # Safety
/// `pot` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn genairy_semigroup_log_norm(
    pot: *const GenairyPotential,
    t: f64,
    out: *mut f64,
) -> GenairyStatus {
    if pot.is_null() || out.is_null() {
        return GenairyStatus::NullPointer;
    }
    guarded(|| match semigroup_norm(&unsafe { &*pot }.inner, t) {
        Ok(v) => {
            unsafe { *out = v };
            GenairyStatus::Ok
        }
        Err(_) => GenairyStatus::InvalidArgument,
    })
}

/// Static description string for a status code.
#[no_mangle]
pub extern "C" fn genairy_status_message(status: GenairyStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        GenairyStatus::Ok => b"ok\0",
        GenairyStatus::NullPointer => b"null pointer argument\0",
        GenairyStatus::InvalidArgument => b"invalid argument\0",
        GenairyStatus::BelowLambdaZero => b"lambda below the family threshold\0",
        GenairyStatus::OverflowGuard => b"discretization overflow guard tripped\0",
        GenairyStatus::NoConvergence => b"iteration did not converge\0",
        GenairyStatus::Unsupported => b"unsupported for this potential family\0",
        GenairyStatus::Internal => b"internal error\0",
    };
    msg.as_ptr() as *const c_char
}

//! C ABI over `specgap`.
//!
//! Every function returns an [`SgStatus`]; results travel through out
//! pointers. Heap objects are opaque handles owned by the caller and released
//! with the matching `*_free`. On failure a message is kept per thread and
//! can be read with [`sg_last_error_message`]. Panics never cross the
//! boundary; they surface as `SG_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use specgap::bands::{discriminant, CellPotential};
use specgap::calculus::s_eval;
use specgap::lifting::{c_uc, davis_kahan_check, kappa, verify_bottom_lifting, LiftingCertificate, Status};
use specgap::linalg::{eigendecompose, SpectralDecomposition, SymmetricMatrix};
use specgap::scenario::{run_scenario, RunOptions, Scenario};
use specgap::schrodinger::PotentialStats;
use specgap::Error;

/// Result codes. Zero is success, everything else an error.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    PreconditionFailed = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

/// Symmetric matrix handle.
pub struct SgMatrix(SymmetricMatrix);

/// Eigendecomposition handle.
pub struct SgSpectrum(SpectralDecomposition);

/// Lifting certificate handle.
pub struct SgCertificate(LiftingCertificate);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SgStatus {
    match e {
        Error::InvalidParameter { .. }
        | Error::DimensionMismatch { .. }
        | Error::Config(_)
        | Error::GridMismatch(_)
        | Error::CoarseResolution(_) => SgStatus::InvalidArgument,
        Error::Precondition(_) | Error::GammaOnSpectrum { .. } | Error::OutsideWindow { .. } => {
            SgStatus::PreconditionFailed
        }
        Error::NonConvergence { .. } => SgStatus::Numerical,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => SgStatus::Io,
    }
}

/// Runs `f`, records any error or panic and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), (SgStatus, String)>) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SgStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            SgStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (SgStatus, String)>;
}

impl<T> IntoFfi<T> for specgap::Result<T> {
    fn ffi(self) -> Result<T, (SgStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (SgStatus, String) {
    (SgStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> (SgStatus, String) {
    (SgStatus::InvalidArgument, msg.into())
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (SgStatus, String)> {
    // SAFETY: caller guarantees `p` is null or valid for writes
    unsafe { p.as_mut() }.ok_or_else(|| null(name))
}

unsafe fn input<'a, T>(p: *const T, name: &str) -> Result<&'a T, (SgStatus, String)> {
    // SAFETY: caller guarantees `p` is null or points at a live object
    unsafe { p.as_ref() }.ok_or_else(|| null(name))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], (SgStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    // SAFETY: caller guarantees `len` readable doubles at `p`
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, (SgStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    // SAFETY: caller guarantees a NUL-terminated string
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| invalid(format!("`{name}` is not UTF-8")))
}

fn stats(v_min: f64, v_max: f64) -> Result<PotentialStats, (SgStatus, String)> {
    if !(v_min <= v_max) {
        return Err(invalid(format!("v_min {v_min} exceeds v_max {v_max}")));
    }
    Ok(PotentialStats { min: v_min, max: v_max, sup: v_min.abs().max(v_max.abs()) })
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a matrix from `n*n` row-major doubles. The input must be symmetric
/// up to `1e-12` relative to its largest entry.
///
/// # Safety
/// `data` must hold `n*n` readable doubles and `out_matrix` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_matrix_new(n: usize, data: *const f64, out_matrix: *mut *mut SgMatrix) -> SgStatus {
    guard(|| {
        let dst = unsafe { out(out_matrix, "out_matrix")? };
        let len = n.checked_mul(n).ok_or_else(|| invalid("n*n overflows"))?;
        let vals = unsafe { slice(data, len, "data")? };
        let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..i {
                if (vals[i * n + j] - vals[j * n + i]).abs() > 1e-12 * scale {
                    return Err(invalid(format!("entry ({i},{j}) breaks symmetry")));
                }
            }
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        let m = SymmetricMatrix::from_fn(n, n.saturating_sub(1), |i, j| 0.5 * (vals[i * n + j] + vals[j * n + i]));
        *dst = Box::into_raw(Box::new(SgMatrix(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must come from `sg_matrix_new` and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sg_matrix_free(m: *mut SgMatrix) {
    if !m.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { Box::from_raw(m) });
    }
}

/// # Safety
/// `m` must be a live matrix handle and `out_n` writable.
#[no_mangle]
pub unsafe extern "C" fn sg_matrix_dim(m: *const SgMatrix, out_n: *mut usize) -> SgStatus {
    guard(|| {
        let m = unsafe { input(m, "m")? };
        *unsafe { out(out_n, "out_n")? } = m.0.n();
        Ok(())
    })
}

/// # Safety
/// `m` must be a live matrix handle and `out_spectrum` writable.
#[no_mangle]
pub unsafe extern "C" fn sg_eigendecompose(m: *const SgMatrix, out_spectrum: *mut *mut SgSpectrum) -> SgStatus {
    guard(|| {
        let m = unsafe { input(m, "m")? };
        let dst = unsafe { out(out_spectrum, "out_spectrum")? };
        let dec = eigendecompose(&m.0).ffi()?;
        *dst = Box::into_raw(Box::new(SgSpectrum(dec)));
        Ok(())
    })
}

/// Copies the eigenvalues in non-decreasing order. `len` must equal the
/// matrix dimension.
///
/// # Safety
/// `s` must be a live spectrum handle and `values` hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sg_spectrum_eigenvalues(s: *const SgSpectrum, values: *mut f64, len: usize) -> SgStatus {
    guard(|| {
        let s = unsafe { input(s, "s")? };
        let ev = s.0.eigenvalues();
        if len != ev.len() {
            return Err(invalid(format!("buffer holds {len} values, spectrum has {}", ev.len())));
        }
        if len > 0 {
            if values.is_null() {
                return Err(null("values"));
            }
            // SAFETY: caller guarantees `len` writable doubles
            unsafe { std::slice::from_raw_parts_mut(values, len) }.copy_from_slice(ev);
        }
        Ok(())
    })
}

/// # Safety
/// `s` must come from `sg_eigendecompose`. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sg_spectrum_free(s: *mut SgSpectrum) {
    if !s.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Unique continuation constant `C_uc` and its minimizing `λ*`.
///
/// # Safety
/// Both out pointers must be writable; `out_lambda_star` may be null.
#[no_mangle]
pub unsafe extern "C" fn sg_c_uc(
    dim: usize,
    g: f64,
    delta: f64,
    v_min: f64,
    v_max: f64,
    energy: f64,
    n_dim: f64,
    out_value: *mut f64,
    out_lambda_star: *mut f64,
) -> SgStatus {
    guard(|| {
        let dst = unsafe { out(out_value, "out_value")? };
        let c = c_uc(dim, g, delta, &stats(v_min, v_max)?, energy, n_dim).ffi()?;
        *dst = c.value;
        if let Some(l) = unsafe { out_lambda_star.as_mut() } {
            *l = c.lambda_star;
        }
        Ok(())
    })
}

/// Lifting constant `κ = ϑ·C_uc(‖V‖, ‖W‖, s)`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_kappa(
    dim: usize,
    g: f64,
    delta: f64,
    theta: f64,
    v_min: f64,
    v_max: f64,
    w_sup: f64,
    s: f64,
    n_dim: f64,
    out_value: *mut f64,
) -> SgStatus {
    guard(|| {
        let dst = unsafe { out(out_value, "out_value")? };
        *dst = kappa(dim, g, delta, theta, &stats(v_min, v_max)?, w_sup, s, n_dim).ffi()?;
        Ok(())
    })
}

/// Ghost-dimension profile `s_t(λ)`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_s_eval(t: f64, lambda: f64, out_value: *mut f64) -> SgStatus {
    guard(|| {
        let dst = unsafe { out(out_value, "out_value")? };
        if !(t.is_finite() && lambda.is_finite()) {
            return Err(invalid("t and lambda must be finite"));
        }
        *dst = s_eval(t, lambda);
        Ok(())
    })
}

/// Hill discriminant of `−u'' + Vu = Eu` for `V` sampled at `n` equispaced
/// nodes of one period.
///
/// # Safety
/// `values` must hold `n` readable doubles and `out_value` be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_hill_discriminant(
    values: *const f64,
    n: usize,
    period: f64,
    energy: f64,
    out_value: *mut f64,
) -> SgStatus {
    guard(|| {
        let dst = unsafe { out(out_value, "out_value")? };
        let v = CellPotential::new(period, unsafe { slice(values, n, "values")? }.to_vec()).ffi()?;
        *dst = discriminant(&v, energy).ffi()?;
        Ok(())
    })
}

/// Measured projector distance and the sin 2Θ bound for `A` and `A+B` at `γ`.
///
/// # Safety
/// Handles must be live and both out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn sg_davis_kahan(
    a: *const SgMatrix,
    b: *const SgMatrix,
    gamma: f64,
    out_measured: *mut f64,
    out_bound: *mut f64,
) -> SgStatus {
    guard(|| {
        let (a, b) = unsafe { (input(a, "a")?, input(b, "b")?) };
        let (m, bd) = unsafe { (out(out_measured, "out_measured")?, out(out_bound, "out_bound")?) };
        let rep = davis_kahan_check(&a.0, &b.0, gamma).ffi()?;
        *m = rep.measured;
        *bd = rep.bound;
        Ok(())
    })
}

/// Certificate that every eigenvalue of `H` below `E` rises by at least `κ`
/// under `H + W`. A certificate is produced even when its preconditions fail;
/// inspect it with `sg_certificate_status`.
///
/// # Safety
/// Handles must be live and `out_cert` writable.
#[no_mangle]
pub unsafe extern "C" fn sg_verify_bottom_lifting(
    h: *const SgMatrix,
    w: *const SgMatrix,
    energy: f64,
    kappa: f64,
    out_cert: *mut *mut SgCertificate,
) -> SgStatus {
    guard(|| {
        let (h, w) = unsafe { (input(h, "h")?, input(w, "w")?) };
        let dst = unsafe { out(out_cert, "out_cert")? };
        let cert = verify_bottom_lifting(&h.0, &w.0, energy, kappa).ffi()?;
        *dst = Box::into_raw(Box::new(SgCertificate(cert)));
        Ok(())
    })
}

/// `0` pass, `1` fail, `2` precondition failed.
///
/// # Safety
/// `c` must be a live certificate and `out_status` writable.
#[no_mangle]
pub unsafe extern "C" fn sg_certificate_status(c: *const SgCertificate, out_status: *mut i32) -> SgStatus {
    guard(|| {
        let c = unsafe { input(c, "c")? };
        *unsafe { out(out_status, "out_status")? } = match c.0.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::PreconditionFailed => 2,
        };
        Ok(())
    })
}

/// Smallest margin over the certified indices (NaN if no claim was made).
///
/// # Safety
/// `c` must be a live certificate and `out_margin` writable.
#[no_mangle]
pub unsafe extern "C" fn sg_certificate_margin(c: *const SgCertificate, out_margin: *mut f64) -> SgStatus {
    guard(|| {
        let c = unsafe { input(c, "c")? };
        *unsafe { out(out_margin, "out_margin")? } = c.0.margin;
        Ok(())
    })
}

/// JSON rendering of the certificate; release it with `sg_string_free`.
///
/// # Safety
/// `c` must be a live certificate and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn sg_certificate_json(c: *const SgCertificate, out_json: *mut *mut c_char) -> SgStatus {
    guard(|| {
        let c = unsafe { input(c, "c")? };
        let dst = unsafe { out(out_json, "out_json")? };
        let s = c.0.to_json().ffi()?;
        *dst = CString::new(s).map_err(|e| invalid(e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `c` must come from `sg_verify_bottom_lifting`. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sg_certificate_free(c: *mut SgCertificate) {
    if !c.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { Box::from_raw(c) });
    }
}

/// # Safety
/// `s` must come from this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sg_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Runs a scenario file and writes its artifacts to `out_dir`. The
/// scenario's own exit code (0, 1 or 2) lands in `out_exit_code`.
///
/// # Safety
/// Both strings must be NUL-terminated and `out_exit_code` writable.
#[no_mangle]
pub unsafe extern "C" fn sg_run_scenario(
    config_path: *const c_char,
    out_dir: *const c_char,
    out_exit_code: *mut i32,
) -> SgStatus {
    guard(|| {
        let path = unsafe { c_str(config_path, "config_path")? };
        let dir = unsafe { c_str(out_dir, "out_dir")? };
        let code = unsafe { out(out_exit_code, "out_exit_code")? };
        let sc = Scenario::load(Path::new(path)).ffi()?;
        *code = run_scenario(&sc, Path::new(dir), RunOptions::default()).ffi()?.exit_code();
        Ok(())
    })
}

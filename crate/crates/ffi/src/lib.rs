//! C ABI for the rmt-lab library.
//!
//! Fallible functions return an [`RmtStatus`]; on failure a message can be
//! fetched with [`rmt_last_error_message`]. Objects are opaque handles that
//! must be released with their `_free` function. Output arrays are caller
//! allocated.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rmt_lab::counting::{counting_mean, counting_variance, KernelModel};
use rmt_lab::ensembles::{sample_spectrum, EnsembleKind, EnsembleSpec};
use rmt_lab::laws::{gamma_table, sc_cdf, sc_density, sc_quantile};
use rmt_lab::transport::{kolmogorov_to_semicircle, w1_to_semicircle, w2_squared_to_semicircle, EmpiricalMeasure};
use rmt_lab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmtStatus {
    Ok = 0,
    InvalidArgument = 1,
    InvalidSpec = 2,
    NotSymmetric = 3,
    NoConvergence = 4,
    DimensionOverflow = 5,
    NumericGuard = 6,
    SizeMismatch = 7,
    NullPointer = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmtEnsembleKind {
    Gue = 0,
    Goe = 1,
    WignerComplexMatched = 2,
    WignerRealMatched = 3,
    Lue = 4,
    Loe = 5,
    CovarianceMatched = 6,
}

impl From<RmtEnsembleKind> for EnsembleKind {
    fn from(k: RmtEnsembleKind) -> Self {
        match k {
            RmtEnsembleKind::Gue => EnsembleKind::Gue,
            RmtEnsembleKind::Goe => EnsembleKind::Goe,
            RmtEnsembleKind::WignerComplexMatched => EnsembleKind::WignerComplexMatched,
            RmtEnsembleKind::WignerRealMatched => EnsembleKind::WignerRealMatched,
            RmtEnsembleKind::Lue => EnsembleKind::Lue,
            RmtEnsembleKind::Loe => EnsembleKind::Loe,
            RmtEnsembleKind::CovarianceMatched => EnsembleKind::CovarianceMatched,
        }
    }
}

/// Opaque ensemble specification.
pub struct RmtEnsemble {
    spec: EnsembleSpec,
}

/// Opaque GUE counting-kernel model.
pub struct RmtKernelModel {
    model: KernelModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut buf = e.borrow_mut();
        buf.clear();
        buf.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn status_of(err: &Error) -> RmtStatus {
    match err {
        Error::InvalidArgument(_) => RmtStatus::InvalidArgument,
        Error::InvalidSpec(_) => RmtStatus::InvalidSpec,
        Error::NotSymmetric { .. } => RmtStatus::NotSymmetric,
        Error::NoConvergence { .. } => RmtStatus::NoConvergence,
        Error::DimensionOverflow(_) => RmtStatus::DimensionOverflow,
        Error::NumericGuard(_) => RmtStatus::NumericGuard,
        Error::SizeMismatch { .. } => RmtStatus::SizeMismatch,
    }
}

enum Failure {
    Lib(Error),
    Status(RmtStatus, &'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RmtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RmtStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            RmtStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure::Status(RmtStatus::NullPointer, "null pointer argument")
}

unsafe fn out_slice<'a>(out: *mut f64, len: usize, needed: usize) -> Result<&'a mut [f64], Failure> {
    if out.is_null() {
        return Err(null());
    }
    if len < needed {
        return Err(Failure::Status(RmtStatus::BufferTooSmall, "output buffer too small"));
    }
    Ok(std::slice::from_raw_parts_mut(out, needed))
}

unsafe fn measure(support: *const f64, len: usize) -> Result<EmpiricalMeasure, Failure> {
    if support.is_null() {
        return Err(null());
    }
    Ok(EmpiricalMeasure::new(std::slice::from_raw_parts(support, len).to_vec())?)
}

/// Length in bytes of the last error message on this thread, excluding the
/// terminating NUL.
#[no_mangle]
pub extern "C" fn rmt_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copy the last error message into `buf` (NUL terminated, truncated to
/// `len - 1` bytes). Returns the number of bytes written, excluding the NUL.
#[no_mangle]
pub unsafe extern "C" fn rmt_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let n = msg.len().min(len - 1);
        ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rmt_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

#[no_mangle]
pub extern "C" fn rmt_sc_density(x: f64) -> f64 {
    sc_density(x)
}

#[no_mangle]
pub extern "C" fn rmt_sc_cdf(x: f64) -> f64 {
    sc_cdf(x)
}

#[no_mangle]
pub unsafe extern "C" fn rmt_sc_quantile(p: f64, out: *mut f64) -> RmtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        *out = sc_quantile(p)?;
        Ok(())
    })
}

/// Write the semicircle locations gamma_1..gamma_n into `out[0..n]`.
#[no_mangle]
pub unsafe extern "C" fn rmt_gamma_table(n: usize, out: *mut f64, len: usize) -> RmtStatus {
    guard(|| {
        let table = gamma_table(n)?;
        out_slice(out, len, n)?.copy_from_slice(&table.values);
        Ok(())
    })
}

/// Create an ensemble. `m` is the row count for covariance kinds and is
/// ignored otherwise.
#[no_mangle]
pub unsafe extern "C" fn rmt_ensemble_new(
    kind: RmtEnsembleKind,
    n: usize,
    m: usize,
    out: *mut *mut RmtEnsemble,
) -> RmtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let spec = EnsembleSpec::of_kind(kind.into(), n, m);
        spec.validate()?;
        *out = Box::into_raw(Box::new(RmtEnsemble { spec }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rmt_ensemble_free(handle: *mut RmtEnsemble) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Matrix dimension N of an ensemble, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rmt_ensemble_dim(handle: *const RmtEnsemble) -> usize {
    handle.as_ref().map_or(0, |h| h.spec.n)
}

/// Draw one spectrum (ascending) into `out[0..N]`.
#[no_mangle]
pub unsafe extern "C" fn rmt_sample_spectrum(
    handle: *const RmtEnsemble,
    seed: u64,
    fast: bool,
    out: *mut f64,
    len: usize,
) -> RmtStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(null)?;
        let dst = out_slice(out, len, h.spec.n)?;
        dst.copy_from_slice(&sample_spectrum(&h.spec, seed, fast)?.eigenvalues);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rmt_kernel_model_new(n: usize, out: *mut *mut RmtKernelModel) -> RmtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let model = KernelModel::new(n)?;
        *out = Box::into_raw(Box::new(RmtKernelModel { model }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rmt_kernel_model_free(handle: *mut RmtKernelModel) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// E[N_t] for the GUE counting function.
#[no_mangle]
pub unsafe extern "C" fn rmt_counting_mean(handle: *const RmtKernelModel, t: f64, out: *mut f64) -> RmtStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(null)?;
        let v = counting_mean(&h.model, t)?;
        *out.as_mut().ok_or_else(null)? = v;
        Ok(())
    })
}

/// Var(N_t) for the GUE counting function.
#[no_mangle]
pub unsafe extern "C" fn rmt_counting_variance(handle: *const RmtKernelModel, t: f64, out: *mut f64) -> RmtStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(null)?;
        let v = counting_variance(&h.model, t)?;
        *out.as_mut().ok_or_else(null)? = v;
        Ok(())
    })
}

/// Squared 2-Wasserstein distance from the uniform measure on `support` to
/// the semicircle law.
#[no_mangle]
pub unsafe extern "C" fn rmt_w2_squared_to_semicircle(support: *const f64, len: usize, out: *mut f64) -> RmtStatus {
    guard(|| {
        let v = w2_squared_to_semicircle(&measure(support, len)?)?;
        *out.as_mut().ok_or_else(null)? = v;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rmt_w1_to_semicircle(support: *const f64, len: usize, out: *mut f64) -> RmtStatus {
    guard(|| {
        let v = w1_to_semicircle(&measure(support, len)?)?;
        *out.as_mut().ok_or_else(null)? = v;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rmt_kolmogorov_to_semicircle(support: *const f64, len: usize, out: *mut f64) -> RmtStatus {
    guard(|| {
        let v = kolmogorov_to_semicircle(&measure(support, len)?);
        *out.as_mut().ok_or_else(null)? = v;
        Ok(())
    })
}

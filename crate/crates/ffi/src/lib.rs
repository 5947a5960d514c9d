//! C ABI over the `sis-extinction` core.
//!
//! Objects are opaque handles created by `*_new`/`sis_run_batch` and released
//! with the matching `*_free`. Every fallible call returns a [`SisStatus`];
//! on failure `sis_last_error_message` describes the error for the calling
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sis_extinction::analytic::{
    exact_mean_extinction, linear_extinction_cdf, predict_extinction, RegimeFormula,
};
use sis_extinction::mc::{ks_vs_gumbel, run_batch, ExtinctionSampleSet};
use sis_extinction::model::{InitialCondition, ModelParams};
use sis_extinction::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SisStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Singular = 3,
    CostGuard = 4,
    Censoring = 5,
    Usage = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SisFormula {
    General = 0,
    Intermediate = 1,
    Low = 2,
    High = 3,
}

/// Formulas cross the boundary as plain integers so that an out-of-range
/// value is an error rather than undefined behaviour.
fn formula_from(code: u32) -> Result<RegimeFormula, Failure> {
    Ok(match code {
        c if c == SisFormula::General as u32 => RegimeFormula::General,
        c if c == SisFormula::Intermediate as u32 => RegimeFormula::Intermediate,
        c if c == SisFormula::Low as u32 => RegimeFormula::Low,
        c if c == SisFormula::High as u32 => RegimeFormula::High,
        other => {
            return Err(Failure::Core(Error::Usage(format!(
                "unknown formula code {other}"
            ))))
        }
    })
}

/// Gumbel law of `(mu - lambda) T - centering`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SisPrediction {
    pub centering: f64,
    pub scale: f64,
    pub predicted_mean: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SisGofReport {
    pub ks_distance: f64,
    pub sample_mean: f64,
    pub sample_sd: f64,
    pub predicted_mean: f64,
    pub n: u64,
}

/// Model parameters `(N, lambda, mu)`.
pub struct SisModel {
    params: ModelParams,
}

/// Extinction times from [`sis_run_batch`].
pub struct SisSampleSet {
    set: ExtinctionSampleSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SisStatus {
    match err {
        Error::Domain(_) => SisStatus::Domain,
        Error::SingularParameters(_) => SisStatus::Singular,
        Error::CostGuard { .. } => SisStatus::CostGuard,
        Error::Censoring { .. } => SisStatus::Censoring,
        Error::Usage(_) => SisStatus::Usage,
        Error::Io { .. } | Error::Json(_) => SisStatus::Io,
    }
}

enum Failure {
    Core(Error),
    Null(&'static str),
    Buffer(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SisStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SisStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            let status = status_of(&e);
            set_last_error(e.to_string());
            status
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            SisStatus::NullPointer
        }
        Ok(Err(Failure::Buffer(needed))) => {
            set_last_error(format!("buffer too small; {needed} elements needed"));
            SisStatus::BufferTooSmall
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            SisStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write_out<T>(p: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    p.write(value);
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length
/// including the terminator, or 0 if there is no message.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sis_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sis_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a model handle.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn sis_model_new(
    big_n: u64,
    lambda: f64,
    mu: f64,
    out: *mut *mut SisModel,
) -> SisStatus {
    guard(|| {
        let params = ModelParams::new(big_n, lambda, mu)?;
        let handle = Box::into_raw(Box::new(SisModel { params }));
        write_out(out, handle, "out")
    })
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must come from [`sis_model_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sis_model_free(model: *mut SisModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Gumbel prediction for starting state `x0`; `formula` is a `SisFormula`.
///
/// # Safety
/// `model` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sis_predict(
    model: *const SisModel,
    x0: u64,
    formula: u32,
    out: *mut SisPrediction,
) -> SisStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let ic = InitialCondition::new(x0, &m.params)?;
        let p = predict_extinction(&m.params, ic, formula_from(formula)?)?;
        write_out(
            out,
            SisPrediction {
                centering: p.centering,
                scale: p.scale,
                predicted_mean: p.predicted_mean,
            },
            "out",
        )
    })
}

/// Exact mean extinction time from `x0`.
///
/// # Safety
/// `model` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sis_exact_mean(model: *const SisModel, x0: u64, out: *mut f64) -> SisStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let mean = exact_mean_extinction(&m.params, x0)?;
        write_out(out, mean, "out")
    })
}

/// Extinction CDF at time `t` of the linear chain with the model's rates,
/// started from `x_star`.
///
/// # Safety
/// `model` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sis_linear_extinction_cdf(
    model: *const SisModel,
    x_star: u64,
    t: f64,
    out: *mut f64,
) -> SisStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let v = linear_extinction_cdf(&m.params, x_star, t)?;
        write_out(out, v, "out")
    })
}

/// Simulates `n` extinction times from `x0` (replicate `i` uses stream `i`
/// of `seed`). `threads == 0` uses the default pool; the value never
/// changes results.
///
/// # Safety
/// `model` must be a live handle; `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn sis_run_batch(
    model: *const SisModel,
    x0: u64,
    n: u64,
    seed: u64,
    t_max: f64,
    threads: usize,
    out: *mut *mut SisSampleSet,
) -> SisStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let ic = InitialCondition::new(x0, &m.params)?;
        let threads = (threads > 0).then_some(threads);
        let set = run_batch(&m.params, ic, n, seed, t_max, threads)?;
        write_out(out, Box::into_raw(Box::new(SisSampleSet { set })), "out")
    })
}

/// Number of replicates, censored ones included. Returns 0 for null.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sis_sample_set_len(set: *const SisSampleSet) -> usize {
    set.as_ref().map_or(0, |s| s.set.records.len())
}

/// Number of censored replicates. Returns 0 for null.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sis_sample_set_censored(set: *const SisSampleSet) -> u64 {
    set.as_ref().map_or(0, |s| s.set.censored_count)
}

/// Copies one extinction time per replicate, in stream order, into `buf`;
/// censored replicates are written as NaN. `len` must be at least
/// [`sis_sample_set_len`].
///
/// # Safety
/// `set` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sis_sample_set_copy(
    set: *const SisSampleSet,
    buf: *mut f64,
    len: usize,
) -> SisStatus {
    guard(|| {
        let s = deref(set, "set")?;
        let records = &s.set.records;
        if len < records.len() {
            return Err(Failure::Buffer(records.len()));
        }
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        for (i, r) in records.iter().enumerate() {
            *buf.add(i) = r.extinction_time.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Releases a sample set. Null is ignored.
///
/// # Safety
/// `set` must come from [`sis_run_batch`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sis_sample_set_free(set: *mut SisSampleSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// KS distance of the normalized sample against the standard Gumbel law,
/// normalizing with `formula` (a `SisFormula`). Fails with `SIS_STATUS_CENSORING` when too
/// many replicates were censored.
///
/// # Safety
/// `set` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sis_ks_vs_gumbel(
    set: *const SisSampleSet,
    formula: u32,
    out: *mut SisGofReport,
) -> SisStatus {
    guard(|| {
        let s = deref(set, "set")?;
        let p = &s.set.params;
        let ic = InitialCondition::new(s.set.x0, p)?;
        let pred = predict_extinction(p, ic, formula_from(formula)?)?;
        let r = ks_vs_gumbel(&s.set.normalize(&pred)?)?;
        write_out(
            out,
            SisGofReport {
                ks_distance: r.ks_distance,
                sample_mean: r.sample_mean,
                sample_sd: r.sample_sd,
                predicted_mean: r.predicted_mean,
                n: r.n,
            },
            "out",
        )
    })
}

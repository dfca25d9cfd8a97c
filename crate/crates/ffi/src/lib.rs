//! C interface to `qgrad`.
//!
//! Conventions:
//! - every fallible function returns a [`QgradStatus`] and writes results
//!   through out-pointers, which are left untouched on failure;
//! - objects are opaque handles released with their matching `_free`;
//! - the message of the most recent failure on the calling thread is
//!   available from [`qgrad_last_error_message`];
//! - panics never cross the boundary; they surface as `QGRAD_STATUS_PANIC`.
//!
//! The header `include/qgrad.h` is regenerated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, c_void};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qgrad::bounds::{lower_bound_general, lower_bound_p1};
use qgrad::oracle::CostModel;
use qgrad::qge::{boost_samples, derive_constants, AlgorithmParams, NormOrder, QgePlan, RunOptions};
use qgrad::state::qft_peak_probability;
use qgrad::{CentralDifferenceScheme, Error, ObjectiveFunction, TestFunctionInstance};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QgradStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    ResourceGuard = 3,
    OutsideDomain = 4,
    OracleRange = 5,
    MissingGradient = 6,
    IndexOutOfRange = 7,
    BufferTooSmall = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QgradCostModel {
    ExactSim = 0,
    PaperModel = 1,
}

impl From<QgradCostModel> for CostModel {
    fn from(m: QgradCostModel) -> Self {
        match m {
            QgradCostModel::ExactSim => CostModel::ExactSim,
            QgradCostModel::PaperModel => CostModel::PaperModel,
        }
    }
}

/// Schedule of the estimator for one parameter set.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QgradConstants {
    pub eps_prime: f64,
    pub m: u32,
    pub r: f64,
    pub s: u64,
    pub n: u32,
    pub big_n: u32,
    pub delta: f64,
}

/// Opaque central-difference scheme.
pub struct QgradScheme(CentralDifferenceScheme);

/// Opaque objective function.
pub struct QgradObjective(ObjectiveFunction);

/// Objective callback: `x` points to `dim` doubles.
pub type QgradEvalCallback = extern "C" fn(x: *const f64, dim: usize, user_data: *mut c_void) -> f64;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> QgradStatus {
    match e {
        Error::InvalidParameter(_) => QgradStatus::InvalidArgument,
        Error::ResourceGuard { .. } => QgradStatus::ResourceGuard,
        Error::OutsideDomain(_) => QgradStatus::OutsideDomain,
        Error::OracleRange { .. } => QgradStatus::OracleRange,
        Error::MissingReferenceGradient => QgradStatus::MissingGradient,
        Error::IndexOutOfRange(_) => QgradStatus::IndexOutOfRange,
        Error::Io(_) => QgradStatus::Io,
    }
}

struct Fail(QgradStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(QgradStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any failure message and converts panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QgradStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QgradStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal panic: {msg}"));
            QgradStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `out` must be null or valid for one write.
unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Copies `s` NUL-terminated into `buf`; reports the required size (including
/// the terminator) through `required` when it is non-null.
unsafe fn copy_string(s: &str, buf: *mut c_char, len: usize, required: *mut usize) -> Result<(), Fail> {
    let need = s.len() + 1;
    if !required.is_null() {
        required.write(need);
    }
    if buf.is_null() || len < need {
        return Err(Fail(QgradStatus::BufferTooSmall, format!("buffer holds {len} bytes, {need} needed")));
    }
    std::ptr::copy_nonoverlapping(s.as_ptr() as *const c_char, buf, s.len());
    buf.add(s.len()).write(0);
    Ok(())
}

/// `p` as a C double: any value ≥ 1, or `INFINITY`.
fn norm_order(p: f64) -> Result<NormOrder, Fail> {
    if p == f64::INFINITY {
        Ok(NormOrder::Infinity)
    } else {
        Ok(NormOrder::new(p)?)
    }
}

/// Copies the calling thread's last error message into `buf` (empty after a
/// successful call). Returns the size needed including the terminator; the
/// message is truncated when `len` is smaller.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn qgrad_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            buf.add(n).write(0);
        }
        msg.len() + 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qgrad_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds the order-2m central-difference scheme.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qgrad_scheme_new(m: u32, out: *mut *mut QgradScheme) -> QgradStatus {
    guard(|| {
        let s = CentralDifferenceScheme::new(m as usize)?;
        write(out, Box::into_raw(Box::new(QgradScheme(s))), "out")
    })
}

/// # Safety
/// `scheme` must be null or a handle from [`qgrad_scheme_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qgrad_scheme_free(scheme: *mut QgradScheme) {
    if !scheme.is_null() {
        drop(Box::from_raw(scheme));
    }
}

/// Number of coefficients, 2m+1; 0 for a null handle.
///
/// # Safety
/// `scheme` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qgrad_scheme_len(scheme: *const QgradScheme) -> usize {
    scheme.as_ref().map_or(0, |s| s.0.len())
}

/// Coefficient `a_l` rounded to double.
///
/// # Safety
/// `scheme` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qgrad_scheme_coefficient(scheme: *const QgradScheme, l: i64, out: *mut f64) -> QgradStatus {
    guard(|| {
        let s = scheme.as_ref().ok_or_else(|| null("scheme"))?;
        write(out, s.0.coefficient_f64(l)?, "out")
    })
}

/// Exact coefficient `a_l` as `"num/den"` (or an integer).
///
/// # Safety
/// `scheme` must be a live handle, `buf` null or valid for `len` writes,
/// `required` null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qgrad_scheme_coefficient_string(
    scheme: *const QgradScheme,
    l: i64,
    buf: *mut c_char,
    len: usize,
    required: *mut usize,
) -> QgradStatus {
    guard(|| {
        let s = scheme.as_ref().ok_or_else(|| null("scheme"))?;
        let text = s.0.coefficient(l)?.to_string();
        copy_string(&text, buf, len, required)
    })
}

/// Test-family member with signs `signs[0..d]` (each ±1).
///
/// # Safety
/// `signs` must be valid for `d` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn qgrad_test_function_new(
    d: usize,
    c: f64,
    eps: f64,
    signs: *const i8,
    out: *mut *mut QgradObjective,
) -> QgradStatus {
    guard(|| {
        let b = slice(signs, d, "signs")?.to_vec();
        let f = TestFunctionInstance::new(d, c, eps, b)?.to_objective();
        write(out, Box::into_raw(Box::new(QgradObjective(f))), "out")
    })
}

struct Callback {
    f: QgradEvalCallback,
    data: *mut c_void,
}

// The caller promises the callback and its user data are safe to use from
// several threads at once; evaluation is parallel.
unsafe impl Send for Callback {}
unsafe impl Sync for Callback {}

/// Objective backed by a C callback. `gradient` (may be null) is the reference
/// gradient at the origin, needed by success-rate checks. The callback is
/// invoked concurrently from worker threads and must be thread-safe;
/// `user_data` must outlive the handle.
///
/// # Safety
/// `gradient` must be null or valid for `dim` reads, `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn qgrad_objective_from_callback(
    dim: usize,
    c: f64,
    sigma: f64,
    callback: Option<extern "C" fn(x: *const f64, dim: usize, user_data: *mut c_void) -> f64>,
    user_data: *mut c_void,
    gradient: *const f64,
    out: *mut *mut QgradObjective,
) -> QgradStatus {
    guard(|| {
        let cb = Callback { f: callback.ok_or_else(|| null("callback"))?, data: user_data };
        let mut f = ObjectiveFunction::new(dim, c, sigma, move |x| {
            let cb = &cb;
            (cb.f)(x.as_ptr(), x.len(), cb.data)
        })?
        .with_name("c-callback");
        if !gradient.is_null() {
            f = f.with_reference_gradient(slice(gradient, dim, "gradient")?.to_vec())?;
        }
        write(out, Box::into_raw(Box::new(QgradObjective(f))), "out")
    })
}

/// # Safety
/// `f` must be null or a live objective handle.
#[no_mangle]
pub unsafe extern "C" fn qgrad_objective_free(f: *mut QgradObjective) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live handle, `x` valid for `len` reads, `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn qgrad_objective_evaluate(
    f: *const QgradObjective,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> QgradStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("objective"))?;
        write(out, f.0.evaluate(slice(x, len, "x")?)?, "out")
    })
}

/// Derived constants for `(σ, c, p, d, ε)`; `p = INFINITY` selects the max norm.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qgrad_derive_constants(
    sigma: f64,
    c: f64,
    p: f64,
    d: usize,
    eps: f64,
    out: *mut QgradConstants,
) -> QgradStatus {
    guard(|| {
        let params = AlgorithmParams::new(sigma, c, norm_order(p)?, d, eps);
        let dc = derive_constants(&params)?;
        let k = QgradConstants {
            eps_prime: dc.eps_prime,
            m: dc.m as u32,
            r: dc.r,
            s: dc.s,
            n: dc.n,
            big_n: dc.big_n as u32,
            delta: dc.delta,
        };
        write(out, k, "out")
    })
}

/// One full run. Writes the estimate into `estimate[0..dim]` and the base
/// oracle calls into `base_calls` (may be null).
///
/// # Safety
/// `f` must be a live handle, `estimate` valid for `estimate_len` writes,
/// `base_calls` null or valid for one write.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn qgrad_run_qge(
    f: *const QgradObjective,
    sigma: f64,
    c: f64,
    p: f64,
    eps: f64,
    seed: u64,
    cost_model: QgradCostModel,
    perturb: bool,
    estimate: *mut f64,
    estimate_len: usize,
    base_calls: *mut u64,
) -> QgradStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("objective"))?;
        let d = f.0.dim();
        if estimate.is_null() {
            return Err(null("estimate"));
        }
        if estimate_len < d {
            return Err(Fail(QgradStatus::BufferTooSmall, format!("estimate holds {estimate_len}, need {d}")));
        }
        let params = AlgorithmParams::new(sigma, c, norm_order(p)?, d, eps);
        let options = RunOptions { cost_model: cost_model.into(), perturb, ..Default::default() };
        let run = QgePlan::new(&f.0, &params, options)?.run(seed)?;
        std::ptr::copy_nonoverlapping(run.estimate.as_ptr(), estimate, d);
        if !base_calls.is_null() {
            base_calls.write(run.ledger.base_calls());
        }
        Ok(())
    })
}

/// Probability mass within 4 of the peak after the inverse QFT of a linear phase.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qgrad_qft_peak_probability(n: u32, a: f64, out: *mut f64) -> QgradStatus {
    guard(|| write(out, qft_peak_probability(n, a)?, "out"))
}

/// Lower bound for p = 1; requires `eps < c/146`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qgrad_lower_bound_p1(d: usize, c: f64, eps: f64, out: *mut f64) -> QgradStatus {
    guard(|| write(out, lower_bound_p1(d, c, eps)?, "out"))
}

/// General lower bound at success probability `big_p`. `n_boost` (may be null)
/// receives the repetition count used.
///
/// # Safety
/// `out` must be valid for one write, `n_boost` null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qgrad_lower_bound_general(
    d: usize,
    c: f64,
    eps: f64,
    p: f64,
    big_p: f64,
    out: *mut f64,
    n_boost: *mut u64,
) -> QgradStatus {
    guard(|| {
        let rep = lower_bound_general(d, c, eps, norm_order(p)?, big_p)?;
        write(out, rep.bound_value, "out")?;
        if !n_boost.is_null() {
            n_boost.write(rep.n_boost);
        }
        Ok(())
    })
}

/// Majority search over `count` samples stored row-major (`count × dim`).
/// Writes `dim` values to `out`.
///
/// # Safety
/// `samples` must be valid for `count·dim` reads, `out` for `dim` writes.
#[no_mangle]
pub unsafe extern "C" fn qgrad_boost_samples(
    samples: *const f64,
    count: usize,
    dim: usize,
    eps: f64,
    p: f64,
    out: *mut f64,
) -> QgradStatus {
    guard(|| {
        if count == 0 || dim == 0 {
            return Err(Fail(QgradStatus::InvalidArgument, "need at least one sample of positive dimension".into()));
        }
        let total = count.checked_mul(dim).ok_or_else(|| Fail(QgradStatus::InvalidArgument, "size overflow".into()))?;
        let flat = slice(samples, total, "samples")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rows: Vec<Vec<f64>> = flat.chunks(dim).map(<[f64]>::to_vec).collect();
        let g = boost_samples(&rows, eps, norm_order(p)?);
        std::ptr::copy_nonoverlapping(g.as_ptr(), out, dim);
        Ok(())
    })
}

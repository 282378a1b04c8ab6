//! C ABI over the `schoenloc` estimator.
//!
//! Objects cross the boundary as opaque handles created by the
//! `sl_dataset_from_*`, `sl_transform_parse` and `sl_estimate` functions and
//! released with the matching `*_free`. Every fallible call
//! returns an [`SlStatus`]; on failure a message is kept per thread and can be
//! read with [`sl_last_error`]. Panics never unwind into the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DMatrix;
use schoenloc::data::Dataset;
use schoenloc::estimator::{self, Damping, EstimateOptions, EstimateResult, Init, Regime};
use schoenloc::geometry::{Configuration, SquaredDistanceMatrix, Weights};
use schoenloc::transforms::TransformSpec;
use schoenloc::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SizeMismatch = 3,
    NonEuclidean = 4,
    Parse = 5,
    NotApplicable = 6,
    /// The buffer handed in is shorter than the data to copy.
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlRegime {
    Distributed = 0,
    Concentrated = 1,
    Boundary = 2,
}

/// Solver settings; obtain defaults from [`sl_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlOptions {
    pub tol_alpha: f64,
    pub tol_objective: f64,
    pub max_iter: usize,
    pub max_halvings: u32,
    pub seed: u64,
    /// Non-zero to run the default multi-start set and keep the best minimum.
    pub multi_start: i32,
}

/// Distances, weights and (for point input) coordinates.
pub struct SlDataset(Dataset);

pub struct SlTransform(TransformSpec);

pub struct SlResult(EstimateResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SlStatus {
    match e {
        Error::SizeMismatch { .. } => SlStatus::SizeMismatch,
        Error::NonEuclidean { .. } => SlStatus::NonEuclidean,
        Error::Parse(_) => SlStatus::Parse,
        Error::NotApplicable(_) | Error::UndefinedStrain => SlStatus::NotApplicable,
        _ => SlStatus::InvalidArgument,
    }
}

fn fail(status: SlStatus, msg: impl Into<String>) -> SlStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), SlStatus>>(f: F) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SlStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(SlStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn lib<T>(r: schoenloc::Result<T>) -> Result<T, SlStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

/// # Safety
/// `p` must be null or point to a live `T`.
unsafe fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, SlStatus> {
    p.as_ref().ok_or_else(|| fail(SlStatus::NullPointer, format!("`{name}` is null")))
}

/// # Safety
/// `p` must be null or point to `len` readable doubles.
unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], SlStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(SlStatus::NullPointer, format!("`{name}` is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `w` must be null (uniform weights) or point to `n` doubles.
unsafe fn weights(w: *const f64, n: usize) -> Result<Weights, SlStatus> {
    if w.is_null() {
        if n == 0 {
            return Err(fail(SlStatus::InvalidArgument, "no observations"));
        }
        return Ok(Weights::uniform(n));
    }
    lib(Weights::normalized(slice(w, n, "weights")?.to_vec()))
}

fn store<T>(out: *mut *mut T, value: T) -> Result<(), SlStatus> {
    if out.is_null() {
        return Err(fail(SlStatus::NullPointer, "output handle is null"));
    }
    // SAFETY: `out` is non-null and points to writable storage for a pointer
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), SlStatus> {
    if len < src.len() {
        return Err(fail(
            SlStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    if buf.is_null() {
        return Err(fail(SlStatus::NullPointer, "`buf` is null"));
    }
    // SAFETY: `buf` holds at least `src.len()` doubles
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    Ok(())
}

/// The message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn sl_options_default() -> SlOptions {
    let d = EstimateOptions::default();
    let max_halvings = match d.damping {
        Damping::Halving { max_halvings } => max_halvings,
        Damping::None => 0,
    };
    SlOptions {
        tol_alpha: d.tol_alpha,
        tol_objective: d.tol_objective,
        max_iter: d.max_iter,
        max_halvings,
        seed: d.seed,
        multi_start: 0,
    }
}

/// Builds a dataset from an `n × n` row-major squared distance matrix.
/// `w` may be null for uniform weights; otherwise it is normalised.
///
/// # Safety
/// `d` must point to `n * n` doubles and `w` to `n` doubles (or be null).
#[no_mangle]
pub unsafe extern "C" fn sl_dataset_from_distances(
    d: *const f64,
    n: usize,
    w: *const f64,
    out: *mut *mut SlDataset,
) -> SlStatus {
    guard(|| {
        let len = n.checked_mul(n).ok_or_else(|| fail(SlStatus::InvalidArgument, "n too large"))?;
        let values = slice(d, len, "d")?;
        let w = weights(w, n)?;
        let m = lib(SquaredDistanceMatrix::unlabeled(DMatrix::from_row_slice(n, n, values)))?;
        store(out, SlDataset(lib(Dataset::from_distances(m, w))?))
    })
}

/// Builds a dataset from `n` points in `p` dimensions, row-major.
///
/// # Safety
/// `x` must point to `n * p` doubles and `w` to `n` doubles (or be null).
#[no_mangle]
pub unsafe extern "C" fn sl_dataset_from_points(
    x: *const f64,
    n: usize,
    p: usize,
    w: *const f64,
    out: *mut *mut SlDataset,
) -> SlStatus {
    guard(|| {
        let len = n.checked_mul(p).ok_or_else(|| fail(SlStatus::InvalidArgument, "n * p too large"))?;
        if n == 0 || p == 0 {
            return Err(fail(SlStatus::InvalidArgument, "empty configuration"));
        }
        let values = slice(x, len, "x")?;
        let w = weights(w, n)?;
        let labels = (1..=n).map(|i| i.to_string()).collect();
        let c = lib(Configuration::new(DMatrix::from_row_slice(n, p, values), labels))?;
        store(out, SlDataset(lib(Dataset::from_points(c, w))?))
    })
}

/// Merges tied observations in place (relative threshold `eps_tie`).
///
/// # Safety
/// `ds` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_dataset_aggregate(ds: *mut SlDataset, eps_tie: f64) -> SlStatus {
    guard(|| {
        let ds = ds
            .as_mut()
            .ok_or_else(|| fail(SlStatus::NullPointer, "`ds` is null"))?;
        ds.0 = lib(ds.0.aggregated(eps_tie))?;
        Ok(())
    })
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_dataset_len(ds: *const SlDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_dataset_free(ds: *mut SlDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Parses a transformation such as `power:q=0.7` or `exp:delta=2`.
///
/// # Safety
/// `spec` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sl_transform_parse(spec: *const c_char, out: *mut *mut SlTransform) -> SlStatus {
    guard(|| {
        if spec.is_null() {
            return Err(fail(SlStatus::NullPointer, "`spec` is null"));
        }
        let s = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| fail(SlStatus::Parse, "spec is not UTF-8"))?;
        store(out, SlTransform(lib(s.parse())?))
    })
}

/// Writes `φ(d)` to `out`.
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_transform_phi(t: *const SlTransform, d: f64, out: *mut f64) -> SlStatus {
    guard(|| {
        let t = non_null(t, "t")?;
        let v = lib(t.0.phi(d))?;
        *out.as_mut().ok_or_else(|| fail(SlStatus::NullPointer, "`out` is null"))? = v;
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_transform_free(t: *mut SlTransform) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Estimates the location of `ds` under `t`. `opts` may be null for
/// defaults. A run that stops without converging still returns `SL_STATUS_OK`;
/// query [`sl_result_converged`].
///
/// # Safety
/// `ds` and `t` must be live handles; `opts` null or readable.
#[no_mangle]
pub unsafe extern "C" fn sl_estimate(
    ds: *const SlDataset,
    t: *const SlTransform,
    opts: *const SlOptions,
    out: *mut *mut SlResult,
) -> SlStatus {
    guard(|| {
        let ds = &non_null(ds, "ds")?.0;
        let spec = &non_null(t, "t")?.0;
        let o = opts.as_ref().copied().unwrap_or_else(|| sl_options_default());
        let eo = EstimateOptions {
            init: Init::Weights,
            tol_alpha: o.tol_alpha,
            tol_objective: o.tol_objective,
            max_iter: o.max_iter,
            damping: Damping::Halving {
                max_halvings: o.max_halvings,
            },
            seed: o.seed,
            ..EstimateOptions::default()
        };
        let r = if o.multi_start != 0 {
            let mut minima = lib(estimator::multi_start(&ds.distances, &ds.weights, spec, &eo, None))?;
            minima.swap_remove(0)
        } else {
            lib(estimator::estimate(&ds.distances, &ds.weights, spec, &eo))?
        };
        store(out, SlResult(r))
    })
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_result_free(r: *mut SlResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Transformed inertia at the estimate; NaN for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_result_gamma(r: *const SlResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.gamma)
}

/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_result_entropy(r: *const SlResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.entropy)
}

/// Strain, or NaN when undefined.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_result_strain(r: *const SlResult) -> f64 {
    r.as_ref().and_then(|r| r.0.strain).unwrap_or(f64::NAN)
}

/// 1 when converged, 0 otherwise (including null).
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_result_converged(r: *const SlResult) -> i32 {
    r.as_ref().map_or(0, |r| r.0.converged as i32)
}

/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_result_iterations(r: *const SlResult) -> usize {
    r.as_ref().map_or(0, |r| r.0.iterations)
}

/// Writes the regime and, for a concentrated estimate, the 0-based index of
/// the observation (`SIZE_MAX` otherwise).
///
/// # Safety
/// `r` must be a live handle; `regime` and `index` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_result_regime(r: *const SlResult, regime: *mut SlRegime, index: *mut usize) -> SlStatus {
    guard(|| {
        let r = non_null(r, "r")?;
        let (g, i) = match r.0.regime {
            Regime::Distributed => (SlRegime::Distributed, usize::MAX),
            Regime::Concentrated(i) => (SlRegime::Concentrated, i),
            Regime::Boundary => (SlRegime::Boundary, usize::MAX),
        };
        if regime.is_null() || index.is_null() {
            return Err(fail(SlStatus::NullPointer, "output pointer is null"));
        }
        *regime = g;
        *index = i;
        Ok(())
    })
}

/// Copies the profile `α` into `buf` (capacity `len`).
///
/// # Safety
/// `r` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_result_alpha(r: *const SlResult, buf: *mut f64, len: usize) -> SlStatus {
    guard(|| copy_out(unsafe { non_null(r, "r")? }.0.alpha.as_slice(), buf, len))
}

/// Copies the centroid coordinates (point datasets only) into `buf`.
///
/// # Safety
/// Handles must be live and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_result_centroid(
    ds: *const SlDataset,
    r: *const SlResult,
    buf: *mut f64,
    len: usize,
) -> SlStatus {
    guard(|| {
        let ds = &non_null(ds, "ds")?.0;
        let r = &non_null(r, "r")?.0;
        if r.alpha.len() != ds.len() {
            return Err(fail(SlStatus::SizeMismatch, "result does not belong to this dataset"));
        }
        let c = lib(ds.project(&r.alpha))?;
        copy_out(&c, buf, len)
    })
}

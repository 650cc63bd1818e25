//! C ABI over `kare-core`.
//!
//! Matrices cross the boundary as contiguous row-major `double` arrays.
//! Every function returns a [`KareStatus`]; on failure a message is kept in
//! thread-local storage and can be read with [`kare_last_error_message`].
//! Objects returned through `out` pointers are owned by the caller and
//! released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use kare_core::estimators::RidgeEvaluator;
use kare_core::faer::Mat;
use kare_core::kernels::{gram_matrix, KernelFamily, KernelSpec};
use kare_core::sct::{solve_sct, Spectrum, SpectrumEntry};
use kare_core::{krr, Error, GramEigen, Predictor};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KareStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Domain = 3,
    Numeric = 4,
    Data = 5,
    Config = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KareKernel {
    Rbf = 0,
    Laplacian = 1,
    L1Exp = 2,
}

impl From<KareKernel> for KernelFamily {
    fn from(k: KareKernel) -> Self {
        match k {
            KareKernel::Rbf => KernelFamily::Rbf,
            KareKernel::Laplacian => KernelFamily::Laplacian,
            KareKernel::L1Exp => KernelFamily::L1Exp,
        }
    }
}

/// Scores of one ridge, see `kare_gram_eigen_scores`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KareScores {
    pub train_error: f64,
    pub kare: f64,
    pub varrho: f64,
    pub log_likelihood: f64,
    pub theta: f64,
    pub theta_prime: f64,
}

/// Eigendecomposition of a normalized Gram matrix, reusable across ridges.
pub struct KareGramEigen {
    eigen: Arc<GramEigen>,
}

/// A fitted kernel ridge predictor.
pub struct KarePredictor {
    inner: Predictor,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KareStatus {
    match e {
        Error::Input(_) => KareStatus::InvalidInput,
        Error::Domain(_) => KareStatus::Domain,
        Error::Numeric(_) => KareStatus::Numeric,
        Error::Parse { .. } | Error::Format(_) | Error::Io { .. } => KareStatus::Data,
        Error::Config(_) => KareStatus::Config,
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KareStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            KareStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            KareStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            KareStatus::Panic
        }
    }
}

unsafe fn slice_in<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

unsafe fn slice_out<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(unsafe { slice::from_raw_parts_mut(p, len) })
}

unsafe fn row_major_in(p: *const f64, rows: usize, cols: usize, what: &'static str) -> Result<Mat<f64>, Failure> {
    let len = rows
        .checked_mul(cols)
        .ok_or(Failure::Core(Error::Input(format!("{what}: size overflow"))))?;
    let data = unsafe { slice_in(p, len, what) }?;
    Ok(Mat::from_fn(rows, cols, |i, j| data[i * cols + j]))
}

fn non_null<T>(p: *mut T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::Null(what))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null when the last
/// call succeeded. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn kare_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Solves the signal capture threshold equation for the spectrum
/// `eigenvalues[i]` with multiplicities `multiplicities[i]` (null means all
/// ones).
///
/// # Safety
/// `eigenvalues` and, when not null, `multiplicities` must point to `len`
/// readable elements; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn kare_solve_sct(
    eigenvalues: *const f64,
    multiplicities: *const u64,
    len: usize,
    n: u64,
    lambda: f64,
    out_theta: *mut f64,
    out_theta_prime: *mut f64,
) -> KareStatus {
    guard(|| {
        non_null(out_theta, "out_theta")?;
        non_null(out_theta_prime, "out_theta_prime")?;
        let values = unsafe { slice_in(eigenvalues, len, "eigenvalues") }?;
        let mults: Vec<u64> = if multiplicities.is_null() {
            vec![1; len]
        } else {
            unsafe { slice_in(multiplicities, len, "multiplicities") }?.to_vec()
        };
        let entries = values
            .iter()
            .zip(mults)
            .map(|(&eigenvalue, multiplicity)| SpectrumEntry {
                eigenvalue,
                multiplicity,
            })
            .collect();
        let r = solve_sct(&Spectrum::new(entries)?, n, lambda)?;
        unsafe {
            *out_theta = r.theta;
            *out_theta_prime = r.theta_prime;
        }
        Ok(())
    })
}

/// Writes the `n×n` Gram matrix of the `n×d` inputs `x` to `out`.
///
/// # Safety
/// `x` must hold `n*d` values and `out` must have room for `n*n`.
#[no_mangle]
pub unsafe extern "C" fn kare_gram_matrix(
    kernel: KareKernel,
    lengthscale: f64,
    x: *const f64,
    n: usize,
    d: usize,
    out: *mut f64,
) -> KareStatus {
    guard(|| {
        let spec = KernelSpec::new(kernel.into(), lengthscale)?;
        let xm = unsafe { row_major_in(x, n, d, "x") }?;
        let g = gram_matrix(&spec, xm.as_ref())?;
        let dst = unsafe { slice_out(out, n * n, "out") }?;
        for i in 0..n {
            for j in 0..n {
                dst[i * n + j] = g[(i, j)];
            }
        }
        Ok(())
    })
}

/// Decomposes the `n×n` Gram matrix `gram` (unnormalized).
///
/// # Safety
/// `gram` must hold `n*n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kare_gram_eigen_new(gram: *const f64, n: usize, out: *mut *mut KareGramEigen) -> KareStatus {
    guard(|| {
        non_null(out, "out")?;
        let g = unsafe { row_major_in(gram, n, n, "gram") }?;
        let eigen = Arc::new(GramEigen::new(g.as_ref())?);
        unsafe { *out = Box::into_raw(Box::new(KareGramEigen { eigen })) };
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a pointer from `kare_gram_eigen_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kare_gram_eigen_free(h: *mut KareGramEigen) {
    if !h.is_null() {
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Stieltjes transform `m(-λ) = (1/N) Tr[(G/N + λI)^{-1}]`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kare_gram_eigen_stieltjes(h: *const KareGramEigen, lambda: f64, out: *mut f64) -> KareStatus {
    guard(|| {
        non_null(out, "out")?;
        let h = unsafe { h.as_ref() }.ok_or(Failure::Null("handle"))?;
        let m = h.eigen.spectrum().stieltjes(lambda)?;
        unsafe { *out = m };
        Ok(())
    })
}

/// Train error, KARE, `ϱ`, log-likelihood and the estimated threshold for
/// labels `y` (length `n`) at ridge `lambda`.
///
/// # Safety
/// `h` must be a live handle, `y` must hold `n` values, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kare_gram_eigen_scores(
    h: *const KareGramEigen,
    y: *const f64,
    n: usize,
    lambda: f64,
    out: *mut KareScores,
) -> KareStatus {
    guard(|| {
        non_null(out, "out")?;
        let h = unsafe { h.as_ref() }.ok_or(Failure::Null("handle"))?;
        let y = unsafe { slice_in(y, n, "y") }?;
        let s = RidgeEvaluator::new(h.eigen.clone(), y)?.scores(lambda)?;
        unsafe {
            *out = KareScores {
                train_error: s.train_error,
                kare: s.kare,
                varrho: s.varrho,
                log_likelihood: s.log_likelihood,
                theta: s.sct.theta,
                theta_prime: s.sct.theta_prime,
            }
        };
        Ok(())
    })
}

/// Fits a kernel ridge predictor on `n×d` inputs `x` and labels `y`.
///
/// # Safety
/// `x` must hold `n*d` values, `y` `n` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kare_predictor_fit(
    kernel: KareKernel,
    lengthscale: f64,
    x: *const f64,
    n: usize,
    d: usize,
    y: *const f64,
    lambda: f64,
    out: *mut *mut KarePredictor,
) -> KareStatus {
    guard(|| {
        non_null(out, "out")?;
        let spec = KernelSpec::new(kernel.into(), lengthscale)?;
        let xm = unsafe { row_major_in(x, n, d, "x") }?;
        let y = unsafe { slice_in(y, n, "y") }?;
        let inner = krr::fit(&spec, Arc::new(xm), y, lambda)?;
        unsafe { *out = Box::into_raw(Box::new(KarePredictor { inner })) };
        Ok(())
    })
}

/// Predicts at `m×d` inputs `x`, writing `m` values to `out`.
///
/// # Safety
/// `h` must be a live handle, `x` must hold `m*d` values, `out` room for `m`.
#[no_mangle]
pub unsafe extern "C" fn kare_predictor_predict(
    h: *const KarePredictor,
    x: *const f64,
    m: usize,
    d: usize,
    out: *mut f64,
) -> KareStatus {
    guard(|| {
        let h = unsafe { h.as_ref() }.ok_or(Failure::Null("handle"))?;
        let xm = unsafe { row_major_in(x, m, d, "x") }?;
        let pred = h.inner.predict(xm.as_ref())?;
        unsafe { slice_out(out, m, "out") }?.copy_from_slice(&pred);
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a pointer from `kare_predictor_fit` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kare_predictor_free(h: *mut KarePredictor) {
    if !h.is_null() {
        drop(unsafe { Box::from_raw(h) });
    }
}

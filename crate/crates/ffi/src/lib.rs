//! C ABI for the opmono toolkit.
//!
//! Functions and matrices are opaque handles created and freed through this
//! API. Every fallible call returns an [`OpmStatus`]; on failure a message is
//! available from [`opm_last_error_message`] on the same thread. Panics never
//! cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use opmono::monotone::{self, CheckSettings};
use opmono::psineq;
use opmono::symmat::{self, State, SymMatrix};
use opmono::{Error, ScalarFunction, Status, Tolerances, TrialBudget};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    DomainError = 4,
    DimensionError = 5,
    NoConvergence = 6,
    OrderViolation = 7,
    InvalidArgument = 8,
    Panic = 9,
}

/// Parsed scalar function of `t`.
pub struct OpmFunction(ScalarFunction);

/// Real symmetric matrix.
pub struct OpmMatrix(SymMatrix);

/// Summary of a randomized check.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpmVerdictSummary {
    /// 0 holds within budget, 1 violated, 2 domain error.
    pub status: c_int,
    pub trials_run: u64,
    /// Smallest trial margin, NaN if no trial finished.
    pub min_margin: f64,
    /// Margin of the witness, NaN if there is none.
    pub witness_margin: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(OpmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Syntax { .. } | Error::UnknownIdentifier { .. } | Error::NonConstantExponent { .. } => {
                OpmStatus::ParseError
            }
            Error::Domain { .. } | Error::NotIncreasing { .. } => OpmStatus::DomainError,
            Error::DimensionMismatch { .. } | Error::InvalidDimension(_) | Error::MatrixFormat(_) => {
                OpmStatus::DimensionError
            }
            Error::NoConvergence { .. } => OpmStatus::NoConvergence,
            Error::OrderViolation { .. } => OpmStatus::OrderViolation,
            _ => OpmStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> OpmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            OpmStatus::Ok
        }
        Ok(Err(Fail(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            OpmStatus::Panic
        }
    }
}

fn null() -> Fail {
    Fail(OpmStatus::NullPointer, "null pointer argument".into())
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Fail(OpmStatus::InvalidUtf8, e.to_string()))
}

unsafe fn as_ref<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(null)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn opm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a function expression in `t`.
///
/// # Safety
/// `src` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opm_function_parse(src: *const c_char, out: *mut *mut OpmFunction) -> OpmStatus {
    guard(|| {
        let f = ScalarFunction::parse(str_arg(src)?)?;
        write_out(out, Box::into_raw(Box::new(OpmFunction(f))))
    })
}

/// # Safety
/// `f` must come from this library and not be freed already; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn opm_function_free(f: *mut OpmFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opm_function_eval(f: *const OpmFunction, t: f64, out: *mut f64) -> OpmStatus {
    guard(|| write_out(out, as_ref(f)?.0.eval(t)?))
}

/// Value and derivative at `t`.
///
/// # Safety
/// `f` must be a live handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn opm_function_eval_dual(
    f: *const OpmFunction,
    t: f64,
    out_value: *mut f64,
    out_derivative: *mut f64,
) -> OpmStatus {
    guard(|| {
        let (v, d) = as_ref(f)?.0.eval_dual(t)?;
        if out_value.is_null() || out_derivative.is_null() {
            return Err(null());
        }
        write_out(out_value, v)?;
        write_out(out_derivative, d)
    })
}

/// The companion `t / f(t)` as a new handle.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opm_function_companion(f: *const OpmFunction, out: *mut *mut OpmFunction) -> OpmStatus {
    guard(|| {
        let g = as_ref(f)?.0.companion();
        write_out(out, Box::into_raw(Box::new(OpmFunction(g))))
    })
}

/// Builds an `n x n` matrix from `n * n` row-major entries (symmetrized).
///
/// # Safety
/// `data` must point to `n * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opm_matrix_new(n: usize, data: *const f64, out: *mut *mut OpmMatrix) -> OpmStatus {
    guard(|| {
        if data.is_null() {
            return Err(null());
        }
        let len = n.checked_mul(n).ok_or_else(|| Fail::from(Error::InvalidDimension(n)))?;
        if n == 0 || n > symmat::MAX_DIM {
            return Err(Error::InvalidDimension(n).into());
        }
        let m = SymMatrix::from_vec(n, std::slice::from_raw_parts(data, len).to_vec())?;
        write_out(out, Box::into_raw(Box::new(OpmMatrix(m))))
    })
}

/// # Safety
/// `m` must come from this library and not be freed already; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn opm_matrix_free(m: *mut OpmMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of `m`, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn opm_matrix_dim(m: *const OpmMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.dim())
}

/// Copies the `n * n` row-major entries into `out`.
///
/// # Safety
/// `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn opm_matrix_data(m: *const OpmMatrix, out: *mut f64, len: usize) -> OpmStatus {
    guard(|| {
        let m = as_ref(m)?;
        let src = m.0.as_slice();
        if out.is_null() {
            return Err(null());
        }
        if len < src.len() {
            return Err(Fail(OpmStatus::DimensionError, format!("buffer holds {len}, need {}", src.len())));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
        Ok(())
    })
}

/// Eigenvalues in ascending order, and optionally the eigenvectors as the
/// columns of a row-major `n x n` array.
///
/// # Safety
/// `values` must have room for `n` doubles; `vectors` must be NULL or have
/// room for `n * n` doubles.
#[no_mangle]
pub unsafe extern "C" fn opm_matrix_eigen(m: *const OpmMatrix, values: *mut f64, vectors: *mut f64) -> OpmStatus {
    guard(|| {
        let m = as_ref(m)?;
        if values.is_null() {
            return Err(null());
        }
        let spec = m.0.eig()?;
        let n = m.0.dim();
        ptr::copy_nonoverlapping(spec.values.as_ptr(), values, n);
        if !vectors.is_null() {
            for k in 0..n {
                for (i, x) in spec.vector(k).into_iter().enumerate() {
                    vectors.add(i * n + k).write(x);
                }
            }
        }
        Ok(())
    })
}

/// `f(A)` by spectral calculus; eigenvalues below `clamp` are raised to it
/// (pass `-INFINITY` to disable).
///
/// # Safety
/// `f` and `a` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opm_matrix_apply(
    f: *const OpmFunction,
    a: *const OpmMatrix,
    clamp: f64,
    out: *mut *mut OpmMatrix,
) -> OpmStatus {
    guard(|| {
        let m = symmat::apply_fn(&as_ref(f)?.0, &as_ref(a)?.0, clamp)?;
        write_out(out, Box::into_raw(Box::new(OpmMatrix(m))))
    })
}

/// Frechet derivative of `f` at `a` in direction `c`.
///
/// # Safety
/// All handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opm_frechet(
    f: *const OpmFunction,
    a: *const OpmMatrix,
    c: *const OpmMatrix,
    out: *mut *mut OpmMatrix,
) -> OpmStatus {
    guard(|| {
        let d = monotone::frechet_derivative(&as_ref(f)?.0, &as_ref(a)?.0, &as_ref(c)?.0)?;
        write_out(out, Box::into_raw(Box::new(OpmMatrix(d))))
    })
}

/// Powers-Stormer margin of `f` at `(a, b)` with default tolerances.
/// `weight` NULL means the canonical trace, otherwise `X -> trace(weight X)`
/// for a PSD weight. With `ordered` set, the reduced form for `a <= b` is
/// used and an unordered pair fails with `ORDER_VIOLATION`.
///
/// # Safety
/// `f`, `a`, `b` must be live handles, `weight` NULL or live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn opm_ps_margin(
    f: *const OpmFunction,
    weight: *const OpmMatrix,
    a: *const OpmMatrix,
    b: *const OpmMatrix,
    ordered: bool,
    out: *mut f64,
) -> OpmStatus {
    guard(|| {
        let state = match weight.as_ref() {
            None => State::CanonicalTrace,
            Some(w) => State::functional(w.0.clone())?,
        };
        let tol = Tolerances::DEFAULT;
        let (f, a, b) = (&as_ref(f)?.0, &as_ref(a)?.0, &as_ref(b)?.0);
        let margin = if ordered {
            psineq::ps_margin_ordered(f, &state, a, b, &tol)?
        } else {
            psineq::ps_margin(f, &state, a, b, &tol)?
        };
        write_out(out, margin)
    })
}

/// Randomized n-monotonicity check on the default domain.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opm_check_monotone(
    f: *const OpmFunction,
    n: usize,
    trials: u64,
    seed: u64,
    out: *mut OpmVerdictSummary,
) -> OpmStatus {
    guard(|| {
        let settings = CheckSettings::new(TrialBudget::new(trials, seed));
        let v = monotone::check_n_monotone(&as_ref(f)?.0, n, &settings)?;
        write_out(
            out,
            OpmVerdictSummary {
                status: match v.status {
                    Status::HoldsWithinBudget => 0,
                    Status::Violated => 1,
                    Status::DomainError => 2,
                },
                trials_run: v.trials_run,
                min_margin: v.min_margin.unwrap_or(f64::NAN),
                witness_margin: v.witness.as_ref().map_or(f64::NAN, |w| w.margin),
            },
        )
    })
}

/// Runs the command line with `argv[0..argc]` (without a program name) and
/// returns its exit code. The JSON report and diagnostics are returned as
/// new strings to be released with [`opm_string_free`]; either output
/// pointer may be NULL. Returns -1 if an argument is NULL or not UTF-8.
///
/// # Safety
/// `argv` must hold `argc` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn opm_cli_run(
    argc: c_int,
    argv: *const *const c_char,
    out_stdout: *mut *mut c_char,
    out_stderr: *mut *mut c_char,
) -> c_int {
    let mut code = -1;
    let status = guard(|| {
        let count = usize::try_from(argc).map_err(|_| Fail(OpmStatus::InvalidArgument, "negative argc".into()))?;
        if count > 0 && argv.is_null() {
            return Err(null());
        }
        let mut args = vec!["opmono".to_string()];
        for i in 0..count {
            args.push(str_arg(*argv.add(i))?.to_string());
        }
        let outcome = opmono::cli::run(args);
        code = outcome.exit_code;
        for (slot, text) in [(out_stdout, outcome.stdout), (out_stderr, outcome.stderr)] {
            if !slot.is_null() {
                slot.write(CString::new(text).unwrap_or_default().into_raw());
            }
        }
        Ok(())
    });
    if status == OpmStatus::Ok {
        code
    } else {
        -1
    }
}

/// Releases a string returned by this library; NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed already.
#[no_mangle]
pub unsafe extern "C" fn opm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

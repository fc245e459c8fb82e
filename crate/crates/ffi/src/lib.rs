//! C ABI for `minusorder`.
//!
//! Every fallible function returns a [`MoStatus`]. On failure a message is
//! stored per thread and can be read with [`mo_last_error_message`]; for
//! pipeline failures [`mo_last_error_stage`] names the stage. Matrices
//! cross the boundary as opaque [`MoMatrix`] handles that the caller frees
//! with [`mo_matrix_free`]. Dense data is always row-major.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use minusorder::conic::{self, Conic2};
use minusorder::linalg::{moore_penrose, parse_matrix, rank, DenseMatrix, TolerancePolicy};
use minusorder::order::{minus_leq_image, minus_leq_inner, minus_leq_rank};
use minusorder::reconstruction::{run_pipeline, CongruenceMap, PsdMap};
use minusorder::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    /// Not symmetric, not PSD/PD, or a conic outside its allowed region.
    InvalidMatrix = 4,
    /// A point or parameter outside the domain of a geometric map.
    OutOfDomain = 5,
    Parse = 6,
    Numerical = 7,
    /// A recovery pipeline stage rejected the map.
    PipelineFailure = 8,
    Panic = 9,
}

/// Which characterization of the minus order to evaluate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoOrderMethod {
    RankSubtractivity = 0,
    ImageDirectSum = 1,
    InnerInverse = 2,
}

/// Tolerances; `mo_policy_default` gives the library defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoPolicy {
    pub rank_rel_tol: f64,
    pub sym_abs_tol: f64,
    pub psd_eig_tol: f64,
}

/// Ellipse at angle `phi` touching the unit circle and an inner conic.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MoTouching {
    pub r: f64,
    pub q11: f64,
    pub q12: f64,
    pub q22: f64,
    pub touch_x: f64,
    pub touch_y: f64,
}

/// Opaque dense matrix.
pub struct MoMatrix(DenseMatrix);

/// Black-box map on `n x n` matrices: reads `input` and writes `output`,
/// both row-major with `n * n` entries. Called concurrently from several
/// threads, so it must be thread safe.
pub type MoMapFn = Option<unsafe extern "C" fn(user_data: *mut c_void, n: usize, input: *const f64, output: *mut f64)>;

struct LastError {
    message: CString,
    stage: Option<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<LastError>> = const { RefCell::new(None) };
}

fn set_error(message: &str, stage: Option<&str>) {
    let clean = |s: &str| CString::new(s.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = Some(LastError {
            message: clean(message),
            stage: stage.map(clean),
        })
    });
}

fn status_of(err: &Error) -> MoStatus {
    match err {
        Error::ShapeMismatch { .. } | Error::NotSquare { .. } => MoStatus::ShapeMismatch,
        Error::NotSymmetric { .. }
        | Error::NotPositiveSemidefinite { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::NotInsideUnitCircle { .. }
        | Error::NotNested => MoStatus::InvalidMatrix,
        Error::InfeasibleConfiguration(_) | Error::ImaginaryDenominator { .. } | Error::NotInRange { .. } => {
            MoStatus::OutOfDomain
        }
        Error::ConvergenceFailure(_)
        | Error::SingularTransform { .. }
        | Error::NotOrthonormal { .. }
        | Error::InternalInconsistency(_)
        | Error::DegenerateKernel { .. } => MoStatus::Numerical,
        Error::IdentityImageSingular
        | Error::NotNormalized { .. }
        | Error::InconsistentLineImages { .. }
        | Error::NotCongruenceInduced { .. }
        | Error::SignResolutionFailure { .. }
        | Error::CheckFailed { .. }
        | Error::Stage { .. } => MoStatus::PipelineFailure,
        Error::Parse { .. } => MoStatus::Parse,
        _ => MoStatus::InvalidArgument,
    }
}

fn fail(status: MoStatus, message: &str) -> MoStatus {
    set_error(message, None);
    status
}

/// Runs `body`, converting errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), MoStatus>) -> MoStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MoStatus::Ok,
        Ok(Err(status)) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(MoStatus::Panic, &format!("panic: {msg}"))
        }
    }
}

fn lib<T>(r: minusorder::Result<T>) -> Result<T, MoStatus> {
    r.map_err(|e| {
        set_error(&e.to_string(), e.stage());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), MoStatus> {
    if p.is_null() {
        Err(fail(MoStatus::NullPointer, &format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `m` must be null or a live handle.
unsafe fn matrix<'a>(m: *const MoMatrix, name: &str) -> Result<&'a DenseMatrix, MoStatus> {
    non_null(m, name)?;
    Ok(&(*m).0)
}

/// # Safety
/// `p` must be null or point to a readable [`MoPolicy`].
unsafe fn policy(p: *const MoPolicy) -> Result<TolerancePolicy, MoStatus> {
    if p.is_null() {
        return Ok(TolerancePolicy::default());
    }
    let p = *p;
    lib(TolerancePolicy::new(p.rank_rel_tol, p.sym_abs_tol, p.psd_eig_tol))
}

fn boxed(m: DenseMatrix) -> *mut MoMatrix {
    Box::into_raw(Box::new(MoMatrix(m)))
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mo_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |e| e.message.as_ptr()))
}

/// Stage label of the last pipeline failure on this thread, or null.
#[no_mangle]
pub extern "C" fn mo_last_error_stage() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .and_then(|e| e.stage.as_ref())
            .map_or(ptr::null(), |s| s.as_ptr())
    })
}

#[no_mangle]
pub extern "C" fn mo_clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn mo_policy_default() -> MoPolicy {
    let d = TolerancePolicy::default();
    MoPolicy {
        rank_rel_tol: d.rank_rel_tol,
        sym_abs_tol: d.sym_abs_tol,
        psd_eig_tol: d.psd_eig_tol,
    }
}

/// Copies `rows * cols` row-major entries into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles (it may be null when
/// that product is zero); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mo_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut MoMatrix,
) -> MoStatus {
    guard(|| {
        non_null(out, "out")?;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| fail(MoStatus::InvalidArgument, "rows * cols overflows"))?;
        if len > 0 {
            non_null(data, "data")?;
        }
        let values = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(data, len)
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(fail(MoStatus::InvalidArgument, "matrix contains a non-finite entry"));
        }
        *out = boxed(DenseMatrix::from_row_slice(rows, cols, values));
        Ok(())
    })
}

/// Parses the text (`rows cols` header then rows) or JSON matrix format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mo_matrix_parse(text: *const c_char, out: *mut *mut MoMatrix) -> MoStatus {
    guard(|| {
        non_null(text, "text")?;
        non_null(out, "out")?;
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| fail(MoStatus::Parse, "input is not valid UTF-8"))?;
        *out = boxed(lib(parse_matrix(s, "<input>"))?);
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mo_matrix_free(m: *mut MoMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mo_matrix_rows(m: *const MoMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.nrows())
}

/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mo_matrix_cols(m: *const MoMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.ncols())
}

/// Writes the entries row-major into `buf`, which holds `len` doubles.
///
/// # Safety
/// `m` must be a live handle and `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mo_matrix_copy_data(m: *const MoMatrix, buf: *mut f64, len: usize) -> MoStatus {
    guard(|| {
        let m = matrix(m, "m")?;
        let need = m.len();
        if len < need {
            return Err(fail(
                MoStatus::InvalidArgument,
                &format!("buffer holds {len} values, need {need}"),
            ));
        }
        if need > 0 {
            non_null(buf, "buf")?;
        }
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                *buf.add(i * m.ncols() + j) = m[(i, j)];
            }
        }
        Ok(())
    })
}

/// Numerical rank under `policy` (null for defaults).
///
/// # Safety
/// `m` must be a live handle, `policy` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mo_rank(m: *const MoMatrix, policy: *const MoPolicy, out: *mut usize) -> MoStatus {
    guard(|| {
        let m = matrix(m, "m")?;
        let p = self::policy(policy)?;
        non_null(out, "out")?;
        *out = rank(m, &p);
        Ok(())
    })
}

/// Moore-Penrose inverse as a new handle.
///
/// # Safety
/// `m` must be a live handle, `policy` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mo_pinv(m: *const MoMatrix, policy: *const MoPolicy, out: *mut *mut MoMatrix) -> MoStatus {
    guard(|| {
        let m = matrix(m, "m")?;
        let p = self::policy(policy)?;
        non_null(out, "out")?;
        *out = boxed(moore_penrose(m, &p));
        Ok(())
    })
}

/// Decides `A <=- B` with the chosen predicate.
///
/// # Safety
/// `a`, `b` must be live handles, `policy` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mo_minus_leq(
    a: *const MoMatrix,
    b: *const MoMatrix,
    method: MoOrderMethod,
    policy: *const MoPolicy,
    out: *mut bool,
) -> MoStatus {
    guard(|| {
        let (a, b) = (matrix(a, "a")?, matrix(b, "b")?);
        let p = self::policy(policy)?;
        non_null(out, "out")?;
        *out = match method {
            MoOrderMethod::RankSubtractivity => lib(minus_leq_rank(a, b, &p))?,
            MoOrderMethod::ImageDirectSum => lib(minus_leq_image(a, b, &p))?,
            MoOrderMethod::InnerInverse => lib(minus_leq_inner(a, b, &p))?.holds,
        };
        Ok(())
    })
}

/// Touching ellipse at angle `phi` for the conic `q11 x^2 + 2 q12 xy + q22 y^2 = 1`,
/// which must lie inside the unit circle.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mo_touching_ellipse(q11: f64, q12: f64, q22: f64, phi: f64, out: *mut MoTouching) -> MoStatus {
    guard(|| {
        non_null(out, "out")?;
        let q = lib(Conic2::new(q11, q12, q22))?;
        let sol = lib(conic::touching_ellipse(&q, phi))?;
        *out = MoTouching {
            r: sol.r,
            q11: sol.conic.q11,
            q12: sol.conic.q12,
            q22: sol.conic.q22,
            touch_x: sol.touch_point[0],
            touch_y: sol.touch_point[1],
        };
        Ok(())
    })
}

/// The planar rigidity map, or its inverse when `inverse` is set.
///
/// # Safety
/// `out_x`, `out_y` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mo_phi_hat(
    a0: f64,
    gamma: f64,
    x: f64,
    y: f64,
    inverse: bool,
    out_x: *mut f64,
    out_y: *mut f64,
) -> MoStatus {
    guard(|| {
        non_null(out_x, "out_x")?;
        non_null(out_y, "out_y")?;
        let p = if inverse {
            conic::phi_hat_inverse(a0, gamma, [x, y])
        } else {
            conic::phi_hat(a0, gamma, [x, y])
        };
        let [u, v] = lib(p)?;
        *out_x = u;
        *out_y = v;
        Ok(())
    })
}

struct CallbackMap {
    n: usize,
    f: unsafe extern "C" fn(*mut c_void, usize, *const f64, *mut f64),
    user_data: *mut c_void,
}

// The caller promises the callback and its data are thread safe.
unsafe impl Send for CallbackMap {}
unsafe impl Sync for CallbackMap {}

impl PsdMap for CallbackMap {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, a: &DenseMatrix) -> DenseMatrix {
        let n = self.n;
        let input: Vec<f64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
        let mut output = vec![0.0; n * n];
        // SAFETY: both buffers hold n * n doubles; thread safety is on the caller.
        unsafe { (self.f)(self.user_data, n, input.as_ptr(), output.as_mut_ptr()) };
        DenseMatrix::from_row_slice(n, n, &output)
    }
}

/// Runs the recovery pipeline on a caller-supplied map of `n x n`
/// matrices. On success `out` receives `S` with `map(A) = S A S^T`, up to
/// sign. On failure the status is `PipelineFailure` and
/// `mo_last_error_stage` names the rejecting stage.
///
/// # Safety
/// `map` must be callable as documented on `MoMapFn`, concurrently, with
/// `user_data`; `policy` null or readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mo_recover_congruence(
    n: usize,
    map: MoMapFn,
    user_data: *mut c_void,
    seed: u64,
    policy: *const MoPolicy,
    out: *mut *mut MoMatrix,
) -> MoStatus {
    guard(|| {
        let f = map.ok_or_else(|| fail(MoStatus::NullPointer, "`map` is null"))?;
        non_null(out, "out")?;
        if n < 3 {
            return Err(fail(
                MoStatus::InvalidArgument,
                &format!("recovery needs n >= 3, got {n}"),
            ));
        }
        let p = self::policy(policy)?;
        let report = lib(run_pipeline(&CallbackMap { n, f, user_data }, seed, &p))?;
        *out = boxed(report.recovered);
        Ok(())
    })
}

/// Builds the congruence `A -> S A S^T` and recovers `S` from it; a
/// self-check of the pipeline for a known `S`.
///
/// # Safety
/// `s` must be a live handle, `policy` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mo_recover_known_congruence(
    s: *const MoMatrix,
    seed: u64,
    policy: *const MoPolicy,
    out: *mut *mut MoMatrix,
) -> MoStatus {
    guard(|| {
        let s = matrix(s, "s")?;
        let p = self::policy(policy)?;
        non_null(out, "out")?;
        if s.nrows() < 3 {
            return Err(fail(
                MoStatus::InvalidArgument,
                &format!("recovery needs n >= 3, got {}", s.nrows()),
            ));
        }
        let map = lib(CongruenceMap::new(s.clone(), &p))?;
        *out = boxed(lib(run_pipeline(&map, seed, &p))?.recovered);
        Ok(())
    })
}

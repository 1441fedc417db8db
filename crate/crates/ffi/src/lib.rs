//! C interface to `muhs-core`.
//!
//! Every function returns a [`MuhsStatus`]; on failure the message is kept per thread
//! and can be read with [`muhs_last_error`]. Objects are opaque handles released with
//! their `_free` function. Panics are caught and reported as `MUHS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use muhs_core::cli::init::parse_init;
use muhs_core::evolution::{classify_initial, integrate, EvolutionConfig, Outcome, VerdictTag};
use muhs_core::geometry::sectional;
use muhs_core::spectral::{apply_a, apply_a_inverse, InverseMethod};
use muhs_core::waves::{solve_period_one, wave_stats, WaveFamily};
use muhs_core::{MuhsError, PeriodicGrid, RealField};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuhsStatus {
    MuhsOk = 0,
    MuhsNullPointer = 1,
    MuhsInvalidInput = 2,
    MuhsNumerical = 3,
    MuhsUnsatisfiable = 4,
    MuhsPanic = 5,
    MuhsBufferTooSmall = 6,
}

/// Verdict of the a-priori classification.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuhsVerdict {
    MuhsGlobal = 0,
    MuhsBlowupCertified = 1,
    MuhsBlowupHs = 2,
    MuhsSteadyConstant = 3,
    MuhsIndeterminate = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuhsWaveFamily {
    MuhsSmooth = 0,
    MuhsCusped = 1,
}

/// Samples of a periodic field on a uniform grid.
pub struct MuhsField(RealField);

/// A finished integration.
pub struct MuhsTrajectory(muhs_core::evolution::Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &MuhsError) -> MuhsStatus {
    match e {
        MuhsError::NonPositiveMean { .. } | MuhsError::NoBracket { .. } => {
            MuhsStatus::MuhsUnsatisfiable
        }
        MuhsError::Numerical(_)
        | MuhsError::DiffeomorphismLost { .. }
        | MuhsError::NonPeriodicAntiderivative { .. } => MuhsStatus::MuhsNumerical,
        _ => MuhsStatus::MuhsInvalidInput,
    }
}

enum Fail {
    Null(&'static str),
    Lib(MuhsError),
    Small(usize),
}

impl From<MuhsError> for Fail {
    fn from(e: MuhsError) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MuhsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MuhsStatus::MuhsOk,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            MuhsStatus::MuhsNullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Small(need))) => {
            set_error(format!("buffer too small, need {need}"));
            MuhsStatus::MuhsBufferTooSmall
        }
        Err(_) => {
            set_error("internal panic".into());
            MuhsStatus::MuhsPanic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(v);
    Ok(())
}

fn boxed_field(f: RealField) -> *mut MuhsField {
    Box::into_raw(Box::new(MuhsField(f)))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated
/// to `len`) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn muhs_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Static NUL-terminated version string.
#[no_mangle]
pub extern "C" fn muhs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Field from `n` samples at `x_j = j/n`.
///
/// # Safety
/// `samples` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn muhs_field_from_samples(
    samples: *const f64,
    n: usize,
    out: *mut *mut MuhsField,
) -> MuhsStatus {
    guard(|| {
        if samples.is_null() {
            return Err(Fail::Null("samples"));
        }
        let grid = PeriodicGrid::new(n)?;
        let v = std::slice::from_raw_parts(samples, n).to_vec();
        let f = RealField::from_samples(grid, v)?;
        put(out, boxed_field(f), "out")
    })
}

/// Field from an initial-condition expression such as `"0.2 + cos(1)"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn muhs_field_from_spec(
    spec: *const c_char,
    n: usize,
    out: *mut *mut MuhsField,
) -> MuhsStatus {
    guard(|| {
        if spec.is_null() {
            return Err(Fail::Null("spec"));
        }
        let text = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| MuhsError::InvalidParams("spec is not UTF-8".into()))?;
        let grid = PeriodicGrid::new(n)?;
        put(out, boxed_field(parse_init(text)?.field(grid)), "out")
    })
}

/// # Safety
/// `field` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn muhs_field_free(field: *mut MuhsField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn muhs_field_len(field: *const MuhsField) -> usize {
    field.as_ref().map_or(0, |f| f.0.n())
}

/// Copies the samples into `buf`, which must hold at least `muhs_field_len` doubles.
///
/// # Safety
/// `field` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn muhs_field_samples(
    field: *const MuhsField,
    buf: *mut f64,
    len: usize,
) -> MuhsStatus {
    guard(|| {
        let f = deref(field, "field")?;
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        let s = f.0.samples();
        if len < s.len() {
            return Err(Fail::Small(s.len()));
        }
        ptr::copy_nonoverlapping(s.as_ptr(), buf, s.len());
        Ok(())
    })
}

/// `m = A u = mu(u) - u_xx`.
///
/// # Safety
/// `u` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn muhs_apply_a(u: *const MuhsField, out: *mut *mut MuhsField) -> MuhsStatus {
    guard(|| {
        let u = deref(u, "u")?;
        put(out, boxed_field(apply_a(&u.0)), "out")
    })
}

/// `u = A^{-1} m`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn muhs_apply_a_inverse(
    m: *const MuhsField,
    out: *mut *mut MuhsField,
) -> MuhsStatus {
    guard(|| {
        let m = deref(m, "m")?;
        put(out, boxed_field(apply_a_inverse(&m.0, InverseMethod::Spectral)), "out")
    })
}

/// A-priori verdict and its time bound (NaN when there is none).
///
/// # Safety
/// `u` must be a live handle; `verdict` and `t_bound` must be writable.
#[no_mangle]
pub unsafe extern "C" fn muhs_classify(
    u: *const MuhsField,
    verdict: *mut MuhsVerdict,
    t_bound: *mut f64,
) -> MuhsStatus {
    guard(|| {
        let u = deref(u, "u")?;
        let v = classify_initial(&u.0);
        let (tag, t) = match v.tag {
            VerdictTag::Global => (MuhsVerdict::MuhsGlobal, f64::NAN),
            VerdictTag::BlowupCertified { t_bound } => (MuhsVerdict::MuhsBlowupCertified, t_bound),
            VerdictTag::BlowupHS { t_crit } => (MuhsVerdict::MuhsBlowupHs, t_crit),
            VerdictTag::SteadyConstant => (MuhsVerdict::MuhsSteadyConstant, f64::NAN),
            VerdictTag::Indeterminate => (MuhsVerdict::MuhsIndeterminate, f64::NAN),
        };
        put(verdict, tag, "verdict")?;
        put(t_bound, t, "t_bound")
    })
}

/// Integrates to `t_end` with the default settings and the given CFL number.
///
/// # Safety
/// `u0` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn muhs_integrate(
    u0: *const MuhsField,
    t_end: f64,
    cfl: f64,
    out: *mut *mut MuhsTrajectory,
) -> MuhsStatus {
    guard(|| {
        let u0 = deref(u0, "u0")?;
        let mut cfg = EvolutionConfig::new(u0.0.n(), t_end);
        cfg.cfl = cfl;
        let traj = integrate(&u0.0, &cfg)?;
        put(out, Box::into_raw(Box::new(MuhsTrajectory(traj))), "out")
    })
}

/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn muhs_trajectory_free(traj: *mut MuhsTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// `completed` is 1 when `t_end` was reached; otherwise `t_est` holds the blow-up
/// estimate. `t_final` is the last time reached.
///
/// # Safety
/// `traj` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn muhs_trajectory_outcome(
    traj: *const MuhsTrajectory,
    completed: *mut i32,
    t_est: *mut f64,
    t_final: *mut f64,
) -> MuhsStatus {
    guard(|| {
        let t = deref(traj, "traj")?;
        let (done, est) = match t.0.outcome {
            Outcome::Completed => (1, f64::NAN),
            Outcome::NumericalBlowup { t_est, .. } => (0, t_est),
        };
        put(completed, done, "completed")?;
        put(t_est, est, "t_est")?;
        put(t_final, t.0.t_final(), "t_final")
    })
}

/// Copy of the last stored state.
///
/// # Safety
/// `traj` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn muhs_trajectory_final(
    traj: *const MuhsTrajectory,
    out: *mut *mut MuhsField,
) -> MuhsStatus {
    guard(|| {
        let t = deref(traj, "traj")?;
        put(out, boxed_field(t.0.last().u.clone()), "out")
    })
}

/// Period and integral over one period of the traveling wave with trough `m_lo`,
/// crest `m_hi`, speed `c` and frozen mean `mu`.
///
/// # Safety
/// `period` and `integral` must be writable.
#[no_mangle]
pub unsafe extern "C" fn muhs_wave_stats(
    c: f64,
    m_lo: f64,
    m_hi: f64,
    mu: f64,
    period: *mut f64,
    integral: *mut f64,
) -> MuhsStatus {
    guard(|| {
        let s = wave_stats(c, m_lo, m_hi, mu)?;
        put(period, s.period, "period")?;
        put(integral, s.mean, "integral")
    })
}

/// Period-one wave with mean `mu`, keeping the trough at `m_anchor`.
///
/// # Safety
/// `m_hi` and `mu` must be writable.
#[no_mangle]
pub unsafe extern "C" fn muhs_solve_period_one(
    c: f64,
    family: MuhsWaveFamily,
    m_anchor: f64,
    m_hi: *mut f64,
    mu: *mut f64,
) -> MuhsStatus {
    guard(|| {
        let fam = match family {
            MuhsWaveFamily::MuhsSmooth => WaveFamily::Smooth,
            MuhsWaveFamily::MuhsCusped => WaveFamily::Cusped,
        };
        let p = solve_period_one(c, fam, m_anchor)?;
        put(m_hi, p.m_hi, "m_hi")?;
        put(mu, p.mu, "mu")
    })
}

/// Sectional curvature of the plane spanned by `u` and `v`.
///
/// # Safety
/// `u`, `v` must be live handles on the same grid; `k` must be writable.
#[no_mangle]
pub unsafe extern "C" fn muhs_sectional(
    u: *const MuhsField,
    v: *const MuhsField,
    k: *mut f64,
) -> MuhsStatus {
    guard(|| {
        let (u, v) = (deref(u, "u")?, deref(v, "v")?);
        if u.0.n() != v.0.n() {
            return Err(MuhsError::GridMismatch {
                expected: u.0.n(),
                actual: v.0.n(),
            }
            .into());
        }
        put(k, sectional(&u.0, &v.0)?, "k")
    })
}

//! C ABI over `delayq`.
//!
//! Every function returns a [`DqStatus`]; on failure a message is available
//! from [`dq_last_error`] on the same thread. Trajectories are opaque
//! handles released with [`dq_trajectory_free`]. Panics never cross the
//! boundary; they are reported as [`DqStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use delayq::analysis::{self, ClassifyConfig, Regime};
use delayq::dde::Trajectory;
use delayq::models::{self, ModelKind, ModelParams};
use delayq::stability;
use delayq::Error;
use num_complex::Complex64;

pub const DQ_MODEL_CONSTANT: u32 = 0;
pub const DQ_MODEL_MOVING_AVERAGE: u32 = 1;

pub const DQ_REGIME_SYNCHRONIZED: u32 = 0;
pub const DQ_REGIME_OSCILLATORY: u32 = 1;
pub const DQ_REGIME_INCONCLUSIVE: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DqStatus {
    Ok = 0,
    NullPointer = 1,
    Precondition = 2,
    Domain = 3,
    NumericalFailure = 4,
    OutOfRange = 5,
    NonConvergence = 6,
    SingularDerivative = 7,
    Io = 8,
    /// No Hopf bifurcation exists for the given rates.
    NoHopf = 9,
    /// The output buffer is smaller than the reported count.
    BufferTooSmall = 10,
    Panic = 11,
}

/// Opaque trajectory handle.
pub struct DqTrajectory {
    traj: Trajectory,
    params: ModelParams,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let mut bytes = msg.into();
    bytes.retain(|&b| b != 0);
    let s = CString::new(bytes).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn fail(status: DqStatus, msg: impl Into<Vec<u8>>) -> DqStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> DqStatus {
    let status = match e {
        Error::Precondition(_) => DqStatus::Precondition,
        Error::Domain(_) => DqStatus::Domain,
        Error::NumericalFailure { .. } => DqStatus::NumericalFailure,
        Error::OutOfRange { .. } => DqStatus::OutOfRange,
        Error::NonConvergence { .. } => DqStatus::NonConvergence,
        Error::SingularDerivative { .. } => DqStatus::SingularDerivative,
        Error::Io(_) => DqStatus::Io,
    };
    fail(status, e.to_string())
}

/// Runs `f` with panics caught and errors recorded.
fn guard<F: FnOnce() -> Result<(), DqStatus>>(f: F) -> DqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DqStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(DqStatus::Panic, "internal panic"),
    }
}

fn model_kind(model: u32) -> Result<ModelKind, DqStatus> {
    match model {
        DQ_MODEL_CONSTANT => Ok(ModelKind::ConstantDelay),
        DQ_MODEL_MOVING_AVERAGE => Ok(ModelKind::MovingAverage),
        other => Err(fail(DqStatus::Precondition, format!("unknown model {other}"))),
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), DqStatus> {
    if p.is_null() {
        Err(fail(DqStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn handle<'a>(h: *const DqTrajectory) -> Result<&'a DqTrajectory, DqStatus> {
    non_null(h, "trajectory")?;
    // SAFETY: non-null handles come from dq_simulate and are live until freed.
    Ok(unsafe { &*h })
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread; empty if none has failed.
#[no_mangle]
pub extern "C" fn dq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn dq_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Integrates one scenario on `[0, horizon]`.
///
/// `step <= 0` or NaN selects the default step. `phi` is either null (default
/// histories `1.1 q*`, `0.9 q*`) or points to two constant history values.
///
/// # Safety
/// `phi` must be null or valid for two reads; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn dq_simulate(
    model: u32,
    lambda: f64,
    mu: f64,
    delta: f64,
    horizon: f64,
    step: f64,
    phi: *const f64,
    out: *mut *mut DqTrajectory,
) -> DqStatus {
    guard(|| {
        non_null(out, "out")?;
        let kind = model_kind(model)?;
        let params = ModelParams::new(lambda, mu, delta).map_err(from_error)?;
        let phi = if phi.is_null() {
            models::default_histories(&params)
        } else {
            (*phi, *phi.add(1))
        };
        let step = (step > 0.0).then_some(step);
        let traj = models::simulate(kind, &params, phi, horizon, step).map_err(from_error)?;
        *out = Box::into_raw(Box::new(DqTrajectory { traj, params }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle from [`dq_simulate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dq_trajectory_free(h: *mut DqTrajectory) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of grid nodes, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dq_trajectory_node_count(h: *const DqTrajectory) -> usize {
    h.as_ref().map_or(0, |h| h.traj.node_count())
}

/// State dimension (2 or 4), or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dq_trajectory_dimension(h: *const DqTrajectory) -> usize {
    h.as_ref().map_or(0, |h| h.traj.dimension())
}

/// Effective step after lag alignment, or NaN for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dq_trajectory_step(h: *const DqTrajectory) -> f64 {
    h.as_ref().map_or(f64::NAN, |h| h.traj.step())
}

/// Copies node times and row-major states into caller buffers. `times`
/// needs `node_count` slots and `states` `node_count * dimension`; either
/// may be null to skip it.
///
/// # Safety
/// `h` must be a live handle and each non-null buffer valid for the given length.
#[no_mangle]
pub unsafe extern "C" fn dq_trajectory_copy(
    h: *const DqTrajectory,
    times: *mut f64,
    times_len: usize,
    states: *mut f64,
    states_len: usize,
) -> DqStatus {
    guard(|| {
        let h = handle(h)?;
        let n = h.traj.node_count();
        let d = h.traj.dimension();
        if (!times.is_null() && times_len < n) || (!states.is_null() && states_len < n * d) {
            return Err(fail(DqStatus::BufferTooSmall, format!("need {n} times and {} states", n * d)));
        }
        for (k, (t, x)) in h.traj.nodes().enumerate() {
            if !times.is_null() {
                *times.add(k) = t;
            }
            if !states.is_null() {
                ptr::copy_nonoverlapping(x.as_ptr(), states.add(k * d), d);
            }
        }
        Ok(())
    })
}

/// Dense-output state at `t` in `[-delta, horizon]`.
///
/// # Safety
/// `h` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn dq_trajectory_eval(h: *const DqTrajectory, t: f64, out: *mut f64, len: usize) -> DqStatus {
    guard(|| {
        let h = handle(h)?;
        non_null(out, "out")?;
        let d = h.traj.dimension();
        if len < d {
            return Err(fail(DqStatus::BufferTooSmall, format!("need {d} values")));
        }
        let slice = std::slice::from_raw_parts_mut(out, d);
        h.traj.eval_into(t, slice).map_err(from_error)
    })
}

/// Classifies the long-run regime with the default thresholds for the
/// scenario's equilibrium. `growing` may be null.
///
/// # Safety
/// `h` must be a live handle; `regime` and `amplitude` valid for one write;
/// `growing` null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn dq_classify(
    h: *const DqTrajectory,
    regime: *mut u32,
    amplitude: *mut f64,
    growing: *mut bool,
) -> DqStatus {
    guard(|| {
        let h = handle(h)?;
        non_null(regime, "regime")?;
        non_null(amplitude, "amplitude")?;
        let v = analysis::classify_stability(&h.traj, &ClassifyConfig::for_params(&h.params)).map_err(from_error)?;
        *regime = match v.regime {
            Regime::Synchronized => DQ_REGIME_SYNCHRONIZED,
            Regime::Oscillatory => DQ_REGIME_OSCILLATORY,
            Regime::Inconclusive => DQ_REGIME_INCONCLUSIVE,
        };
        *amplitude = v.amplitude;
        if !growing.is_null() {
            *growing = v.growing;
        }
        Ok(())
    })
}

/// Critical delay and Hopf frequency of the constant-delay model. Returns
/// [`DqStatus::NoHopf`] when `lambda <= 2 mu`.
///
/// # Safety
/// `delta_cr` and `omega` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn dq_critical_delay_constant(lambda: f64, mu: f64, delta_cr: *mut f64, omega: *mut f64) -> DqStatus {
    guard(|| {
        non_null(delta_cr, "delta_cr")?;
        non_null(omega, "omega")?;
        match stability::critical_delay_constant(lambda, mu).map_err(from_error)? {
            Some(p) => {
                *delta_cr = p.delta_cr;
                *omega = p.omega;
                Ok(())
            }
            None => Err(fail(DqStatus::NoHopf, format!("lambda = {lambda} <= 2 mu = {}", 2.0 * mu))),
        }
    })
}

/// Validated critical delays of the moving-average model in increasing
/// order. A NaN bound selects the default scan interval. `count` receives
/// the number of points found; if it exceeds `capacity` the first
/// `capacity` are written and [`DqStatus::BufferTooSmall`] is returned.
///
/// # Safety
/// `delta_cr` and `omega` must be valid for `capacity` writes (or null when
/// `capacity` is 0); `count` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn dq_critical_delay_ma(
    lambda: f64,
    mu: f64,
    bracket_lo: f64,
    bracket_hi: f64,
    delta_cr: *mut f64,
    omega: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> DqStatus {
    guard(|| {
        non_null(count, "count")?;
        if capacity > 0 {
            non_null(delta_cr, "delta_cr")?;
            non_null(omega, "omega")?;
        }
        let bracket = (!bracket_lo.is_nan() && !bracket_hi.is_nan()).then_some((bracket_lo, bracket_hi));
        let points = stability::critical_delay_ma(lambda, mu, bracket).map_err(from_error)?;
        *count = points.len();
        for (k, p) in points.iter().take(capacity).enumerate() {
            *delta_cr.add(k) = p.delta_cr;
            *omega.add(k) = p.omega;
        }
        if points.len() > capacity {
            return Err(fail(DqStatus::BufferTooSmall, format!("{} points, capacity {capacity}", points.len())));
        }
        Ok(())
    })
}

/// Newton refinement of a characteristic root from `seed`.
///
/// # Safety
/// `re` and `im` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn dq_root_track(
    model: u32,
    lambda: f64,
    mu: f64,
    delta: f64,
    seed_re: f64,
    seed_im: f64,
    re: *mut f64,
    im: *mut f64,
) -> DqStatus {
    guard(|| {
        non_null(re, "re")?;
        non_null(im, "im")?;
        let kind = model_kind(model)?;
        let r = stability::root_track(kind, lambda, mu, delta, Complex64::new(seed_re, seed_im)).map_err(from_error)?;
        *re = r.re;
        *im = r.im;
        Ok(())
    })
}

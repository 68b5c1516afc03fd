//! C ABI for the core laboratory: opaque problem handles, status codes, and
//! a thread-local last-error message. Every function is
//! `#[no_mangle] extern "C"`; the matching header is generated into
//! `include/rotolab.h` at build time.
//!
//! Conventions: functions that can fail return [`RlStatus`]; out-parameters
//! are written only on `RL_STATUS_OK`; handles are freed exactly once with
//! their `_free` function; passing NULL where a handle or buffer is expected
//! yields `RL_STATUS_INVALID_ARGUMENT`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use libc::{c_char, c_double, size_t};

use rotolab::error::Error;
use rotolab::oracle::{CircuitCost, NoiseMode, Oracle, OracleConfig};
use rotolab::optim::{self, OptimizerConfig, OptimizerKind};
use rotolab::qsim::{self, Problem};
use rotolab::trig;
use rotolab::verify::{self, BudgetRegime};

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlStatus {
    RlStatusOk = 0,
    RlStatusInvalidArgument = 1,
    RlStatusParseError = 2,
    RlStatusIoError = 3,
    RlStatusNumericalError = 4,
    RlStatusUnsupported = 5,
}

fn status_of(err: &Error) -> RlStatus {
    match err {
        Error::Parse { .. } => RlStatus::RlStatusParseError,
        Error::Io(_) => RlStatus::RlStatusIoError,
        Error::UnsupportedNoiseMode { .. } => RlStatus::RlStatusUnsupported,
        Error::FlatDirection | Error::NotUnitary { .. } | Error::NonHermitian { .. } => {
            RlStatus::RlStatusNumericalError
        }
        _ => RlStatus::RlStatusInvalidArgument,
    }
}

fn fail(err: Error) -> RlStatus {
    let code = status_of(&err);
    set_error(&err.to_string());
    code
}

fn invalid(msg: &str) -> RlStatus {
    set_error(msg);
    RlStatus::RlStatusInvalidArgument
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Opaque handle to a parsed circuit/observable pair.
pub struct RlProblem {
    inner: Problem,
}

/// Noise configuration for the measurement oracle. `kind` 0 = exact
/// (sigma/shots ignored), 1 = Gaussian with standard deviation `sigma`,
/// 2 = finite shots with `shots` samples per evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RlNoise {
    pub kind: u32,
    pub sigma: c_double,
    pub shots: u64,
}

fn noise_mode(noise: &RlNoise) -> Result<NoiseMode, RlStatus> {
    match noise.kind {
        0 => Ok(NoiseMode::Exact),
        1 => Ok(NoiseMode::Gaussian(noise.sigma)),
        2 => Ok(NoiseMode::Shots(noise.shots)),
        k => Err(invalid(&format!("unknown noise kind {k}"))),
    }
}

/// Per-coordinate sinusoid fit plus first/second derivatives.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RlFit {
    pub amplitude: c_double,
    pub phase: c_double,
    pub offset: c_double,
    pub gradient: c_double,
    pub second_derivative: c_double,
}

unsafe fn theta_slice<'a>(theta: *const c_double, len: size_t) -> Result<&'a [f64], RlStatus> {
    if theta.is_null() && len > 0 {
        return Err(invalid("theta must not be NULL"));
    }
    Ok(std::slice::from_raw_parts(theta, len))
}

unsafe fn problem_ref<'a>(problem: *const RlProblem) -> Result<&'a RlProblem, RlStatus> {
    problem
        .as_ref()
        .ok_or_else(|| invalid("problem handle must not be NULL"))
}

/// Parses a problem description (circuit + observable) from text.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_problem_parse(
    text: *const c_char,
    out: *mut *mut RlProblem,
) -> RlStatus {
    if text.is_null() || out.is_null() {
        return invalid("text and out must not be NULL");
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        return invalid("text must be valid UTF-8");
    };
    match qsim::parse_problem(text) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(RlProblem { inner }));
            RlStatus::RlStatusOk
        }
        Err(e) => fail(e),
    }
}

/// Loads a problem description from a file path.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_problem_load(
    path: *const c_char,
    out: *mut *mut RlProblem,
) -> RlStatus {
    if path.is_null() || out.is_null() {
        return invalid("path and out must not be NULL");
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return invalid("path must be valid UTF-8");
    };
    match qsim::load_problem(Path::new(path)) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(RlProblem { inner }));
            RlStatus::RlStatusOk
        }
        Err(e) => fail(e),
    }
}

/// Releases a problem handle. NULL is a no-op.
///
/// # Safety
/// `problem` must have come from `rl_problem_parse`/`rl_problem_load` and
/// must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rl_problem_free(problem: *mut RlProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of trainable parameters of the problem's circuit.
///
/// # Safety
/// `problem` must be a live handle; returns 0 on NULL.
#[no_mangle]
pub unsafe extern "C" fn rl_problem_param_dim(problem: *const RlProblem) -> size_t {
    problem.as_ref().map_or(0, |p| p.inner.circuit.param_dim())
}

/// Number of qubits of the problem's circuit.
///
/// # Safety
/// `problem` must be a live handle; returns 0 on NULL.
#[no_mangle]
pub unsafe extern "C" fn rl_problem_qubit_count(problem: *const RlProblem) -> size_t {
    problem.as_ref().map_or(0, |p| p.inner.circuit.qubit_count())
}

/// Noise-free objective value at `theta`.
///
/// # Safety
/// `theta` must point to `len` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_objective(
    problem: *const RlProblem,
    theta: *const c_double,
    len: size_t,
    out: *mut c_double,
) -> RlStatus {
    let p = match problem_ref(problem) {
        Ok(p) => p,
        Err(s) => return s,
    };
    if out.is_null() {
        return invalid("out must not be NULL");
    }
    let theta = match theta_slice(theta, len) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match qsim::objective(&p.inner.circuit, &p.inner.observable, theta) {
        Ok(f) => {
            *out = f;
            RlStatus::RlStatusOk
        }
        Err(e) => fail(e),
    }
}

/// Fits the univariate sinusoid along coordinate `j` at `theta` (noise-free)
/// and returns amplitude, phase, offset, and both derivatives.
///
/// # Safety
/// `theta` must point to `len` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_coordinate(
    problem: *const RlProblem,
    theta: *const c_double,
    len: size_t,
    j: size_t,
    out: *mut RlFit,
) -> RlStatus {
    let p = match problem_ref(problem) {
        Ok(p) => p,
        Err(s) => return s,
    };
    if out.is_null() {
        return invalid("out must not be NULL");
    }
    let theta = match theta_slice(theta, len) {
        Ok(t) => t,
        Err(s) => return s,
    };
    if j >= p.inner.circuit.param_dim() {
        return invalid("coordinate index out of range");
    }
    let mut oracle = match Oracle::new(OracleConfig::exact()) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let cost = CircuitCost::new(&p.inner.circuit, &p.inner.observable);
    let fit = match trig::fit_univariate_cost(&cost, theta, j, &mut oracle) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let (a, b, _) = fit.raw;
    *out = RlFit {
        amplitude: fit.amplitude,
        phase: fit.phase,
        offset: fit.offset,
        gradient: 0.5 * b,
        second_derivative: -0.5 * a,
    };
    RlStatus::RlStatusOk
}

/// Runs an optimizer and reports the final parameters, the final noise-free
/// objective value, and (optionally) the per-iteration objective series.
///
/// `optimizer`: 0 = coordinate minimization, 1 = RCD, 2 = SGD, 3 = SPSA,
/// 4 = RSGF. `alpha`/`c_nu` configure the baselines and are ignored by
/// coordinate minimization. `f_series`, when non-NULL, receives up to
/// `f_capacity` values (iterate 0 first); `f_written` reports the count.
///
/// # Safety
/// All pointers must be valid for their stated lengths; `theta0` and
/// `final_theta` must both hold `len` doubles.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn rl_optimize(
    problem: *const RlProblem,
    optimizer: u32,
    alpha: c_double,
    c_nu: c_double,
    iterations: size_t,
    seed: u64,
    noise: RlNoise,
    theta0: *const c_double,
    len: size_t,
    final_theta: *mut c_double,
    final_f: *mut c_double,
    f_series: *mut c_double,
    f_capacity: size_t,
    f_written: *mut size_t,
) -> RlStatus {
    let p = match problem_ref(problem) {
        Ok(p) => p,
        Err(s) => return s,
    };
    if final_theta.is_null() || final_f.is_null() {
        return invalid("final_theta and final_f must not be NULL");
    }
    let theta0 = match theta_slice(theta0, len) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let kind = match optimizer {
        0 => OptimizerKind::Rotosolve,
        1 => OptimizerKind::Rcd { alpha },
        2 => OptimizerKind::Sgd { alpha },
        3 => OptimizerKind::Spsa { alpha, c: c_nu },
        4 => OptimizerKind::Rsgf { alpha, nu: c_nu },
        k => return invalid(&format!("unknown optimizer {k}")),
    };
    let mode = match noise_mode(&noise) {
        Ok(m) => m,
        Err(s) => return s,
    };
    let cost = CircuitCost::new(&p.inner.circuit, &p.inner.observable);
    let trace = match optim::run(
        &OptimizerConfig {
            kind,
            iterations,
            seed,
            max_executions: None,
        },
        &cost,
        theta0,
        mode,
    ) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let theta = trace.final_theta();
    ptr::copy_nonoverlapping(theta.as_ptr(), final_theta, theta.len());
    *final_f = trace.final_f();
    if !f_series.is_null() {
        let n = trace.records.len().min(f_capacity);
        for (i, r) in trace.records.iter().take(n).enumerate() {
            *f_series.add(i) = r.f_exact;
        }
        if !f_written.is_null() {
            *f_written = n;
        }
    } else if !f_written.is_null() {
        *f_written = 0;
    }
    RlStatus::RlStatusOk
}

/// Shot budget to reach accuracy `eps`: iteration count, shots per
/// evaluation, and the total (three evaluations per iteration). `mu` is
/// only used when `suboptimal` is nonzero.
///
/// # Safety
/// The three out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_shot_budget(
    eps: c_double,
    d: size_t,
    lambda_max: c_double,
    lambda_bar: c_double,
    delta0: c_double,
    suboptimal: u32,
    mu: c_double,
    out_iterations: *mut u64,
    out_shots_per_iter: *mut u64,
    out_total_shots: *mut u64,
) -> RlStatus {
    if out_iterations.is_null() || out_shots_per_iter.is_null() || out_total_shots.is_null() {
        return invalid("out pointers must not be NULL");
    }
    let regime = if suboptimal != 0 {
        BudgetRegime::Suboptimal { mu }
    } else {
        BudgetRegime::Stationary
    };
    match verify::shot_budget(eps, d, lambda_max, lambda_bar, delta0, regime) {
        Ok(b) => {
            *out_iterations = b.iterations;
            *out_shots_per_iter = b.shots_per_iter;
            *out_total_shots = b.total_shots;
            RlStatus::RlStatusOk
        }
        Err(e) => fail(e),
    }
}

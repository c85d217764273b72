//! C ABI for `lps-core`.
//!
//! Every function returns an [`LpsStatus`]. On failure the message is kept
//! per thread and read with [`lps_last_error_message`]. Scenarios are opaque
//! handles created from JSON and released with [`lps_scenario_free`].
//! Output arrays are caller-owned; their length is passed alongside.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lps_core::analytic::{self, ServiceRateProfile};
use lps_core::harness::{self, Formula, RunParams, Scenario};
use lps_core::simulator::run_coupled;
use lps_core::stochastic::ArrivalRates;
use lps_core::Error;

pub const LPS_FORMULA_LIMITED_PS: u32 = 0;
pub const LPS_FORMULA_EGALITARIAN_LOSS: u32 = 1;
pub const LPS_FORMULA_FCFD_CONSTANT: u32 = 2;
pub const LPS_FORMULA_ZERO_INFLATED_FCFD: u32 = 3;
pub const LPS_FORMULA_ERLANG_B: u32 = 4;
pub const LPS_FORMULA_NSERVER_TAIL: u32 = 5;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Inadmissible = 4,
    BufferTooSmall = 5,
    Numerical = 6,
    Simulation = 7,
    CouplingViolation = 8,
    Panic = 9,
}

/// Opaque scenario handle.
pub struct LpsScenario {
    inner: Scenario,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LpsSimSummary {
    pub arrivals: u64,
    pub served: u64,
    pub displaced: u64,
    pub blocked: u64,
    pub loss_prob: f64,
    pub loss_ci_half: f64,
    pub mean_jobs: f64,
    pub sojourn: f64,
    pub measured_time: f64,
    pub idle_periods: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LpsStatus {
    match e {
        Error::InvalidParameter { .. } => LpsStatus::InvalidArgument,
        Error::Config { .. } => LpsStatus::Config,
        Error::Inadmissible { .. } => LpsStatus::Inadmissible,
        Error::NonNormalizable(_) | Error::Singular(_) => LpsStatus::Numerical,
        Error::Coupling { .. } => LpsStatus::CouplingViolation,
        _ => LpsStatus::Simulation,
    }
}

struct Fail(LpsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LpsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LpsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LpsStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(LpsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(p: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn write_slice(p: *mut f64, len: usize, values: &[f64], what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    if len < values.len() {
        return Err(Fail(
            LpsStatus::BufferTooSmall,
            format!("{what} holds {len} values, {} needed", values.len()),
        ));
    }
    std::slice::from_raw_parts_mut(p, values.len()).copy_from_slice(values);
    Ok(())
}

fn formula(code: u32) -> Result<Formula, Fail> {
    Ok(match code {
        LPS_FORMULA_LIMITED_PS => Formula::LimitedPs,
        LPS_FORMULA_EGALITARIAN_LOSS => Formula::EgalitarianLoss,
        LPS_FORMULA_FCFD_CONSTANT => Formula::FcfdConstant,
        LPS_FORMULA_ZERO_INFLATED_FCFD => Formula::ZeroInflatedFcfd,
        LPS_FORMULA_ERLANG_B => Formula::ErlangB,
        LPS_FORMULA_NSERVER_TAIL => Formula::NserverTail,
        other => {
            return Err(Fail(
                LpsStatus::InvalidArgument,
                format!("unknown formula code {other}"),
            ))
        }
    })
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn lps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a scenario document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn lps_scenario_from_json(
    json: *const c_char,
    out: *mut *mut LpsScenario,
) -> LpsStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail(LpsStatus::Config, format!("scenario is not UTF-8: {e}")))?;
        let inner = Scenario::parse(text, "<json>")?;
        out.write(Box::into_raw(Box::new(LpsScenario { inner })));
        Ok(())
    })
}

/// Releases a scenario. Null is ignored.
///
/// # Safety
/// `scenario` must come from [`lps_scenario_from_json`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn lps_scenario_free(scenario: *mut LpsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Capacity `n`; the state distribution has `n + 1` entries.
///
/// # Safety
/// `scenario` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn lps_scenario_capacity(scenario: *const LpsScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.inner.spec.n)
}

/// Evaluates one closed form for the scenario. `probs` may be null when only
/// the loss is wanted; formulas without a distribution leave it untouched.
///
/// # Safety
/// Pointers must be valid; `probs` must hold `probs_len` values.
#[no_mangle]
pub unsafe extern "C" fn lps_scenario_evaluate(
    scenario: *const LpsScenario,
    formula_code: u32,
    probs: *mut f64,
    probs_len: usize,
    loss: *mut f64,
) -> LpsStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let r = s.inner.evaluate(formula(formula_code)?)?;
        if let (Some(d), false) = (&r.distribution, probs.is_null()) {
            write_slice(probs, probs_len, &d.p, "probs")?;
        }
        write_out(loss, r.loss, "loss")
    })
}

/// Simulates the scenario. `occupancy` receives the `n + 1` time-average
/// level probabilities and may be null.
///
/// # Safety
/// Pointers must be valid; `occupancy` must hold `occupancy_len` values.
#[no_mangle]
pub unsafe extern "C" fn lps_scenario_simulate(
    scenario: *const LpsScenario,
    horizon: u64,
    warmup: u64,
    seed: u64,
    replications: u64,
    summary: *mut LpsSimSummary,
    occupancy: *mut f64,
    occupancy_len: usize,
) -> LpsStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        if summary.is_null() {
            return Err(null("summary"));
        }
        let params = RunParams {
            horizon,
            warmup,
            replications: replications.max(1),
            seed,
        };
        let est = harness::simulate(&s.inner, &params, false)?;
        if !occupancy.is_null() {
            write_slice(occupancy, occupancy_len, &est.occupancy, "occupancy")?;
        }
        let c = &est.counts;
        summary.write(LpsSimSummary {
            arrivals: c.arrivals,
            served: c.served,
            displaced: c.displaced,
            blocked: c.blocked,
            loss_prob: est.loss_prob,
            loss_ci_half: est.loss_ci_half,
            mean_jobs: est.mean_jobs,
            sojourn: est.sojourn_all,
            measured_time: est.measured_time,
            idle_periods: est.idle_periods.len() as u64,
        });
        Ok(())
    })
}

/// Runs the limited system and its unlimited twin on one input path for
/// `horizon` arrivals. Returns `CouplingViolation` if the sample-path
/// relation breaks; the message then holds the offending event window.
///
/// # Safety
/// `scenario` must be a live handle; `checks` may be null.
#[no_mangle]
pub unsafe extern "C" fn lps_scenario_couple(
    scenario: *const LpsScenario,
    horizon: u64,
    seed: u64,
    checks: *mut u64,
) -> LpsStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let r = run_coupled(&s.inner.spec, horizon, seed)?;
        if !checks.is_null() {
            checks.write(r.checks);
        }
        Ok(())
    })
}

/// Loss of the egalitarian SRL system with constant input.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lps_egalitarian_loss(
    n: usize,
    lambda: f64,
    b: f64,
    out: *mut f64,
) -> LpsStatus {
    guard(|| write_out(out, analytic::egalitarian_loss(n, lambda, b)?, "out"))
}

/// Erlang's loss formula for `n` servers and offered load `rho`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lps_erlang_b(n: usize, rho: f64, out: *mut f64) -> LpsStatus {
    guard(|| write_out(out, analytic::erlang_b(n, rho)?, "out"))
}

/// Loss of the FCFD system with constant lengths and unit rates.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lps_fcfd_constant_loss(
    n: usize,
    lambda: f64,
    b: f64,
    out: *mut f64,
) -> LpsStatus {
    guard(|| write_out(out, analytic::fcfd_constant_loss(n, lambda, b)?, "out"))
}

unsafe fn shapes(
    rates: *const f64,
    service: *const f64,
    n: usize,
) -> Result<(ArrivalRates, ServiceRateProfile), Fail> {
    let lambdas = slice(rates, n + 1, "rates")?.to_vec();
    let c = slice(service, n, "service")?.to_vec();
    Ok((ArrivalRates::new(lambdas)?, ServiceRateProfile::new(c)?))
}

/// State distribution of the limited SRL system. `rates` holds the `n + 1`
/// arrival rates, `service` the `n` per-job rates, `out` receives `n + 1`
/// probabilities.
///
/// # Safety
/// Arrays must have the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn lps_limited_ps_probs(
    n: usize,
    rates: *const f64,
    b: f64,
    service: *const f64,
    out: *mut f64,
    out_len: usize,
) -> LpsStatus {
    guard(|| {
        let (r, c) = shapes(rates, service, n)?;
        let d = analytic::limited_ps_probs(n, &r, b, &c)?;
        write_slice(out, out_len, &d.p, "out")
    })
}

/// State distribution of the FCFD system with zero-inflated exponential
/// lengths. Array conventions as in [`lps_limited_ps_probs`].
///
/// # Safety
/// Arrays must have the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn lps_zero_inflated_fcfd_probs(
    n: usize,
    rates: *const f64,
    alpha: f64,
    mu: f64,
    service: *const f64,
    out: *mut f64,
    out_len: usize,
) -> LpsStatus {
    guard(|| {
        let (r, c) = shapes(rates, service, n)?;
        let d = analytic::zero_inflated_fcfd_probs(n, &r, alpha, mu, &c)?;
        write_slice(out, out_len, &d.p, "out")
    })
}

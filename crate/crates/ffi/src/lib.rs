//! C ABI over `chernoff_dp`.
//!
//! Every function returns a [`CdpStatus`] and writes results through out
//! pointers. On failure, [`cdp_last_error_message`] describes the error for
//! the calling thread. Panics are caught at the boundary and reported as
//! [`CdpStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use chernoff_dp::classify::{estimate_error_rates, MonteCarlo};
use chernoff_dp::divergences::{chernoff_laplace_closed_form, chernoff_numeric, kl_laplace_closed_form, kl_numeric};
use chernoff_dp::dp_bounds::{
    alpha_star_ub, chernoff_ub_from_epsilon, compose_budgets, epsilon_dp_level, kl_bound_from_epsilon, EvalGrid, Expansion,
    PrivacyBudget,
};
use chernoff_dp::mechanism::{scenario_to_hypotheses, AttackScenario};
use chernoff_dp::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdpStatus {
    Ok = 0,
    /// Argument outside the mathematical domain.
    Domain = 1,
    Config = 2,
    NonConvergence = 3,
    Io = 4,
    /// A density vanished where it must not (undefined ratio, absolute continuity).
    Undefined = 5,
    NullPointer = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdpExpansion {
    QBased = 0,
    PBased = 1,
}

/// Opaque attack scenario.
pub struct CdpScenario {
    inner: AttackScenario,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CdpErrorRates {
    pub m: u64,
    pub trials: u64,
    pub false_alarms: u64,
    pub misses: u64,
    pub p_fa: f64,
    pub p_miss: f64,
    pub p_e: f64,
    pub ci_radius: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CdpStatus {
    match e {
        Error::NonConvergence { .. } => CdpStatus::NonConvergence,
        Error::Config(_) | Error::Parse { .. } => CdpStatus::Config,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => CdpStatus::Io,
        Error::UndefinedRatio { .. } | Error::AbsoluteContinuity { .. } | Error::ZeroDensity { .. } => CdpStatus::Undefined,
        _ => CdpStatus::Domain,
    }
}

struct NullPointer(&'static str);

enum Failure {
    Lib(Error),
    Null(NullPointer),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<NullPointer> for Failure {
    fn from(e: NullPointer) -> Self {
        Failure::Null(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> CdpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CdpStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(NullPointer(name)))) => {
            set_last_error(format!("{name} must not be null"));
            CdpStatus::NullPointer
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            CdpStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(ptr: *mut T, name: &'static str) -> Result<&'a mut T, NullPointer> {
    ptr.as_mut().ok_or(NullPointer(name))
}

unsafe fn scenario<'a>(ptr: *const CdpScenario) -> Result<&'a AttackScenario, NullPointer> {
    ptr.as_ref().map(|s| &s.inner).ok_or(NullPointer("scenario"))
}

/// Message for the last failed call on this thread, or null after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cdp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cdp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a scenario: null `Lap(0, s/eps)` against `Lap(delta_mu, theta s/eps)`.
/// Free it with [`cdp_scenario_free`].
///
/// # Safety
/// `out_scenario` must be null or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn cdp_scenario_new(
    epsilon: f64,
    sensitivity: f64,
    delta_mu: f64,
    theta: f64,
    prior_alpha: f64,
    out_scenario: *mut *mut CdpScenario,
) -> CdpStatus {
    guard(|| {
        let slot = out(out_scenario, "out_scenario")?;
        let inner = AttackScenario::new(epsilon, sensitivity, delta_mu, theta, prior_alpha)?;
        *slot = Box::into_raw(Box::new(CdpScenario { inner }));
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a pointer returned by [`cdp_scenario_new`]
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn cdp_scenario_free(scenario: *mut CdpScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Closed-form `D(null || alternative)`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn cdp_kl_closed_form(scenario_ptr: *const CdpScenario, out_value: *mut f64) -> CdpStatus {
    guard(|| {
        let s = scenario(scenario_ptr)?;
        *out(out_value, "out_value")? = kl_laplace_closed_form(s)?.value;
        Ok(())
    })
}

/// Closed-form Laplace Chernoff expression `x - log(1 + x)`, `x = |dmu|/(theta b)`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn cdp_chernoff_closed_form(scenario_ptr: *const CdpScenario, out_value: *mut f64) -> CdpStatus {
    guard(|| {
        let s = scenario(scenario_ptr)?;
        *out(out_value, "out_value")? = chernoff_laplace_closed_form(s)?.value;
        Ok(())
    })
}

/// `D(null || alternative)` by quadrature.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn cdp_kl_numeric(scenario_ptr: *const CdpScenario, tol: f64, out_value: *mut f64) -> CdpStatus {
    guard(|| {
        let s = scenario(scenario_ptr)?;
        let slot = out(out_value, "out_value")?;
        let (p, q) = scenario_to_hypotheses(s)?;
        *slot = kl_numeric(&p, &q, tol)?.value;
        Ok(())
    })
}

/// Chernoff information by quadrature and golden-section search.
/// `out_alpha_star` may be null.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn cdp_chernoff_numeric(
    scenario_ptr: *const CdpScenario,
    tol: f64,
    out_value: *mut f64,
    out_alpha_star: *mut f64,
) -> CdpStatus {
    guard(|| {
        let s = scenario(scenario_ptr)?;
        let slot = out(out_value, "out_value")?;
        let (p, q) = scenario_to_hypotheses(s)?;
        let r = chernoff_numeric(&p, &q, tol)?;
        *slot = r.value;
        if let Some(a) = out_alpha_star.as_mut() {
            *a = r.alpha_star.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Sup of the absolute log-ratio of the scenario densities; `INFINITY` when unbounded.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn cdp_epsilon_dp_level(scenario_ptr: *const CdpScenario, out_value: *mut f64) -> CdpStatus {
    guard(|| {
        let s = scenario(scenario_ptr)?;
        let slot = out(out_value, "out_value")?;
        let (p, q) = scenario_to_hypotheses(s)?;
        *slot = epsilon_dp_level(&p, &q, &EvalGrid::for_pair(&p, &q));
        Ok(())
    })
}

/// Largest KL divergence between two eps-close measures.
///
/// # Safety
/// `out_value` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn cdp_kl_bound(epsilon: f64, out_value: *mut f64) -> CdpStatus {
    guard(|| {
        *out(out_value, "out_value")? = kl_bound_from_epsilon(epsilon)?;
        Ok(())
    })
}

/// Closed-form Chernoff upper bound, for `epsilon` in (0, 1).
///
/// # Safety
/// `out_value` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn cdp_chernoff_ub(epsilon: f64, out_value: *mut f64) -> CdpStatus {
    guard(|| {
        *out(out_value, "out_value")? = chernoff_ub_from_epsilon(epsilon)?;
        Ok(())
    })
}

/// Optimal prior of the bounded Chernoff objective, confined to (0, 1].
/// `out_clamped` may be null.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn cdp_alpha_star(
    epsilon: f64,
    expansion: CdpExpansion,
    out_value: *mut f64,
    out_clamped: *mut bool,
) -> CdpStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        let e = match expansion {
            CdpExpansion::QBased => Expansion::QBased,
            CdpExpansion::PBased => Expansion::PBased,
        };
        let a = alpha_star_ub(epsilon, e)?;
        *slot = a.value;
        if let Some(c) = out_clamped.as_mut() {
            *c = a.clamped;
        }
        Ok(())
    })
}

/// Sequential composition of `n` budgets given as parallel arrays.
///
/// # Safety
/// `epsilons` and `deltas` must point to `n` readable values (or be null when
/// `n` is 0); the out pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn cdp_compose(
    epsilons: *const f64,
    deltas: *const f64,
    n: usize,
    out_epsilon: *mut f64,
    out_delta: *mut f64,
) -> CdpStatus {
    guard(|| {
        let oe = out(out_epsilon, "out_epsilon")?;
        let od = out(out_delta, "out_delta")?;
        let budgets = if n == 0 {
            Vec::new()
        } else {
            if epsilons.is_null() {
                return Err(NullPointer("epsilons").into());
            }
            if deltas.is_null() {
                return Err(NullPointer("deltas").into());
            }
            let e = std::slice::from_raw_parts(epsilons, n);
            let d = std::slice::from_raw_parts(deltas, n);
            e.iter().zip(d).map(|(e, d)| PrivacyBudget::new(*e, *d)).collect::<Result<Vec<_>, _>>()?
        };
        let total = compose_budgets(&budgets);
        *oe = total.epsilon;
        *od = total.delta;
        Ok(())
    })
}

/// Monte Carlo error rates of the likelihood-ratio test with `m` observations.
/// Fixed `seed` and `shards` reproduce the result exactly.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn cdp_error_rates(
    scenario_ptr: *const CdpScenario,
    m: u64,
    trials: u64,
    seed: u64,
    shards: u64,
    out_rates: *mut CdpErrorRates,
) -> CdpStatus {
    guard(|| {
        let s = scenario(scenario_ptr)?;
        let slot = out(out_rates, "out_rates")?;
        let mc = MonteCarlo::new(seed, shards as usize)?;
        let r = estimate_error_rates(s, m as usize, trials as usize, &mc)?;
        *slot = CdpErrorRates {
            m: r.m as u64,
            trials: r.trials as u64,
            false_alarms: r.false_alarms,
            misses: r.misses,
            p_fa: r.p_fa,
            p_miss: r.p_miss,
            p_e: r.p_e,
            ci_radius: r.ci_radius,
        };
        Ok(())
    })
}

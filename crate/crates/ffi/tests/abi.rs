use std::ffi::CStr;
use std::ptr;

use chernoff_dp_ffi::*;

fn last_error() -> String {
    let p = cdp_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn scenario(eps: f64, dmu: f64, theta: f64) -> *mut CdpScenario {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cdp_scenario_new(eps, 1.0, dmu, theta, 0.5, &mut s) }, CdpStatus::Ok);
    assert!(!s.is_null());
    s
}

#[test]
fn divergences_through_handle() {
    let s = scenario(1.0, 1.0, 1.0);
    let (mut kl, mut kl_num, mut c, mut a, mut closed, mut level) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(cdp_kl_closed_form(s, &mut kl), CdpStatus::Ok);
        assert_eq!(cdp_kl_numeric(s, 1e-10, &mut kl_num), CdpStatus::Ok);
        assert_eq!(cdp_chernoff_numeric(s, 1e-10, &mut c, &mut a), CdpStatus::Ok);
        assert_eq!(cdp_chernoff_numeric(s, 1e-10, &mut c, ptr::null_mut()), CdpStatus::Ok);
        assert_eq!(cdp_chernoff_closed_form(s, &mut closed), CdpStatus::Ok);
        assert_eq!(cdp_epsilon_dp_level(s, &mut level), CdpStatus::Ok);
        cdp_scenario_free(s);
    }
    assert!((kl - (-1.0f64).exp()).abs() < 1e-12);
    assert!((kl_num - kl).abs() < 1e-8);
    assert!((c - (0.5 - 1.5f64.ln())).abs() < 1e-6);
    assert!((a - 0.5).abs() < 1e-3);
    assert!((closed - (1.0 - 2.0f64.ln())).abs() < 1e-12);
    assert!((level - 1.0).abs() < 1e-9);
    assert!(cdp_last_error_message().is_null());
}

#[test]
fn unbounded_level_for_rescaled_noise() {
    let s = scenario(1.0, 1.0, 2.0);
    let mut level = 0.0;
    unsafe {
        assert_eq!(cdp_epsilon_dp_level(s, &mut level), CdpStatus::Ok);
        cdp_scenario_free(s);
    }
    assert_eq!(level, f64::INFINITY);
}

#[test]
fn bounds_and_alpha() {
    let (mut kl, mut ub, mut a, mut clamped) = (0.0, 0.0, 0.0, false);
    unsafe {
        assert_eq!(cdp_kl_bound(1.0, &mut kl), CdpStatus::Ok);
        assert_eq!(cdp_chernoff_ub(0.5, &mut ub), CdpStatus::Ok);
        assert_eq!(cdp_alpha_star(0.5, CdpExpansion::PBased, &mut a, &mut clamped), CdpStatus::Ok);
    }
    assert!((kl - 0.46212).abs() < 1e-5);
    assert!((ub - 1.34107).abs() < 1e-5);
    assert_eq!((a, clamped), (1.0, true));
    unsafe {
        assert_eq!(cdp_alpha_star(0.5, CdpExpansion::QBased, &mut a, ptr::null_mut()), CdpStatus::Ok);
    }
    assert!((a - 0.09861).abs() < 1e-5);
}

#[test]
fn composition() {
    let e = [1.0, 0.5, 0.25];
    let d = [0.0, 1e-5, 0.0];
    let (mut te, mut td) = (0.0, 0.0);
    assert_eq!(unsafe { cdp_compose(e.as_ptr(), d.as_ptr(), 3, &mut te, &mut td) }, CdpStatus::Ok);
    assert_eq!((te, td), (1.75, 1e-5));
    assert_eq!(unsafe { cdp_compose(ptr::null(), ptr::null(), 0, &mut te, &mut td) }, CdpStatus::Ok);
    assert_eq!((te, td), (0.0, 0.0));
    assert_eq!(unsafe { cdp_compose(ptr::null(), d.as_ptr(), 2, &mut te, &mut td) }, CdpStatus::NullPointer);
}

#[test]
fn error_rates_are_reproducible() {
    let s = scenario(1.0, 1.0, 1.0);
    let (mut a, mut b) = (CdpErrorRates::default(), CdpErrorRates::default());
    unsafe {
        assert_eq!(cdp_error_rates(s, 3, 5000, 9, 4, &mut a), CdpStatus::Ok);
        assert_eq!(cdp_error_rates(s, 3, 5000, 9, 4, &mut b), CdpStatus::Ok);
        assert_eq!(cdp_error_rates(s, 3, 10, 9, 4, &mut b), CdpStatus::Domain);
        cdp_scenario_free(s);
    }
    assert!(last_error().contains("trials"));
    assert_eq!(a.trials, 5000);
    assert_eq!(a.false_alarms + a.misses, ((a.p_fa + a.p_miss) * 5000.0).round() as u64);
    let mut c = CdpErrorRates::default();
    let s = scenario(1.0, 1.0, 1.0);
    unsafe {
        cdp_error_rates(s, 3, 5000, 9, 4, &mut c);
        cdp_scenario_free(s);
    }
    assert_eq!(a, c);
}

#[test]
fn errors_set_status_and_message() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cdp_scenario_new(0.0, 1.0, 1.0, 1.0, 0.5, &mut s) }, CdpStatus::Domain);
    assert!(s.is_null());
    assert!(last_error().contains("epsilon"));
    let mut v = 0.0;
    assert_eq!(unsafe { cdp_kl_closed_form(ptr::null(), &mut v) }, CdpStatus::NullPointer);
    assert!(last_error().contains("scenario"));
    assert_eq!(unsafe { cdp_chernoff_ub(1.5, &mut v) }, CdpStatus::Domain);
    assert_eq!(unsafe { cdp_kl_bound(1.0, ptr::null_mut()) }, CdpStatus::NullPointer);
    let sc = scenario(1.0, 1.0, 1.0);
    // tolerance must be positive
    assert_eq!(unsafe { cdp_kl_numeric(sc, -1.0, &mut v) }, CdpStatus::Domain);
    unsafe { cdp_scenario_free(sc) };
    unsafe { cdp_scenario_free(ptr::null_mut()) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(cdp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

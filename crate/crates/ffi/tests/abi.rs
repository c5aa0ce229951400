use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use delayq_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(dq_last_error()) }.to_string_lossy().into_owned()
}

fn simulate(model: u32, lambda: f64, mu: f64, delta: f64, horizon: f64, phi: Option<[f64; 2]>) -> *mut DqTrajectory {
    let mut h = ptr::null_mut();
    let phi_ptr = phi.as_ref().map_or(ptr::null(), |p| p.as_ptr());
    let status = unsafe { dq_simulate(model, lambda, mu, delta, horizon, 0.0, phi_ptr, &mut h) };
    assert_eq!(status, DqStatus::Ok, "{}", last_error());
    h
}

#[test]
fn constant_threshold() {
    let (mut d, mut w) = (0.0, 0.0);
    assert_eq!(unsafe { dq_critical_delay_constant(10.0, 1.0, &mut d, &mut w) }, DqStatus::Ok);
    assert!((d - 0.3617).abs() < 1e-3);
    assert!((w - 24f64.sqrt()).abs() < 1e-12);
    assert_eq!(unsafe { dq_critical_delay_constant(1.0, 1.0, &mut d, &mut w) }, DqStatus::NoHopf);
    assert_eq!(unsafe { dq_critical_delay_constant(-1.0, 1.0, &mut d, &mut w) }, DqStatus::Precondition);
    assert!(last_error().contains("lambda"));
}

#[test]
fn moving_average_thresholds_report_count() {
    let mut count = 0usize;
    let status = unsafe { dq_critical_delay_ma(10.0, 1.0, f64::NAN, f64::NAN, ptr::null_mut(), ptr::null_mut(), 0, &mut count) };
    assert_eq!(status, DqStatus::BufferTooSmall);
    assert!(count >= 1);
    let mut d = vec![0.0; count];
    let mut w = vec![0.0; count];
    let status = unsafe { dq_critical_delay_ma(10.0, 1.0, f64::NAN, f64::NAN, d.as_mut_ptr(), w.as_mut_ptr(), count, &mut count) };
    assert_eq!(status, DqStatus::Ok);
    assert!(d[0] > 2.0 && d[0] < 2.2, "{d:?}");
    assert!(d.windows(2).all(|p| p[0] < p[1]));
}

#[test]
fn trajectory_handle_round_trip() {
    let h = simulate(DQ_MODEL_MOVING_AVERAGE, 10.0, 1.0, 1.0, 5.0, None);
    unsafe {
        let n = dq_trajectory_node_count(h);
        let d = dq_trajectory_dimension(h);
        assert_eq!(d, 4);
        assert!((dq_trajectory_step(h) - 0.01).abs() < 1e-15);
        let mut times = vec![0.0; n];
        let mut states = vec![0.0; n * d];
        assert_eq!(dq_trajectory_copy(h, times.as_mut_ptr(), n, states.as_mut_ptr(), n * d), DqStatus::Ok);
        assert_eq!(times[0], 0.0);
        assert!((times[n - 1] - 5.0).abs() < 1e-12);
        assert!((states[0] - 5.5).abs() < 1e-12 && (states[1] - 4.5).abs() < 1e-12);

        let mut x = [0.0; 4];
        assert_eq!(dq_trajectory_eval(h, times[n - 1], x.as_mut_ptr(), 4), DqStatus::Ok);
        assert_eq!(&x[..], &states[(n - 1) * d..]);
        assert_eq!(dq_trajectory_eval(h, 99.0, x.as_mut_ptr(), 4), DqStatus::OutOfRange);
        assert_eq!(dq_trajectory_eval(h, 1.0, x.as_mut_ptr(), 2), DqStatus::BufferTooSmall);
        assert_eq!(dq_trajectory_copy(h, times.as_mut_ptr(), n - 1, ptr::null_mut(), 0), DqStatus::BufferTooSmall);
        dq_trajectory_free(h);
    }
}

#[test]
fn classification_matches_regimes() {
    for (delta, expected) in [(0.2, DQ_REGIME_SYNCHRONIZED), (0.5, DQ_REGIME_OSCILLATORY)] {
        let h = simulate(DQ_MODEL_CONSTANT, 10.0, 1.0, delta, 200.0, Some([5.5, 4.5]));
        let (mut regime, mut amplitude, mut growing) = (99u32, f64::NAN, true);
        assert_eq!(unsafe { dq_classify(h, &mut regime, &mut amplitude, &mut growing) }, DqStatus::Ok);
        assert_eq!(regime, expected, "delta {delta}, amplitude {amplitude}");
        unsafe { dq_trajectory_free(h) };
    }
}

#[test]
fn root_tracking_crosses_axis() {
    let (mut d, mut w) = (0.0, 0.0);
    unsafe { dq_critical_delay_constant(10.0, 1.0, &mut d, &mut w) };
    let (mut re, mut im) = (0.0, 0.0);
    let status = unsafe { dq_root_track(DQ_MODEL_CONSTANT, 10.0, 1.0, d + 1e-3, 0.0, w, &mut re, &mut im) };
    assert_eq!(status, DqStatus::Ok);
    assert!(re > 0.0 && (im - w).abs() < 0.1);
}

#[test]
fn invalid_arguments() {
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(dq_simulate(7, 10.0, 1.0, 0.1, 1.0, 0.0, ptr::null(), &mut h), DqStatus::Precondition);
        assert!(h.is_null());
        assert_eq!(dq_simulate(1, 10.0, 1.0, 0.0, 1.0, 0.0, ptr::null(), &mut h), DqStatus::Precondition);
        assert_eq!(dq_simulate(0, 10.0, 1.0, 0.1, 1.0, 0.0, ptr::null(), ptr::null_mut()), DqStatus::NullPointer);
        assert_eq!(dq_trajectory_node_count(ptr::null()), 0);
        assert!(dq_trajectory_step(ptr::null()).is_nan());
        let mut r = 0u32;
        let mut a = 0.0;
        assert_eq!(dq_classify(ptr::null(), &mut r, &mut a, ptr::null_mut()), DqStatus::NullPointer);
        dq_trajectory_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(dq_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/delayq.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["dq_simulate", "dq_trajectory_free", "dq_critical_delay_ma", "DQ_STATUS_NO_HOPF", "typedef struct DqTrajectory"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c", header]).output() else {
        eprintln!("no C compiler, skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

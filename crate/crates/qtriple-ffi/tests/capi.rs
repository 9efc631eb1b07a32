use std::ffi::{CStr, CString};
use std::ptr;

use qtriple_ffi::*;

fn run(cfg: &str, cmd: QtCommand) -> (QtStatus, *mut QtRun) {
    let c = CString::new(cfg).unwrap();
    let mut h = ptr::null_mut();
    let s = unsafe { qt_run(c.as_ptr(), cmd, &mut h) };
    (s, h)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(qt_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn triple_run_round_trip() {
    let cfg = r#"
q = 0.5
[triple]
m_a = 3
m_b = 0
alpha = 0.5
nu = 0.5
w = { family = "constant", value = 0.5 }
f1 = { family = "power", p = 0.5 }
f3 = { family = "power", p = -2.0 }
"#;
    let (s, h) = run(cfg, QtCommand::SolveTriple);
    assert_eq!(s, QtStatus::Ok, "{}", last_error());
    unsafe {
        let n = qt_run_len(h);
        assert!(n > 100);
        let (mut k, mut u, mut psi) = (0i64, 0.0f64, 0.0f64);
        assert_eq!(qt_run_sample(h, 0, &mut k, &mut u, &mut psi), QtStatus::Ok);
        assert!((u - 0.5f64.powi(k as i32)).abs() <= 1e-15 * u);
        assert_eq!(qt_run_sample(h, n, &mut k, &mut u, &mut psi), QtStatus::OutOfRange);
        assert!(qt_run_max_residual(h) < 1e-10);
        assert_eq!(qt_run_passed(h), 1);
        let summary = CStr::from_ptr(qt_run_summary(h)).to_str().unwrap();
        assert!(summary.contains("F1 variant Derived"));
        qt_run_free(h);
    }
}

#[test]
fn command_from_config() {
    let (s, h) = run("command = \"example1\"\n", QtCommand::FromConfig);
    assert_eq!(s, QtStatus::Ok, "{}", last_error());
    unsafe {
        assert_eq!(qt_run_passed(h), 1);
        qt_run_free(h);
    }
    let (s, h) = run("q = 0.5\n", QtCommand::FromConfig);
    assert_eq!(s, QtStatus::Config);
    assert!(h.is_null());
}

#[test]
fn errors_map_to_codes() {
    let (s, h) = run("[triple]\nm_a = 3\nm_b = 0\nalpha = 1.5\nnu = 0.5\n", QtCommand::SolveTriple);
    assert_eq!(s, QtStatus::Config);
    assert!(h.is_null());
    assert!(last_error().contains("0 < alpha < 1"), "{}", last_error());

    let (s, _) = run("nonsense = 1\n", QtCommand::Verify);
    assert_eq!(s, QtStatus::Config);
    assert!(last_error().contains("nonsense"));

    let mut h = ptr::null_mut();
    assert_eq!(unsafe { qt_run(ptr::null(), QtCommand::Verify, &mut h) }, QtStatus::NullPointer);
    unsafe {
        assert_eq!(qt_run_len(ptr::null()), 0);
        assert!(qt_run_max_residual(ptr::null()).is_nan());
        qt_run_free(ptr::null_mut());
    }
}

#[test]
fn bessel_entry_point() {
    let mut v = 0.0;
    assert_eq!(unsafe { qt_qbessel3(0.0, 0.0, 0.25, &mut v) }, QtStatus::Ok);
    assert!((v - 1.0).abs() < 1e-15);
    assert_eq!(unsafe { qt_qbessel3(0.0, 1.0, 0.25, ptr::null_mut()) }, QtStatus::NullPointer);
}

#[test]
fn header_declares_entry_points() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qtriple.h")).unwrap();
    for name in ["qt_run(", "qt_run_free(", "qt_run_sample(", "qt_last_error(", "qt_qbessel3(", "typedef struct QtRun QtRun"] {
        assert!(h.contains(name), "missing {name}");
    }
}

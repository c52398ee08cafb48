use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use riskbound_ffi::*;

const CHAIN: &str = r#"{"P": [[0.6, 0.4], [0.3, 0.7]], "c": [[0.2, -0.1], [0.0, 0.3]], "Phi": [[1], [1]]}"#;

fn parse(json: &str) -> (RbStatus, *mut RbProblem) {
    let text = CString::new(json).unwrap();
    let mut handle = ptr::null_mut();
    let status = unsafe { rb_problem_from_json(text.as_ptr(), &mut handle) };
    (status, handle)
}

fn last_error() -> String {
    let p = rb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn lambda_mu_and_report() {
    let (status, h) = parse(CHAIN);
    assert_eq!(status, RbStatus::Ok);
    let (mut lambda, mut mu) = (0.0, 0.0);
    assert_eq!(unsafe { rb_lambda(h, &mut lambda) }, RbStatus::Ok);
    assert_eq!(unsafe { rb_mu(h, &mut mu) }, RbStatus::Ok);
    assert!(lambda > 0.0 && mu > 0.0);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { rb_analyze_json(h, &mut json) }, RbStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { rb_string_free(json) };
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let actual = report["approximation"]["bounds"]["actual"].as_f64().unwrap();
    assert!((actual - (lambda / mu).ln()).abs() < 1e-12);
    unsafe { rb_problem_free(h) };
}

#[test]
fn errors_are_codes_with_messages() {
    let (status, h) = parse(r#"{"P": [[0.5, "x"]]}"#);
    assert_eq!(status, RbStatus::Schema);
    assert!(h.is_null());
    assert!(last_error().contains("P[0][1]"));

    let (status, _) = parse(r#"{"P": [[0, 1], [1, 0]], "c": [[0, 0], [0, 0]]}"#);
    assert_eq!(status, RbStatus::Validation);
    assert!(last_error().contains("aperiodic"));

    let mut out = 0.0;
    assert_eq!(unsafe { rb_lambda(ptr::null(), &mut out) }, RbStatus::NullPointer);

    let (_, h) = parse(r#"{"P": [[0.5, 0.5], [0.5, 0.5]], "c": [[0, 0], [0, 0]]}"#);
    assert_eq!(unsafe { rb_mu(h, &mut out) }, RbStatus::Schema);
    unsafe { rb_problem_free(h) };
    unsafe { rb_problem_free(ptr::null_mut()) };
}

#[test]
fn perron_value_of_raw_matrix() {
    let a = [2.0, 1.0, 1.0, 2.0];
    let mut out = 0.0;
    assert_eq!(unsafe { rb_perron_value(a.as_ptr(), 2, &mut out) }, RbStatus::Ok);
    assert!((out - 3.0).abs() < 1e-14);
    let reducible = [1.0, 0.0, 0.0, 1.0];
    assert_eq!(
        unsafe { rb_perron_value(reducible.as_ptr(), 2, &mut out) },
        RbStatus::Domain
    );
}

#[test]
fn simulate_average_cost() {
    let (_, h) = parse(CHAIN);
    let (mut fin, mut target) = (0.0, 0.0);
    assert_eq!(
        unsafe { rb_simulate(h, RbAlgorithm::Avg, 50_000, 3, &mut fin, &mut target) },
        RbStatus::Ok
    );
    assert!((fin - target).abs() < 1e-2);
    // A single constant feature does not satisfy ΦΦᵀ = D⁻¹ here, so TD has no target.
    assert_eq!(
        unsafe { rb_simulate(h, RbAlgorithm::Td, 1000, 3, &mut fin, &mut target) },
        RbStatus::Ok
    );
    assert!(target.is_nan());
    unsafe { rb_problem_free(h) };
}

/// Compiles the C smoke program against the generated header and the static
/// library produced alongside this test binary. Skipped when no C compiler is found.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = target_dir.join("libriskbound_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc)
            .arg("--version")
            .output()
            .is_ok_and(|o| o.status.success())
        {
            return Ok(cc.to_string());
        }
    }
    Err(())
}

use std::ffi::{CStr, CString};
use std::ptr;

use subdiff_ffi::*;

const EXAMPLE: &str = r#"{
  "alpha": 0.4, "T": 1.0, "n_modes": 8, "n_steps": 64,
  "y0": [1, 0, 0, 0, 0, 0, 0, 0],
  "actuator": {"kind": "pointwise", "b": 0.3333333333333333},
  "target": {"kind": "modes", "indices": [3, 4, 5, 6, 7, 8]}
}"#;

fn problem(json: &str) -> (SdcStatus, *mut SdcProblem) {
    let c = CString::new(json).unwrap();
    let mut p = ptr::null_mut();
    let s = unsafe { sdc_problem_from_json(c.as_ptr(), &mut p) };
    (s, p)
}

fn last_error() -> String {
    let p = sdc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn synthesis_round_trip() {
    let (s, p) = problem(EXAMPLE);
    assert_eq!(s, SdcStatus::Ok);
    assert!(sdc_last_error_message().is_null());
    let mut syn = ptr::null_mut();
    assert_eq!(unsafe { sdc_synthesize(p, &mut syn) }, SdcStatus::Ok);
    let n = unsafe { sdc_synthesis_control_len(syn) };
    assert_eq!(n, 65);
    let mut buf = vec![0.0; n];
    assert_eq!(unsafe { sdc_synthesis_control(syn, buf.as_mut_ptr(), n) }, SdcStatus::Ok);
    assert!(buf.iter().any(|v| *v != 0.0));
    let energy = unsafe { sdc_synthesis_energy(syn) };
    let h = 1.0 / 64.0;
    let trap: f64 = buf.iter().enumerate().map(|(k, v)| {
        let w = if k == 0 || k == n - 1 { 0.5 * h } else { h };
        w * v * v
    }).sum();
    assert!((energy - 0.5 * trap).abs() <= 1e-15 * energy.max(1.0));
    assert!(unsafe { sdc_synthesis_distance(syn) } <= 1e-4);

    assert_eq!(unsafe { sdc_synthesis_control(syn, buf.as_mut_ptr(), n - 1) }, SdcStatus::BufferTooSmall);
    assert!(last_error().contains("65"));
    unsafe {
        sdc_synthesis_free(syn);
        sdc_problem_free(p);
    }
}

#[test]
fn non_strategic_is_reported() {
    let (s, p) = problem(&EXAMPLE.replace("[3, 4,", "[2, 4,"));
    assert_eq!(s, SdcStatus::Ok);
    let mut strategic = -1;
    let mut dead = [0usize; 4];
    let mut n_dead = 0;
    let st = unsafe { sdc_analyze(p, &mut strategic, dead.as_mut_ptr(), dead.len(), &mut n_dead) };
    assert_eq!(st, SdcStatus::Ok);
    assert_eq!((strategic, n_dead, dead[0]), (0, 1, 3));
    assert_eq!(unsafe { sdc_analyze(p, &mut strategic, ptr::null_mut(), 0, &mut n_dead) }, SdcStatus::BufferTooSmall);
    assert_eq!(n_dead, 1);

    let mut syn = ptr::null_mut();
    assert_eq!(unsafe { sdc_synthesize(p, &mut syn) }, SdcStatus::NonStrategic);
    assert!(syn.is_null());
    assert!(last_error().contains("[3]"));
    unsafe { sdc_problem_free(p) };
}

#[test]
fn invalid_inputs() {
    let (s, p) = problem(&EXAMPLE.replace("0.4", "1.0"));
    assert_eq!(s, SdcStatus::Validation);
    assert!(p.is_null());
    assert!(last_error().contains("alpha must lie strictly in (0,1)"));
    assert_eq!(problem("{").0, SdcStatus::Parse);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sdc_problem_from_json(ptr::null(), &mut out) }, SdcStatus::NullPointer);
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { sdc_problem_from_json(bad.as_ptr().cast(), &mut out) }, SdcStatus::InvalidUtf8);
    assert_eq!(unsafe { sdc_synthesize(ptr::null(), &mut ptr::null_mut()) }, SdcStatus::NullPointer);
    assert_eq!(unsafe { sdc_synthesis_control_len(ptr::null()) }, 0);
    assert!(unsafe { sdc_synthesis_energy(ptr::null()) }.is_nan());
    unsafe {
        sdc_problem_free(ptr::null_mut());
        sdc_synthesis_free(ptr::null_mut());
    }
}

#[test]
fn mittag_leffler_through_the_abi() {
    let mut v = 0.0;
    assert_eq!(unsafe { sdc_mittag_leffler(1.0, 1.0, -2.0, &mut v) }, SdcStatus::Ok);
    assert!((v - (-2.0f64).exp()).abs() < 1e-15);
    assert_eq!(unsafe { sdc_mittag_leffler(-1.0, 1.0, 0.5, &mut v) }, SdcStatus::Domain);
    assert_eq!(unsafe { sdc_mittag_leffler(1.0, 1.0, 0.5, ptr::null_mut()) }, SdcStatus::NullPointer);
}

/// The generated header compiles as C and matches the call shapes above.
#[test]
fn header_compiles() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "subdiff.h"
int main(void) {
    SdcProblem *p = NULL;
    SdcSynthesis *s = NULL;
    double buf[4], v;
    int32_t strategic;
    size_t dead[4], n_dead;
    if (sdc_problem_from_json("{}", &p) != SDC_STATUS_OK) return (int)sdc_last_error_message()[0];
    if (sdc_synthesize(p, &s) == SDC_STATUS_OK) {
        sdc_synthesis_control(s, buf, sdc_synthesis_control_len(s));
        v = sdc_synthesis_energy(s) + sdc_synthesis_distance(s);
        sdc_synthesis_free(s);
    }
    sdc_analyze(p, &strategic, dead, 4, &n_dead);
    sdc_mittag_leffler(0.5, 1.0, -1.0, &v);
    sdc_problem_free(p);
    return 0;
}
"#,
    )
    .unwrap();
    let out = std::process::Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .output()
        .expect("a C compiler is available");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

/// Links a C program against the static library and runs a synthesis.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    // target/<profile>/deps/ffi-… → target/<profile>/libsubdiff_ffi.a
    let lib = exe.parent().and_then(|d| d.parent()).unwrap().join("libsubdiff_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    let json = EXAMPLE.replace('\n', " ").replace('"', "\\\"");
    std::fs::write(
        &src,
        format!(
            r#"#include <stdio.h>
#include "subdiff.h"
int main(void) {{
    SdcProblem *p = NULL;
    SdcSynthesis *s = NULL;
    if (sdc_problem_from_json("{json}", &p) != SDC_STATUS_OK) {{
        fprintf(stderr, "%s\n", sdc_last_error_message());
        return 2;
    }}
    if (sdc_synthesize(p, &s) != SDC_STATUS_OK) return 3;
    printf("%zu %.3e\n", sdc_synthesis_control_len(s), sdc_synthesis_distance(s));
    sdc_synthesis_free(s);
    sdc_problem_free(p);
    return 0;
}}
"#
        ),
    )
    .unwrap();
    let out = std::process::Command::new(&cc)
        .arg("-std=c99")
        .arg("-I")
        .arg(include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = std::process::Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = String::from_utf8(run.stdout).unwrap();
    let mut parts = text.split_whitespace();
    assert_eq!(parts.next(), Some("65"));
    let d: f64 = parts.next().unwrap().parse().unwrap();
    assert!(d <= 1e-4);
}

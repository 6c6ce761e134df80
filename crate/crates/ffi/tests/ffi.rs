use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use glmbands_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(gb_last_error_message()) }.to_string_lossy().into_owned()
}

fn lavelle_fit() -> *mut GbFit {
    let mut ds = ptr::null_mut();
    let mut fit = ptr::null_mut();
    unsafe {
        assert_eq!(gb_dataset_lavelle(&mut ds), GbStatus::Ok);
        assert_eq!(gb_dataset_len(ds), 6);
        assert_eq!(gb_fit(ds, GbLink::Logit, &mut fit), GbStatus::Ok);
        gb_dataset_free(ds);
    }
    fit
}

#[test]
fn fit_and_geometry_round_trip() {
    let fit = lavelle_fit();
    let mut beta = [0.0; 2];
    let mut inv = [0.0; 4];
    let mut phi = 0.0;
    let mut w = 0.0;
    unsafe {
        assert_eq!(gb_fit_coefficients(fit, beta.as_mut_ptr()), GbStatus::Ok);
        assert_eq!(gb_fit_info_inv(fit, inv.as_mut_ptr()), GbStatus::Ok);
        assert_eq!(gb_cone_angle(fit, -1.3, 0.8, &mut phi), GbStatus::Ok);
        assert_eq!(gb_critical_value(phi, 0.95, GbSide::TwoSided, &mut w), GbStatus::Ok);
        let mut whole = 0.0;
        assert_eq!(gb_cone_angle(fit, f64::NEG_INFINITY, f64::INFINITY, &mut whole), GbStatus::Ok);
        assert_eq!(whole, std::f64::consts::PI);
        gb_fit_free(fit);
    }
    assert!((beta[0] + 0.78878).abs() < 1e-4 && (beta[1] - 0.85403).abs() < 1e-4);
    assert!((inv[0] - 0.017071).abs() < 1e-5 && inv[1] == inv[2]);
    assert!((phi - 0.80914).abs() < 1e-4);
    assert!((w - 2.20588).abs() < 1e-4);
    let mut p = 0.0;
    unsafe { assert_eq!(gb_coverage(w, phi, GbSide::TwoSided, &mut p), GbStatus::Ok) };
    assert!((p - 0.95).abs() < 1e-9);
}

#[test]
fn band_rows() {
    let fit = lavelle_fit();
    let mut band = ptr::null_mut();
    let mut row = GbBandRow { x: 0.0, center_linear: 0.0, se: 0.0, fitted_p: 0.0, lower_p: 0.0, upper_p: 0.0 };
    unsafe {
        assert_eq!(gb_band_build(fit, -1.3, 0.8, GbSide::Upper, 0.95, 21, 0.0, 0.0, &mut band), GbStatus::Ok);
        assert_eq!(gb_band_len(band), 21);
        assert!((gb_band_critical_value(band) - 1.89903).abs() < 1e-4);
        assert_eq!(gb_band_row(band, 20, &mut row), GbStatus::Ok);
        assert_eq!(row.x, 0.8);
        assert!(row.lower_p.is_nan() && row.upper_p > row.fitted_p);
        assert_eq!(gb_band_row(band, 21, &mut row), GbStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));
        gb_band_free(band);

        let mut whole = ptr::null_mut();
        assert_eq!(
            gb_band_build(fit, f64::NEG_INFINITY, f64::INFINITY, GbSide::TwoSided, 0.95, 5, -2.0, 2.0, &mut whole),
            GbStatus::Ok
        );
        assert_eq!(gb_band_row(whole, 0, &mut row), GbStatus::Ok);
        assert_eq!(row.x, -2.0);
        gb_band_free(whole);
        gb_fit_free(fit);
    }
}

#[test]
fn errors_are_reported() {
    let mut ds = ptr::null_mut();
    let bad = CString::new("x,successes,trials\n1,5,3\n2,1,4\n").unwrap();
    unsafe {
        assert_eq!(gb_dataset_parse(bad.as_ptr(), GbSchema::Binomial, &mut ds), GbStatus::InputError);
        assert!(ds.is_null());
        assert!(last_error().contains("line 2"), "{}", last_error());
        assert_eq!(gb_dataset_parse(ptr::null(), GbSchema::Binomial, &mut ds), GbStatus::NullPointer);
        assert_eq!(gb_fit(ptr::null(), GbLink::Logit, &mut ptr::null_mut()), GbStatus::NullPointer);

        let separated = CString::new("x,y\n0,0\n1,0\n2,1\n3,1\n").unwrap();
        assert_eq!(gb_dataset_parse(separated.as_ptr(), GbSchema::Bernoulli, &mut ds), GbStatus::Ok);
        let mut fit = ptr::null_mut();
        assert_eq!(gb_fit(ds, GbLink::Probit, &mut fit), GbStatus::FitError);
        assert!(fit.is_null());
        gb_dataset_free(ds);

        let mut w = 0.0;
        assert_ne!(gb_critical_value(1.0, 1.5, GbSide::TwoSided, &mut w), GbStatus::Ok);
        assert!(!last_error().is_empty());
        assert_eq!(gb_critical_value(1.0, 0.95, GbSide::TwoSided, &mut w), GbStatus::Ok);
        assert!(last_error().is_empty());

        gb_dataset_free(ptr::null_mut());
        gb_fit_free(ptr::null_mut());
        gb_band_free(ptr::null_mut());
        assert_eq!(gb_band_len(ptr::null()), 0);
    }
}

#[test]
fn simulation_is_deterministic() {
    let cfg = GbSimConfig {
        beta0: 0.0,
        beta1: 1.5,
        link: GbLink::Logit,
        interval_kind: GbIntervalKind::Wide,
        a: 0.0,
        b: 0.0,
        design: GbDesign::Equal,
        n: 25,
        replications: 200,
        alpha: 0.05,
        side: GbSide::TwoSided,
        seed: 11,
    };
    let mut r1 = GbSimResult::default();
    let mut r2 = GbSimResult::default();
    unsafe {
        assert_eq!(gb_simulate(&cfg, &mut r1), GbStatus::Ok);
        assert_eq!(gb_simulate(&cfg, &mut r2), GbStatus::Ok);
    }
    assert_eq!(r1, r2);
    assert_eq!(r1.replications_used + r1.fit_failures, 200);
    assert!((r1.b - 1.5f64.recip() * 9f64.ln()).abs() < 1e-12);
    let bad = GbSimConfig { replications: 0, ..cfg };
    unsafe { assert_eq!(gb_simulate(&bad, &mut r1), GbStatus::InputError) };
}

fn header() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/glmbands.h")).unwrap()
}

#[test]
fn header_declares_the_api() {
    let h = header();
    for name in [
        "gb_last_error_message",
        "gb_dataset_parse",
        "gb_dataset_lavelle",
        "gb_dataset_free",
        "gb_fit",
        "gb_fit_coefficients",
        "gb_fit_info_inv",
        "gb_fit_free",
        "gb_cone_angle",
        "gb_critical_value",
        "gb_coverage",
        "gb_band_build",
        "gb_band_len",
        "gb_band_row",
        "gb_band_free",
        "gb_simulate",
        "typedef struct GbFit GbFit;",
        "GB_STATUS_SOLVER_ERROR = 6",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

fn static_lib() -> Option<PathBuf> {
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    [deps.join("../libglmbands_ffi.a"), deps.join("libglmbands_ffi.a")].into_iter().find(|p| p.exists())
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = static_lib() else {
        eprintln!("static library not found next to the test binary; C link check not run");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; C link check not run");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "-0.7888 0.8540 0.8091 2.2059");
}

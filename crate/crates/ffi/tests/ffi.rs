use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use wpduality_ffi::*;

fn density_from_stokes(s: [f64; 3]) -> *mut WpdDensity {
    let mut rho = ptr::null_mut();
    assert_eq!(unsafe { wpd_density_from_stokes(s[0], s[1], s[2], &mut rho) }, WpdStatus::Ok);
    rho
}

fn last_error() -> String {
    let p = wpd_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn pure_state_round_trip() {
    let mut rho = ptr::null_mut();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert_eq!(unsafe { wpd_density_from_pure(h, 0.0, 0.0, h, &mut rho) }, WpdStatus::Ok);
    assert!(wpd_last_error_message().is_null());
    let mut s = [0.0; 3];
    assert_eq!(unsafe { wpd_density_stokes(rho, s.as_mut_ptr()) }, WpdStatus::Ok);
    assert!(s[0].abs() < 1e-12 && (s[1] - 1.0).abs() < 1e-12 && s[2].abs() < 1e-12);

    let mut m = [0.0; 8];
    assert_eq!(unsafe { wpd_density_entries(rho, m.as_mut_ptr()) }, WpdStatus::Ok);
    assert!((m[0] - 0.5).abs() < 1e-12 && (m[6] - 0.5).abs() < 1e-12);
    assert!((m[3] + 0.5).abs() < 1e-12 && (m[5] - 0.5).abs() < 1e-12);
    unsafe { wpd_density_free(rho) };
}

#[test]
fn capacities_and_w_phi() {
    let rho = density_from_stokes([0.3, -0.4, 0.5]);
    let mut caps = WpdCapacities::default();
    assert_eq!(unsafe { wpd_duality_check(rho, WpdConvention::Appendix, &mut caps) }, WpdStatus::Ok);
    assert!((caps.c_d - 0.5).abs() < 1e-12);
    assert!((caps.c_v - 0.5).abs() < 1e-12);
    assert!(caps.equality_residual < 1e-12 && caps.inequality_ok);

    assert_eq!(unsafe { wpd_duality_check(rho, WpdConvention::MainText, &mut caps) }, WpdStatus::Ok);
    assert!((caps.c_d - 0.3).abs() < 1e-12);

    let mut w = 0.0;
    assert_eq!(unsafe { wpd_w_phi(rho, 0.0, WpdConvention::Appendix, &mut w) }, WpdStatus::Ok);
    assert!((w - 0.65).abs() < 1e-12);
    assert_eq!(unsafe { wpd_w_phi(rho, f64::NAN, WpdConvention::Appendix, &mut w) }, WpdStatus::InvalidArgument);

    let mixed = density_from_stokes([0.0; 3]);
    let mut f = 0.0;
    assert_eq!(unsafe { wpd_fidelity(rho, mixed, &mut f) }, WpdStatus::Ok);
    // Tr(rho)/2 + sqrt(det rho), det = (1 - r^2) / 4 with r^2 = 0.5
    assert!((f - (0.5 + 0.125f64.sqrt())).abs() < 1e-12);
    unsafe {
        wpd_density_free(rho);
        wpd_density_free(mixed);
    }
}

#[test]
fn invalid_inputs_set_errors() {
    let mut rho = ptr::null_mut();
    assert_eq!(unsafe { wpd_density_from_stokes(1.0, 1.0, 0.0, &mut rho) }, WpdStatus::InvalidState);
    assert!(rho.is_null());
    assert!(last_error().contains("Bloch ball"));

    assert_eq!(unsafe { wpd_density_from_pure(2.0, 0.0, 0.0, 0.0, &mut rho) }, WpdStatus::InvalidState);
    assert_eq!(unsafe { wpd_density_from_pure(1.0, 0.0, 0.0, 0.0, ptr::null_mut()) }, WpdStatus::NullPointer);
    assert_eq!(unsafe { wpd_density_stokes(ptr::null(), ptr::null_mut()) }, WpdStatus::NullPointer);
    assert!(last_error().contains("rho"));

    let ok = density_from_stokes([0.0, 0.0, 1.0]);
    let mut counts = ptr::null_mut();
    assert_eq!(unsafe { wpd_simulate_counts(ok, -5.0, 10, 1, &mut counts) }, WpdStatus::InvalidArgument);
    assert!(counts.is_null());
    unsafe {
        wpd_density_free(ok);
        wpd_density_free(ptr::null_mut());
        wpd_counts_free(ptr::null_mut());
    }
}

#[test]
fn simulate_and_reconstruct() {
    let target = density_from_stokes([0.6, 0.0, 0.7]);
    let mut counts = ptr::null_mut();
    assert_eq!(unsafe { wpd_simulate_counts(target, 16000.0, 100, 7, &mut counts) }, WpdStatus::Ok);
    let mut totals = [0u64; 6];
    assert_eq!(unsafe { wpd_counts_totals(counts, totals.as_mut_ptr()) }, WpdStatus::Ok);
    for axis in totals.chunks(2) {
        let n = (axis[0] + axis[1]) as f64;
        assert!((n - 16000.0).abs() < 600.0, "{n}");
    }

    let mut rho_hat = ptr::null_mut();
    let mut converged = false;
    assert_eq!(unsafe { wpd_mle_reconstruct(counts, 0, &mut rho_hat, &mut converged) }, WpdStatus::Ok);
    assert!(converged);
    let mut f = 0.0;
    assert_eq!(unsafe { wpd_fidelity(target, rho_hat, &mut f) }, WpdStatus::Ok);
    assert!(f > 0.99, "{f}");

    let mut caps = WpdCapacities::default();
    assert_eq!(unsafe { wpd_estimate_capacities(counts, WpdConvention::Appendix, &mut caps) }, WpdStatus::Ok);
    assert!((caps.c_d - 0.7).abs() < 0.03);
    assert!((caps.c_v - 0.6).abs() < 0.03);
    unsafe {
        wpd_counts_free(counts);
        wpd_density_free(rho_hat);
        wpd_density_free(target);
    }
}

const C_SMOKE: &str = r#"
#include <stdio.h>
#include <math.h>
#include "wpduality.h"

int main(void) {
    WpdDensity *rho = NULL;
    if (wpd_density_from_stokes(0.3, -0.4, 0.5, &rho) != WPD_STATUS_OK) return 1;
    WpdCapacities caps;
    if (wpd_duality_check(rho, WPD_CONVENTION_APPENDIX, &caps) != WPD_STATUS_OK) return 2;
    if (fabs(caps.c_p * caps.c_p - caps.c_d * caps.c_d - caps.c_v * caps.c_v) > 1e-12) return 3;
    WpdDensity *bad = NULL;
    if (wpd_density_from_stokes(2.0, 0.0, 0.0, &bad) != WPD_STATUS_INVALID_STATE) return 4;
    if (wpd_last_error_message() == NULL) return 5;
    printf("%.6f %.6f %.6f\n", caps.c_p, caps.c_d, caps.c_v);
    wpd_density_free(rho);
    return 0;
}
"#;

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("wpduality.h").exists());
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let staticlib = profile_dir.join("libwpduality_ffi.a");
    assert!(staticlib.exists(), "{} missing", staticlib.display());

    let work = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi_smoke");
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("smoke.c");
    let exe = work.join("smoke");
    std::fs::write(&src, C_SMOKE).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .arg(&staticlib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.707107 0.500000 0.500000");
}

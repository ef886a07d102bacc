use std::path::Path;
use std::process::{Command, Output};

fn wpd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpduality"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn capacities_json() {
    let o = wpd(&["capacities", "--state", "phi1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let phi1 = &v["phi1"];
    assert!((phi1["c_d"].as_f64().unwrap() - 0.4699).abs() < 1e-4);
    assert_eq!(phi1["convention"], "appendix");
    assert_eq!(phi1["E_joules"].as_f64().unwrap(), 2.45e-19);
    assert_eq!(phi1["inequality_ok"], true);

    let o = wpd(&["capacities", "--state", "phi1", "--convention", "main", "--e-joules", "1.0"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["phi1"]["c_d"].as_f64().unwrap() - 0.17105).abs() < 1e-4);
    assert_eq!(v["phi1"]["c_d_joules"], v["phi1"]["c_d"]);
}

#[test]
fn state_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    std::fs::write(&path, r#"{"alpha": [0.7071067811865476, 0.0], "beta": [0.7071067811865476, 0.0]}"#).unwrap();
    let o = wpd(&["capacities", "--state", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["d"]["c_v"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    std::fs::write(&path, r#"{"alpha": [1, 0], "beta": [0, 0], "stokes": [0, 0, 1]}"#).unwrap();
    let o = wpd(&["capacities", "--state", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_csv() {
    let o = wpd(&["scan", "--state", "phi1", "--points", "11"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "phi_radians,W_over_E");
    assert_eq!(lines.len(), 12);
}

#[test]
fn simulate_then_tomo() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = wpd(&["simulate", "--state", "phi2", "--seed", "4", "--out", out]);
    assert!(o.status.success());
    let counts = dir.path().join("counts_phi2.csv");
    let text = std::fs::read_to_string(&counts).unwrap();
    assert!(text.starts_with("axis,repeat,n0,n1"));
    assert_eq!(text.lines().count(), 301);

    let o = wpd(&[
        "tomo",
        "--counts",
        counts.to_str().unwrap(),
        "--state",
        "phi2",
        "--bootstrap",
        "100",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["tomography"]["fidelity_vs_target"].as_f64().unwrap() > 0.98);
    assert_eq!(v["tomography"]["rho_hat"].as_array().unwrap().len(), 2);
    assert!(v["capacities"]["std_errors"]["c_d"].as_f64().unwrap() > 0.0);
    assert_eq!(v["bootstrap"]["valid"], true);
}

#[test]
fn simulate_is_reproducible() {
    let a = wpd(&["simulate", "--state", "phi3", "--seed", "12"]);
    let b = wpd(&["simulate", "--state", "phi3", "--seed", "12"]);
    let c = wpd(&["simulate", "--state", "phi3", "--seed", "13"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn reproduce_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = wpd(&["reproduce", "--figure", "3", "--seed", "1", "--out", out]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(Path::new(out).join("figure3.json").exists());
    assert!(Path::new(out).join("fig3_phi1_analytic.csv").exists());
    assert!(Path::new(out).join("fig3_phi4_simulated.csv").exists());

    let o = wpd(&["reproduce", "--figure", "5", "--state", "mixed", "--analytic-only", "--out", out]);
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("figure5.json")).unwrap()).unwrap();
    assert_eq!(v["rows"][0]["state"], "mixed");
    assert_eq!(v["noise"], serde_json::Value::Null);
}

#[test]
fn analytic_reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = wpd(&["reproduce", "--figure", "4", "--analytic-only", "--out", d.path().to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(
        std::fs::read(a.path().join("figure4.json")).unwrap(),
        std::fs::read(b.path().join("figure4.json")).unwrap()
    );
}

#[test]
fn trials_mode() {
    let o = wpd(&["reproduce", "--figure", "4", "--state", "phi1", "--trials", "20"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["trials"], 20);
    assert!(v["pass_fraction"]["phi1: simulated triple"].as_f64().unwrap() >= 0.95);
}

#[test]
fn proptest_subcommand() {
    let o = wpd(&["proptest", "--n-states", "1000", "--seed", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["first_failure"].is_null());
    let o = wpd(&["proptest", "--n-states", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_arguments_fail() {
    assert!(!wpd(&["reproduce", "--figure", "6"]).status.success());
    assert!(!wpd(&["scan"]).status.success());
    assert!(!wpd(&["capacities", "--state", "phi7"]).status.success());
    assert!(!wpd(&["tomo", "--counts", "/nonexistent/counts.csv"]).status.success());
}

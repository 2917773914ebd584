use std::fs;
use std::process::{Command, Output};

use serde_json::Value;
use teleprobe::scan::prepare_fig5_state;

fn teleprobe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teleprobe")).args(args).env_remove("TELEPROBE_OUT_DIR").output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = teleprobe(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn plan_widths() {
    assert_eq!(json(&["plan", "--n", "2", "--m", "01", "--nn", "10"])["result"]["ghz_width"], 3);
    assert_eq!(json(&["plan", "--n", "4", "--m", "0000", "--nn", "1111"])["result"]["ghz_width"], 5);
    let v = json(&["plan", "--m", "010", "--nn", "011"]);
    assert_eq!(v["result"]["roles"], serde_json::json!(["Z:0", "Z:1", "Bell:1"]));
}

#[test]
fn plan_rejects_diagonal_and_mismatched_input() {
    let out = teleprobe(&["plan", "--n", "2", "--m", "00", "--nn", "00"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diagonal element: use populations"));
    assert_eq!(teleprobe(&["plan", "--n", "3", "--m", "00", "--nn", "01"]).status.code(), Some(2));
    assert_eq!(teleprobe(&["plan", "--m", "0x", "--nn", "01"]).status.code(), Some(2));
    assert_eq!(teleprobe(&["plan", "--bogus"]).status.code(), Some(2));
}

#[test]
fn measure_epr() {
    let v = json(&["measure", "--state", "epr", "--m", "00", "--nn", "11", "--exact"]);
    let est = &v["result"]["estimate"];
    assert!((num(&est["re"]) - 0.5).abs() < 1e-12);
    assert!(num(&est["im"]).abs() < 1e-12);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["seed"], 0);
}

#[test]
fn measure_fig5_matches_matrix_entry() {
    let rho = prepare_fig5_state(56.0, 20.0).unwrap();
    for (m, n, i, j) in [("00", "11", 0, 3), ("01", "10", 1, 2), ("00", "01", 0, 1)] {
        let v = json(&[
            "measure", "--state", "fig5", "--theta", "56", "--phi", "20", "--m", m, "--nn", n, "--exact",
        ]);
        let est = &v["result"]["estimate"];
        let want = rho.entry(i, j);
        assert!((num(&est["re"]) - want.re).abs() < 1e-10);
        assert!((num(&est["im"]) - want.im).abs() < 1e-10);
    }
}

#[test]
fn measure_with_noise_and_branches() {
    let args = ["measure", "--state", "ghz3", "--m", "000", "--nn", "111", "--exact", "--werner-p", "0.75"];
    let raw = json(&args);
    assert!((num(&raw["result"]["estimate"]["re"]) - 0.375).abs() < 1e-12);
    let mut fixed = args.to_vec();
    fixed.extend(["--p", "0.75", "--dump-branches"]);
    let v = json(&fixed);
    assert!((num(&v["result"]["estimate"]["re"]) - 0.5).abs() < 1e-12);
    assert_eq!(v["result"]["branches"]["branches"].as_array().unwrap().len(), 64);
}

#[test]
fn measure_exit_codes() {
    let unmeasurable = teleprobe(&["measure", "--state", "basis:01", "--m", "00", "--nn", "11", "--exact"]);
    assert_eq!(unmeasurable.status.code(), Some(4));
    let starved = teleprobe(&["measure", "--state", "basis:01", "--m", "00", "--nn", "11", "--shots", "100"]);
    assert_eq!(starved.status.code(), Some(4));
    assert_eq!(teleprobe(&["measure", "--m", "00", "--nn", "11"]).status.code(), Some(2));
    assert_eq!(teleprobe(&["measure", "--state", "epr", "--m", "000", "--nn", "111"]).status.code(), Some(2));
    assert_eq!(teleprobe(&["measure", "--state", "epr", "--exact", "--shots", "5"]).status.code(), Some(2));
    assert_eq!(
        teleprobe(&["measure", "--state", "epr", "--m", "00", "--nn", "11", "--werner-p", "2"]).status.code(),
        Some(2)
    );
}

#[test]
fn sampled_measure_is_byte_identical() {
    let args = ["measure", "--state", "epr", "--m", "00", "--nn", "11", "--shots", "100000", "--seed", "7"];
    let a = teleprobe(&args);
    let b = teleprobe(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["result"]["estimate"]["shots"], 100000);
}

#[test]
fn scan_and_tomo() {
    let s = json(&["scan", "--state", "ghz3", "--exact"]);
    assert_eq!(s["result"]["settings_used"], 2);
    assert_eq!(s["result"]["tomography_settings"], "27");
    assert!((num(&s["result"]["fidelity"]) - 1.0).abs() < 1e-9);
    let t = json(&["tomo", "--state", "epr", "--exact"]);
    assert_eq!(t["result"]["settings_used"], 9);
    assert!((num(&t["result"]["fidelity"]) - 1.0).abs() < 1e-10);
    let degenerate = teleprobe(&["scan", "--state", "mixed2", "--exact", "--threshold", "0.5"]);
    assert_eq!(degenerate.status.code(), Some(2));
}

#[test]
fn compare_exit_status_follows_tolerance() {
    let ok = teleprobe(&[
        "compare", "--state", "fig5", "--theta", "56", "--phi", "20", "--tol", "1e-8", "--exact",
    ]);
    assert!(ok.status.success());
    let loose = teleprobe(&["compare", "--state", "fig5", "--shots", "2000", "--seed", "1", "--tol", "1e-6"]);
    assert_eq!(loose.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&loose.stdout).unwrap();
    assert_eq!(v["result"]["pass"], false);
}

#[test]
fn bench_classes_and_fit() {
    let v = json(&["bench", "--fit", "0.88"]);
    let b = v["result"]["benchmarks"].as_array().unwrap();
    assert_eq!(b.len(), 3);
    for rec in b {
        assert!((num(&rec["process_fidelity"]) - 1.0).abs() < 1e-10);
    }
    let fits = v["result"]["fits"].as_array().unwrap();
    assert!(fits.iter().all(|f| num(&f["residual"]).abs() < 1e-9));
    let one = json(&["bench", "--class", "011", "--werner-p", "0.5"]);
    assert_eq!(one["result"]["benchmarks"][0]["ghz_width"], 3);
}

#[test]
fn csv_output() {
    let out =
        teleprobe(&["measure", "--state", "epr", "--m", "00", "--nn", "11", "--exact", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,n,re,im,stderr_re,stderr_im,shots,accepted,p"));
    assert!(lines.next().unwrap().starts_with("00,11,0.5"));
    let scan = teleprobe(&["scan", "--state", "ghz3", "--exact", "--format", "csv"]);
    assert_eq!(String::from_utf8(scan.stdout).unwrap().lines().count(), 9);
}

#[test]
fn config_files_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"state": "epr", "m": "00", "n": "11", "noise": {"ghz_werner_p": 0.5}}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let v = json(&["measure", "--config", cfg]);
    assert!((num(&v["result"]["estimate"]["re"]) - 0.25).abs() < 1e-12);
    let v = json(&["measure", "--config", cfg, "--werner-p", "1"]);
    assert!((num(&v["result"]["estimate"]["re"]) - 0.5).abs() < 1e-12);
    let emitted = json(&["measure", "--config", cfg, "--seed", "9", "--emit-config"]);
    assert_eq!(emitted["seed"], 9);
    assert_eq!(emitted["noise"]["ghz_werner_p"], 0.5);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"shotz": 3}"#).unwrap();
    assert_ne!(teleprobe(&["measure", "--config", bad.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn state_files() {
    let dir = tempfile::tempdir().unwrap();
    let pure = dir.path().join("pure.json");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    fs::write(&pure, format!(r#"{{"num_qubits": 2, "amplitudes": [[{h}, 0], [0, 0], [0, 0], [0, {h}]]}}"#))
        .unwrap();
    let v = json(&["measure", "--state-file", pure.to_str().unwrap(), "--m", "00", "--nn", "11", "--exact"]);
    assert!((num(&v["result"]["estimate"]["im"]) + 0.5).abs() < 1e-12);
    let mixed = dir.path().join("mixed.json");
    fs::write(&mixed, r#"{"num_qubits": 1, "entries": [[0.5, 0], [0.25, 0], [0.25, 0], [0.5, 0]]}"#).unwrap();
    let v = json(&["measure", "--state-file", mixed.to_str().unwrap(), "--m", "0", "--nn", "1", "--exact"]);
    assert!((num(&v["result"]["estimate"]["re"]) - 0.25).abs() < 1e-12);
    let both = teleprobe(&["measure", "--state", "epr", "--state-file", "x.json", "--m", "00", "--nn", "11"]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_teleprobe"))
        .args(["tomo", "--state", "epr", "--exact", "--format", "csv"])
        .env("TELEPROBE_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(dir.path().join("tomo.csv")).unwrap();
    assert_eq!(text.lines().count(), 17);
    let explicit = dir.path().join("nested/out.json");
    let out = Command::new(env!("CARGO_BIN_EXE_teleprobe"))
        .args(["plan", "--m", "0", "--nn", "1", "--out", explicit.to_str().unwrap()])
        .env("TELEPROBE_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(explicit.exists());
}

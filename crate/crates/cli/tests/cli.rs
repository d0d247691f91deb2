use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_conic-spectra"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--out", dir.to_str().unwrap()]);
    run(&all)
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn csv_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

#[test]
fn dodziuk_identity() {
    let out = run(&["dodziuk", "--lambda", "2", "--eta", "0", "--n", "2", "--p", "1"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "[2, 2]");
}

#[test]
fn dodziuk_rejects_negative_eta() {
    let out = run(&["dodziuk", "--lambda", "2", "--eta=-1", "--n", "2", "--p", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let record: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"]["kind"], "domain");
}

#[test]
fn modes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["modes"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let lines = csv_lines(&dir.path().join("modes.csv"));
    assert!(lines[0].starts_with("# conic-spectra "));
    assert!(lines[0].contains("config-sha256="));
    assert_eq!(lines[1], "n,q,k,mu_sq,mult,family,gamma,degree");
    assert!(lines.len() > 10);
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["command"], "modes");
}

#[test]
fn sweep_is_deterministic_and_passes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = write_config(a.path(), r#"{"epsilons": [0.2, 0.1], "k": 2}"#);
    let ra = run_in(a.path(), &["sweep", "--config", &cfg, "--svg"]);
    let rb = run_in(b.path(), &["sweep", "--config", &cfg, "--svg", "--jobs", "1"]);
    // two ε values are not enough to separate the boundary-ratio trend, but all checks should hold
    assert!(ra.status.success(), "{}", String::from_utf8_lossy(&ra.stdout));
    assert!(rb.status.success());
    let lines = csv_lines(&a.path().join("sweep.csv"));
    assert_eq!(lines[1], "epsilon,p,k,lambda_eps,lambda_m1,abs_err,rel_err,bord_ratio,mcgowan,zero_count");
    assert_eq!(lines.len(), 2 + 2 * 2 * 2);
    for name in ["sweep.csv", "plots/error_p0.svg", "plots/error_p1.svg"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let ja: Value = serde_json::from_str(&fs::read_to_string(a.path().join("report.json")).unwrap()).unwrap();
    let jb: Value = serde_json::from_str(&fs::read_to_string(b.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(ja["checks"], jb["checks"]);
    assert_eq!(ja["details"], jb["details"]);
}

#[test]
fn json_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"epsilons": [0.1], "degrees": [0], "lambda_max": 20}"#);
    let out = run_in(dir.path(), &["spectrum", "--config", &cfg, "--format", "json"]);
    assert!(out.status.success());
    let table: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("spectrum.json")).unwrap()).unwrap();
    let rows = table["rows"].as_array().unwrap();
    assert_eq!(rows[0]["model"], "M1");
    assert_eq!(rows[0]["lambda"], 0.0);
    assert!(rows.iter().any(|r| r["model"] == "M_eps(0.1)"));
}

#[test]
fn both_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"epsilons": [0.1], "degrees": [1, 2], "lambda_max": 20, "solver": {"method": "both"}}"#,
    );
    let out = run_in(dir.path(), &["spectrum", "--config", &cfg]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("PASS hodge_duality"));
}

#[test]
fn aps_kernel_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["aps-kernel"]);
    assert!(out.status.success());
    let k: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("aps_kernel.json")).unwrap()).unwrap();
    for d in k["kernel"]["degrees"].as_array().unwrap() {
        if d["p"] == 1 || d["p"] == 2 {
            assert_eq!(d["dimension"], 0);
        }
    }
    for row in k["l2_extension"].as_array().unwrap() {
        assert_eq!(row["l2_extension"].as_bool().unwrap(), row["gamma"].as_f64().unwrap() > 0.5);
    }
}

#[test]
fn schema_violations_exit_nonzero_with_record() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [r#"{"lamda_max": 3}"#, r#"{"epsilons": [0.1, 0.2]}"#, "not json"] {
        let cfg = write_config(dir.path(), bad);
        let out = run_in(&dir.path().join("out"), &["modes", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        let record: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(record["command"], "modes");
        assert_eq!(record["error"]["kind"], "domain");
        assert!(!record["error"]["message"].as_str().unwrap().is_empty());
    }
}

#[test]
fn solver_errors_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    // M₂ must start with a boundary at radius 1
    let cfg = write_config(dir.path(), r#"{"m2": {"kind": "spindle", "radius": 1.0}}"#);
    let out = run_in(dir.path(), &["aps-kernel", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let record: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("error.json")).unwrap()).unwrap();
    assert_eq!(record["error"]["kind"], "invalid_profile");
}

#[test]
fn schema_is_printed() {
    let out = run(&["schema"]);
    assert!(out.status.success());
    let schema: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(schema["title"], "RunConfig");
}

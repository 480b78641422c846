use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const REF_ARGS: [&str; 14] = [
    "--N", "3", "--p", "2", "--q", "2", "--r", "3", "--mu", "0", "--sigma", "0", "--s", "1",
];

fn ckn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ckn"))
        .args(args)
        .output()
        .expect("ckn runs")
}

fn with_ref(command: &str, extra: &[&str]) -> Output {
    let mut args = vec![command];
    args.extend(REF_ARGS);
    args.extend(extra);
    ckn(&args)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_reference_passes_every_check() {
    let out = with_ref("validate", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = json(&out);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["report"]["valid"], true);
    let checks = doc["report"]["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["satisfied"] == true));
}

#[test]
fn validate_csv_lists_checks() {
    let out = with_ref("validate", &["--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("check,"));
    assert!(lines.any(|l| l.starts_with("\"s>0\"")));
}

#[test]
fn exponents_match_hand_values_and_are_byte_stable() {
    let first = with_ref("exponents", &[]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let doc = json(&first);
    let ex = &doc["exponents"];
    assert!((ex["a"].as_f64().unwrap() - 5.0 / 6.0).abs() < 1e-15);
    assert!((ex["lambda_star"].as_f64().unwrap() - 0.0669796).abs() < 1e-7);
    assert_eq!(first.stdout, with_ref("exponents", &[]).stdout);
}

#[test]
fn solve_rejects_zero_s_naming_the_check() {
    let mut args = vec!["solve"];
    args.extend(&REF_ARGS[..12]);
    args.extend(["--s", "0"]);
    let out = ckn(&args);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("s>0"), "{}", stderr(&out));
}

#[test]
fn solve_writes_result_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("ref.json");
    let profile = dir.path().join("phi.csv");
    let out = with_ref(
        "solve",
        &[
            "--n",
            "1201",
            "--out",
            out_path.to_str().unwrap(),
            "--profile",
            profile.to_str().unwrap(),
            "--trace",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: Value = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(doc["command"], "solve");
    assert_eq!(doc["result"]["converged"], true);
    assert!((doc["result"]["rho"].as_f64().unwrap() - 2.4649).abs() < 1e-3);
    assert!(doc["result"]["energy_trace"].as_array().is_some_and(|t| !t.is_empty()));
    let csv = std::fs::read_to_string(&profile).unwrap();
    assert_eq!(csv.lines().next(), Some("tau,value"));
    assert_eq!(csv.lines().count(), 1202);
}

#[test]
fn solve_omits_trace_unless_asked() {
    let out = with_ref("solve", &["--n", "601"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(json(&out)["result"].get("energy_trace").is_none());
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "c.json",
        r#"{"command":"exponents","N":3,"p":2,"q":2,"r":3,"mu":0,"sigma":0,"s":0.5}"#,
    );
    let from_file = json(&ckn(&["--config", &config]));
    assert_eq!(from_file["params"]["s"], 0.5);
    let overridden = json(&ckn(&["--config", &config, "--s", "1"]));
    assert_eq!(overridden["params"]["s"], 1.0);
    assert_eq!(overridden["exponents"], json(&with_ref("exponents", &[]))["exponents"]);
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ckn(&["validate", "--p", "two"]).status.code(), Some(2));
    assert_eq!(ckn(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ckn(&["validate", "--N", "3"]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.json", r#"{"command":"validate","N":3,"wat":1}"#);
    assert_eq!(ckn(&["--config", &bad]).status.code(), Some(2));
    let broken = write(dir.path(), "broken.json", "{not json");
    assert_eq!(ckn(&["--config", &broken]).status.code(), Some(2));
    assert_eq!(ckn(&["sweep"]).status.code(), Some(2));
}

#[test]
fn sweep_emits_one_row_per_tuple_with_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "tuples.json",
        r#"[
            {"N":3,"p":2,"q":2,"r":3,"mu":0,"sigma":0,"s":0.5},
            {"N":3,"p":2,"q":2,"r":3,"mu":0,"sigma":0,"s":1.5},
            {"N":3,"p":2,"q":2,"r":3,"mu":0,"sigma":0,"s":1}
        ]"#,
    );
    let out = ckn(&["sweep", "--input", &input, "--n", "1201"]);
    assert_eq!(out.status.code(), Some(1), "one tuple is invalid");
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    let error_col = headers.iter().position(|h| h == "error").unwrap();
    let rho_col = headers.iter().position(|h| h == "rho").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0][error_col].is_empty());
    assert!(rows[1][error_col].contains("r<min"));
    assert!(rows[1][rho_col].is_empty());
    let rho: Vec<f64> = [0, 2].map(|i| rows[i][rho_col].parse().unwrap()).to_vec();
    assert!(rho[0] > rho[1]);
}

#[test]
fn verify_flags_an_undersized_constant() {
    let out = with_ref("verify", &["--n", "1201", "--c", "0.3", "--samples", "40"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["c_source"], "flag");
    assert!(doc["report"]["violations"].as_u64().unwrap() > 0);
}

#[test]
fn eigen_reports_the_ball_eigenvalue() {
    let out = ckn(&[
        "eigen", "--N", "3", "--p", "2", "--q", "2", "--mu", "0", "--sigma", "0", "--n", "1001",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = json(&out);
    let lambda1 = doc["result"]["lambda1"].as_f64().unwrap();
    assert!((lambda1 - std::f64::consts::PI.powi(2)).abs() < 1e-2, "{lambda1}");
}

//! Exit codes and outputs of the command-line tool.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_starkq");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("STARKQ_PRECISION")
        .output()
        .expect("binary runs")
}

fn fixture_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
        .display()
        .to_string()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn verify_prints_report_and_exits_zero() {
    let o = run(&["verify", &fixture_path("sqrt10")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    assert_eq!(r["index"]["m"], "256");
    assert_eq!(r["precision_bits"], 128);
}

#[test]
fn precision_flag_and_environment() {
    let o = run(&["--precision", "160", "verify", &fixture_path("sqrt10")]);
    assert_eq!(stdout_json(&o)["requested_precision_bits"], 160);
    let o = Command::new(BIN)
        .args(["verify", &fixture_path("sqrt10")])
        .env("STARKQ_PRECISION", "192")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&o)["requested_precision_bits"], 192);
}

#[test]
fn report_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["verify", &fixture_path("sqrt42"), "--report", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["burns"]["verdict"]["lowest"], 4);
}

#[test]
fn false_verdict_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut b: Value = serde_json::from_str(&std::fs::read_to_string(fixture_path("sqrt42")).unwrap()).unwrap();
    // a principal P leaves Cl_S = Cl, where 2 m^2 beta e' acts as 7
    b["class_group"]["s_place_classes"]["P"] = serde_json::json!([0]);
    let path = dir.path().join("b.json");
    std::fs::write(&path, b.to_string()).unwrap();
    let o = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        stdout_json(&o)["burns"]["verdict"]["statements"],
        serde_json::json!([false, false, false, false])
    );
}

#[test]
fn invalid_input_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "not json").unwrap();
    assert_eq!(run(&["verify", path.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(run(&["verify", "/nonexistent/bundle.json"]).status.code(), Some(3));
    assert_eq!(run(&["fixture", "nope"]).status.code(), Some(3));
}

#[test]
fn fixture_verb_emits_bundle() {
    let o = run(&["fixture", "sqrt3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["metadata"]["conductor_norm"], "225");
}

#[test]
fn batch_and_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    for name in ["sqrt3", "sqrt10", "sqrt42"] {
        std::fs::copy(fixture_path(name), dir.path().join(format!("{name}.json"))).unwrap();
    }
    let o = run(&[
        "batch",
        dir.path().to_str().unwrap(),
        "--jobs",
        "2",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("total: 3"));

    let reports: Vec<String> = ["sqrt3", "sqrt10", "sqrt42"]
        .iter()
        .map(|n| out.path().join(format!("{n}.report.json")).display().to_string())
        .collect();
    let mut args = vec!["summarize"];
    args.extend(reports.iter().map(String::as_str));
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(
        text.contains("galois_nonabelian") && text.contains("total: 3"),
        "{text}"
    );

    std::fs::write(dir.path().join("zz_broken.json"), "{").unwrap();
    let o = run(&["batch", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stdout).contains("total: 3"));
}

#[test]
fn batch_empty_directory_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["batch", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("total: 0"));
}

#[test]
fn derive_lvalues_reproduces_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lv.json");
    let o = run(&[
        "--precision",
        "320",
        "derive-lvalues",
        &fixture_path("sqrt3_nolv"),
        "--beta",
        "43,-19,-24/1393",
        "--digits",
        "90",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let b: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let shipped: Value = serde_json::from_str(&std::fs::read_to_string(fixture_path("sqrt3")).unwrap()).unwrap();
    assert_eq!(b["l_values"]["entries"], shipped["l_values"]["entries"]);
}

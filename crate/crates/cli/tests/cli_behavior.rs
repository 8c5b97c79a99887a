//! End-to-end runs of the binary: exit codes, report shape, byte
//! determinism, the pinned golden report, and print-then-parse identity
//! for every polynomial string the reports emit.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use psl_core::multipoly::{parse_poly, VarSet};
use psl_core::rings::Ring;
use serde_json::Value;

fn task_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/tasks").join(name)
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn run(kind: &str, task: &str, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psl"))
        .arg(kind)
        .arg("--input")
        .arg(task_path(task))
        .args(extra)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn kind_of(task: &str) -> String {
    let raw = fs::read_to_string(task_path(task)).unwrap();
    let v: Value = serde_json::from_str(&raw).unwrap();
    v["kind"].as_str().unwrap().to_string()
}

fn all_fixtures() -> Vec<String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/tasks");
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    names
}

#[test]
fn monomial_connection_curvature_and_exit_code() {
    let out = run("differential", "differential_rank1_f3.json", &[]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["result"]["curvature"][0][0][0], "0");
    assert_eq!(r["result"]["curvature"][1][0][0], "-X1 + X1^3*X2^2");
    assert_eq!(r["result"]["lagrangian"], Value::Bool(false));
    assert_eq!(r["verdict"], Value::Bool(false));
    assert_eq!(r["tool"]["name"], "psl");
}

#[test]
fn ideal_route_agrees_on_the_monomial_connection() {
    let out = run("differential", "differential_rank1_f3.json", &["--mode", "ideal"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["result"]["lagrangian"], Value::Bool(false));
    assert_eq!(r["result"]["certificate"]["witness"]["normal_form"], "1");
}

#[test]
fn unknown_kind_is_a_schema_error() {
    let out = run("foo", "differential_rank1_f3.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["type"], "schema");
}

#[test]
fn ideal_mode_is_refused_for_q_tasks() {
    let out = run("q", "q_order2_f5.json", &["--mode", "ideal"]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["type"], "unsupported_mode");
}

#[test]
fn parse_errors_carry_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"kind":"differential","ring":{"modulus":3},"connection":{"a":[[["x1 + % x2"]],[["0"]]]}}"#,
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_psl"))
        .args(["differential", "--input"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["type"], "parse");
    assert!(err["error"]["message"].as_str().unwrap().contains("byte"));
}

#[test]
fn degree_guardrail_rejects_huge_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("deg.json");
    fs::write(
        &path,
        r#"{"kind":"differential","ring":{"modulus":3},"connection":{"a":[[["x1^600"]],[["0"]]]}}"#,
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_psl"))
        .args(["differential", "--input"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["type"], "degree_exceeded");
}

#[test]
fn verdicts_map_to_exit_codes() {
    for (task, expect) in [
        ("q_order2_f5.json", 1),
        ("certify_graph_f5.json", 0),
        ("lift_local_rank3.json", 1),
        ("isogeny_doubled.json", 0),
        ("bernstein_z4.json", 0),
        ("mutate_rank2_pentagon.json", 0),
        ("compatible_principal.json", 0),
        ("sp_twist_rotation.json", 0),
    ] {
        let out = run(&kind_of(task), task, &[]);
        assert_eq!(out.status.code(), Some(expect), "{task}");
    }
}

#[test]
fn oracle_reruns_agree() {
    let out = run("differential", "differential_rank1_f3.json", &["--oracle"]);
    let r = report(&out);
    assert_eq!(r["result"]["oracle"]["agrees"], Value::Bool(true));

    let out = run("q", "q_order2_f5.json", &["--oracle"]);
    let r = report(&out);
    assert_eq!(r["result"]["oracle"]["agrees"], Value::Bool(true));
}

#[test]
fn every_report_is_byte_deterministic() {
    for task in all_fixtures() {
        let kind = kind_of(&task);
        let first = run(&kind, &task, &[]);
        let second = run(&kind, &task, &[]);
        assert_eq!(first.stdout, second.stdout, "{task}");
        assert_eq!(first.status.code(), second.status.code(), "{task}");

        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("report.json");
        let third = Command::new(env!("CARGO_BIN_EXE_psl"))
            .arg(&kind)
            .arg("--input")
            .arg(task_path(&task))
            .arg("--output")
            .arg(&file)
            .output()
            .unwrap();
        assert!(third.stdout.is_empty());
        assert_eq!(fs::read(&file).unwrap(), first.stdout, "{task}");
    }
}

#[test]
fn lift_report_matches_the_pinned_golden_file() {
    let out = run("lift_check", "lift_local_rank3.json", &[]);
    assert_eq!(out.status.code(), Some(1));
    let golden = fs::read(golden_path("lift_local_rank3_report.json")).unwrap();
    assert_eq!(out.stdout, golden);
}

fn lambda_parts(forms: &Value) -> Value {
    Value::Array(forms.as_array().unwrap().iter().map(|f| f["lambda"].clone()).collect())
}

/// Walks the listed result paths, collects every string leaf, and checks
/// that parsing it back and printing reproduces the string exactly.
fn assert_round_trip(value: &Value, ring: &Ring, vars: &Arc<VarSet>) {
    match value {
        Value::String(s) => {
            let parsed = parse_poly(s, ring, vars)
                .unwrap_or_else(|e| panic!("\"{s}\" does not parse back: {e}"));
            assert_eq!(&parsed.to_string(), s);
        }
        Value::Array(items) => items.iter().for_each(|v| assert_round_trip(v, ring, vars)),
        Value::Object(m) => m.values().for_each(|v| assert_round_trip(v, ring, vars)),
        _ => {}
    }
}

#[test]
fn emitted_polynomials_parse_back_to_themselves() {
    let f3 = Ring::prime_field(3).unwrap();
    let f5 = Ring::prime_field(5).unwrap();
    let local = {
        let z9 = Ring::integer_residue(9).unwrap();
        let s = Ring::monic_quotient(&z9, &[-3, 0, 1]).unwrap();
        let u = s.gen_u().unwrap();
        s.declare_maximal_ideal(&[u]).unwrap()
    };
    let x2 = VarSet::numbered("x", 2, false);
    let cap2 = VarSet::numbered("X", 2, false);
    let x2t = VarSet::numbered("x", 2, true);
    let cap2t = VarSet::numbered("X", 2, true);
    let xp = VarSet::concat(&VarSet::numbered("X", 2, false), &VarSet::numbered("P", 2, false));

    let diff = report(&run("differential", "differential_rank1_f3.json", &[]))["result"].clone();
    assert_round_trip(&diff["curvature_x"], &f3, &x2);
    assert_round_trip(&diff["curvature"], &f3, &cap2);
    assert_round_trip(&lambda_parts(&diff["eigenvalue_forms"]), &f3, &cap2);
    assert_round_trip(&diff["witness"], &f3, &cap2);

    let ideal = report(&run("differential", "differential_rank1_f3.json", &["--mode", "ideal"]))
        ["result"]
        .clone();
    assert_round_trip(&ideal["ideal"], &f3, &cap2);
    assert_round_trip(&ideal["certificate"]["groebner"], &f3, &cap2);
    assert_round_trip(&ideal["certificate"]["witness"], &f3, &cap2);

    let q = report(&run("q", "q_order2_f5.json", &[]))["result"].clone();
    assert_round_trip(&q["curvature_x"], &f5, &x2t);
    assert_round_trip(&q["curvature"], &f5, &cap2t);
    assert_round_trip(&lambda_parts(&q["eigenvalue_forms"]), &f5, &cap2t);
    assert_round_trip(&q["witness"], &f5, &cap2t);

    let lift = report(&run("lift_check", "lift_local_rank3.json", &[]))["result"].clone();
    assert_round_trip(&lift["flat_over_s"]["witness"], &local, &x2);

    let cert = report(&run("certify", "certify_graph_f5.json", &[]))["result"].clone();
    assert_round_trip(&cert["certificate"]["groebner"], &f5, &xp);
}

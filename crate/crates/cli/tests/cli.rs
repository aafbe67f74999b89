use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn qmeas(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qmeas")).args(args).env_remove("QMEAS_TOL_ATOL").output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let (code, out, _) = qmeas(&all);
    (code, serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}")))
}

fn gen(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(format!("{name}{}.json", extra.join("")));
    let p = path.to_str().unwrap();
    let mut args = vec!["gen", name, "--out", p];
    args.extend_from_slice(extra);
    assert_eq!(qmeas(&args).0, 0, "gen {name}");
    p.to_string()
}

#[test]
fn classify_reports_norm1_and_sharp_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = json(&["classify", &gen(dir.path(), "ideality", &["--observable"])]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["is_norm1"], true);
    let (_, r) = json(&["classify", &gen(dir.path(), "extremal", &["--observable"])]);
    assert_eq!(r["result"]["is_sharp"], true);
    assert_eq!(r["result"]["per_effect_ranks"], serde_json::json!([2, 2]));
}

#[test]
fn checks_map_verdicts_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(qmeas(&["check", "channel-thirdlaw", &gen(d, "rank-one-image", &[])]).0, 0);
    assert_eq!(qmeas(&["check", "scheme-thirdlaw", &gen(d, "pure-swap-scheme", &[])]).0, 1);
    let shift = gen(d, "shift-model", &[]);
    assert_eq!(qmeas(&["check", "firstkind", &shift]).0, 0);
    assert_eq!(qmeas(&["check", "repeatable", &shift]).0, 1);
    assert_eq!(qmeas(&["check", "extremal", &gen(d, "extremal", &[])]).0, 0);
    let (code, r) = json(&["check", "ideal", &gen(d, "ideality", &[])]);
    assert_eq!((code, r["verdict"].as_str().unwrap()), (0, "true"));
    let (code, r) = json(&["check", "ideal", &gen(d, "luders-scheme", &[])]);
    assert_eq!((code, r["verdict"].as_str().unwrap()), (1, "not_applicable"));
    let (code, r) = json(&[
        "check",
        "nondisturbance",
        &gen(d, "nondisturbance", &[]),
        "--against",
        &gen(d, "nondisturbance-f", &[]),
    ]);
    assert_eq!(code, 0);
    assert!(r["result"]["residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let bad = d.join("bad.json");
    std::fs::write(
        &bad,
        r#"{"schema_version":"1","kind":"observable","dims":[2],"payload":{"effects":[[[[0.5,0],[0,0]],[[0,0],[0.3,0]]],[[[0.5,0],[0,0]],[[0,0],[0.3,0]]]]}}"#,
    )
    .unwrap();
    let (code, r) = json(&["classify", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(r["result"]["error"].as_str().unwrap().contains("residual"));
    assert_eq!(qmeas(&["check", "channel-thirdlaw", &gen(d, "shift-model", &[])]).0, 2);
    assert_eq!(qmeas(&["check", "nondisturbance", &gen(d, "nondisturbance", &[])]).0, 2);
    assert_eq!(qmeas(&["classify", d.join("missing.json").to_str().unwrap()]).0, 2);
    assert_eq!(qmeas(&["demo", "nope"]).0, 2);
    assert_eq!(qmeas(&["frobnicate"]).0, 2);
    assert_eq!(qmeas(&["table1", "--tol-atol", "0.5"]).0, 2);
    assert_eq!(qmeas(&["--help"]).0, 0);
}

#[test]
fn table1_matches_and_echoes_settings() {
    let (code, r) = json(&["table1", "--seed", "7", "--tol-rank", "1e-9"]);
    assert_eq!(code, 0);
    assert_eq!(r["seed"], 7);
    assert_eq!(r["tolerances"]["rank_threshold"], 1e-9);
    assert_eq!(r["result"]["matches_expected"], true);
    let (code, out, _) = qmeas(&["table1"]);
    assert_eq!(code, 0);
    assert!(out.contains("(v) extremal / sharp: ✓ extremal-model"));
    assert!(out.contains("seed        0"));
}

#[test]
fn environment_overrides_the_default_atol() {
    let out = Command::new(env!("CARGO_BIN_EXE_qmeas"))
        .args(["table1", "--json"])
        .env("QMEAS_TOL_ATOL", "1e-7")
        .output()
        .unwrap();
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["tolerances"]["atol_equality"], 1e-7);
}

#[test]
fn demos_report_their_key_numbers() {
    let (code, r) = json(&["demo", "purify"]);
    assert_eq!(code, 0);
    assert!(r["result"]["fidelity"].as_f64().unwrap() > 1.0 - 1e-9);
    let (code, r) = json(&["demo", "luders-scheme", "--seed", "3"]);
    assert_eq!(code, 0);
    assert!(r["result"]["residual_to_luders"].as_f64().unwrap() < 1e-9);
    let (code, r) = json(&["demo", "decompose"]);
    assert_eq!(code, 0);
    let b = &r["result"]["blocks"][0];
    assert_eq!((b["dim_k"].as_u64(), b["dim_r"].as_u64()), (Some(2), Some(2)));
    assert!(b["omega_distance_to_xi"].as_f64().unwrap() < 1e-8);
}

#[test]
fn exported_catalog_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = json(&["gen", "all", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    let tol = qmeas_core::Tolerances::default();
    for f in r["result"]["files"].as_array().unwrap() {
        let text = std::fs::read_to_string(f.as_str().unwrap()).unwrap();
        let model = qmeas_core::io::parse_model(&text, &tol).unwrap();
        assert_eq!(qmeas_core::io::to_json_string(&model), text);
    }
    let (a, b) = (qmeas(&["gen", "random-scheme", "--seed", "4"]).1, qmeas(&["gen", "random-scheme", "--seed", "4"]).1);
    assert_eq!(a, b);
    assert_ne!(a, qmeas(&["gen", "random-scheme", "--seed", "5"]).1);
}

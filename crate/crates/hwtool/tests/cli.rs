use std::path::PathBuf;
use std::process::Command;

use hwcore::exp_sums::build_torsor;
use hwcore::ff_tower::Fe;
use hwcore::weight_datum::{characteristic_index, validate_datum};
use hwtool::config::{OrbitJson, OrbitType};
use hwtool::suites::torsor_suite;
use hwtool::{RunConfig, Status, Suite};
use serde_json::Value;

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn hwtool(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hwtool")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn write_config(dir: &tempfile::TempDir, text: &str) -> String {
    let p = dir.path().join("c.json");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn validate_minimal_datum() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(&dir, r#"{"q": 3, "orbits": [{"type": "polarized", "d": 1}]}"#);
    let (code, out) = hwtool(&["validate", "--config", &c]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["schema"], "hwtool.report/v1");
    assert_eq!(r["datum"]["labels"], serde_json::json!(["0+0", "0-0"]));
    assert_eq!(r["datum"]["neg"], serde_json::json!(["0-0", "0+0"]));
    assert_eq!(r["datum"]["size"], "9");
}

#[test]
fn self_negative_label_fails() {
    let (code, out) = hwtool(&["validate", "--config", config_path("not_genuine.json").to_str().unwrap()]);
    assert_ne!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["checks"][0]["status"], "fail");
    assert!(r["checks"][0]["reason"].as_str().unwrap().contains("NotGenuine"));
}

#[test]
fn unreadable_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(&dir, "{not json");
    assert_eq!(hwtool(&["validate", "--config", &c]).0, 2);
}

#[test]
fn verify_all_on_unitary_line() {
    let c = config_path("u1_f4.json");
    let (code, out) = hwtool(&["verify-all", "--config", c.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let r: Value = serde_json::from_str(&out).unwrap();
    let checks = r["checks"].as_array().unwrap();
    let traces: Vec<&Value> = checks.iter().filter(|c| c["name"].as_str().unwrap().starts_with("gamma[")).collect();
    assert_eq!(traces.len(), 3);
    let minus: Vec<&&Value> = traces.iter().filter(|c| c["data"]["trace"]["exact"] == "-1").collect();
    assert_eq!(minus.len(), 2);
    // the fixed-locus signs agree with the character suite
    for c in checks.iter().filter(|c| c["name"].as_str().unwrap().starts_with("fixed[")) {
        assert_eq!(c["status"], "pass");
        let label = &c["name"].as_str().unwrap()["fixed".len()..];
        let t = traces.iter().find(|t| &t["name"].as_str().unwrap()["gamma".len()..] == label).unwrap();
        let sign = if t["data"]["trace"]["exact"].as_str().unwrap().starts_with('-') { -1 } else { 1 };
        assert_eq!(c["data"]["trace_sign"], sign);
    }
}

#[test]
fn reports_are_byte_stable() {
    let c = config_path("mixed_graded.json");
    let a = hwtool(&["verify-all", "--config", c.to_str().unwrap()]);
    let b = hwtool(&["verify-all", "--config", c.to_str().unwrap()]);
    assert_eq!(a, b);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let (code, _) = hwtool(&["gauss-sum", "--config", config_path("gauss_x5.json").to_str().unwrap(), "--format", "csv-summary", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let summary = std::fs::read_to_string(&out).unwrap();
    assert!(summary.starts_with("suite,name,status,reason\n"));
    assert!(summary.contains("gauss-sum,S[1].certificate,pass,"));
    let seq = std::fs::read_to_string(dir.path().join("r.sequences.csv")).unwrap();
    assert!(seq.starts_with("check,t,c0"));
    assert!(seq.contains("gauss-sum/S[0].certificate,2,4,"));
}

#[test]
fn empty_suite_selection() {
    let config = RunConfig::from_orbits(2, vec![]);
    let r = hwtool::suites::run(&config, &[]);
    assert!(r.checks.is_empty());
    assert!(r.ok());
    let v: Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["summary"]["pass"], 0);
}

#[test]
fn corrupted_coefficient_reports_both_values() {
    let config = RunConfig::from_orbits(2, vec![OrbitJson { kind: OrbitType::Unitary, d: 2, multiplicity: 1, form: None, scalars: None }]);
    let sp = validate_datum(&config.datum().unwrap(), config.cap()).unwrap();
    let pol = characteristic_index(&sp, &config.polarization()).unwrap();
    let mut ts = build_torsor(&sp, &pol, Fe::ONE, config.cap()).unwrap();
    let clean = torsor_suite(&config, &ts);
    assert!(clean.iter().all(|c| c.status == Status::Pass));
    let a = ts.cycles[0].a[0];
    ts.cycles[0].a[0] = sp.model.add(a, sp.model.from_index(2));
    let checks = torsor_suite(&config, &ts);
    let bad = checks.iter().find(|c| c.name == "oracle").unwrap();
    assert_eq!(bad.status, Status::Fail);
    assert!(bad.data["brute"].is_string() && bad.data["structural"].is_string());
    assert_ne!(bad.data["brute"], bad.data["structural"]);
    let report = hwtool::Report::new(Value::Null, Value::Null, checks);
    assert!(!report.ok());
    let _ = Suite::ALL;
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use radbound_core::bounds::{evaluate, HPairing, Operation};
use radbound_core::ProblemSpec;
use serde::Deserialize;
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn radbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radbound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (Output, Vec<u8>) {
    let out = dir.join(name);
    let mut all = args.to_vec();
    let out_s = out.to_str().unwrap().to_string();
    all.extend(["--out", &out_s]);
    let o = radbound(&all);
    let bytes = std::fs::read(&out).unwrap_or_default();
    (o, bytes)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[derive(Deserialize)]
struct SpecOnly {
    spec: ProblemSpec,
}

fn shipped_spec() -> ProblemSpec {
    let text = std::fs::read_to_string(configs().join("unit_square.toml")).unwrap();
    // the CLI rejects unknown keys; here only [spec] matters
    let v: toml::Table = toml::from_str(&text).unwrap();
    let mut only = toml::Table::new();
    only.insert("spec".into(), v["spec"].clone());
    toml::from_str::<SpecOnly>(&toml::to_string(&only).unwrap()).unwrap().spec
}

fn report_value(doc: &Value, op: &str, key: &str) -> f64 {
    let r = doc["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["operation"]["op"] == op)
        .unwrap_or_else(|| panic!("no {op} report"));
    r["intermediates"][key].as_f64().unwrap_or_else(|| panic!("no {key}"))
}

#[test]
fn bounds_match_library_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("unit_square.toml");
    let (o, bytes) = run_to(dir.path(), "b.json", &["bounds", "--spec", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(doc["schema"], "radbound-bounds/1");

    let spec = shipped_spec();
    let energy = evaluate(&spec, &Operation::Energy { pairing: HPairing::DualOfEll }).unwrap();
    let cinf = evaluate(&spec, &Operation::CInfinity).unwrap();
    let a = energy.intermediate("A_script").unwrap();
    let c = cinf.intermediate("C_infinity").unwrap();
    assert_eq!(report_value(&doc, "energy", "A_script").to_bits(), a.to_bits());
    assert_eq!(report_value(&doc, "c_infinity", "C_infinity").to_bits(), c.to_bits());
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("unit_square.toml");
    let cfg = cfg.to_str().unwrap();
    for (cmd, fmt) in [("bounds", "json"), ("sweep", "csv"), ("regimes", "table")] {
        let (o1, a) = run_to(dir.path(), "1", &[cmd, "--spec", cfg, "--format", fmt, "--seed", "7"]);
        let (o2, b) = run_to(dir.path(), "2", &[cmd, "--spec", cfg, "--format", fmt, "--seed", "7"]);
        assert!(o1.status.success() && o2.status.success());
        assert!(!a.is_empty());
        assert_eq!(a, b, "{cmd} output differs between runs");
    }
}

#[test]
fn zero_data_verify_passes() {
    let cfg = configs().join("zero_data.toml");
    let o = radbound(&["verify", "--spec", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["passed"], true);
    assert!(!doc["records"].as_array().unwrap().is_empty());
}

#[test]
fn unknown_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("unit_square.toml"))
        .unwrap()
        .replace("a_low = 1.0 ", "a_lowest = 1.0 ");
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, text).unwrap();
    let o = radbound(&["bounds", "--spec", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("a_lowest"), "{err}");
    assert!(err.contains("line"), "{err}");
}

#[test]
fn missing_table_is_a_config_error() {
    let cfg = configs().join("zero_data.toml");
    let o = radbound(&["bounds", "--spec", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[spec]"));
}

#[test]
fn small_data_fails_verification() {
    // the Moser-type bounds grow faster than the solution as the data
    // shrink, so small data give a genuine failure
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("unit_square.toml"))
        .unwrap()
        .replace("amp = 60.0", "amp = 0.5");
    let p = dir.path().join("small.toml");
    std::fs::write(&p, text).unwrap();
    let o = radbound(&["verify", "--spec", p.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.lines().any(|l| l.contains("ess_sup[moser]") && l.ends_with("FAIL")), "{csv}");
    assert!(csv.lines().any(|l| l.contains("ess_sup[de_giorgi]") && l.ends_with("pass")));
}

#[test]
fn regime_failure_names_the_hypothesis() {
    // the L¹-data study needs f⃗ = 0; the shipped instance has f⃗ only
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("unit_square.toml"))
        .unwrap()
        .replace("studies = [\"energy\", \"linf\"]", "studies = [\"l1\"]");
    let p = dir.path().join("r.toml");
    std::fs::write(&p, text).unwrap();
    let o = radbound(&["verify", "--spec", p.to_str().unwrap()]);
    let err = stderr(&o);
    assert_eq!(o.status.code(), Some(2), "{err}");
    assert!(err.contains("f⃗=0 in Ω required"), "{err}");
}

#[test]
fn atomic_write_leaves_no_temporaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("unit_square.toml");
    let (o, bytes) = run_to(dir.path(), "r.csv", &["regimes", "--spec", cfg.to_str().unwrap(), "--format", "csv"]);
    assert!(o.status.success());
    assert!(String::from_utf8(bytes).unwrap().starts_with("proposition,applicable,violations"));
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 1, "{names:?}");
}

#[test]
fn tolerance_override_rejudges_records() {
    let cfg = configs().join("zero_data.toml");
    let o = radbound(&["verify", "--spec", cfg.to_str().unwrap(), "--tol", "0.5"]);
    assert!(o.status.success());
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["tol_override"], 0.5);
    assert!(doc["records"].as_array().unwrap().iter().all(|r| r["tol_rel"] == 0.5));
    let bad = radbound(&["verify", "--spec", cfg.to_str().unwrap(), "--tol", "-1"]);
    assert_eq!(bad.status.code(), Some(2));
}

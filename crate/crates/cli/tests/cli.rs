use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_reebforge"));
    c.env_remove("REEBFORGE_PRECISION");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn synth(dir: &Path, spec: &str, extra: &[&str]) -> Output {
    let mut args = vec!["synthesize", "--inline", spec, "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

const C222: &str = r#"{"mode":"circle","vertices":3,"multiplicities":[2,2,2],"dimension":2}"#;
const TORUS: &str = r#"{"mode":"circle","vertices":0,"multiplicities":[],"dimension":2}"#;
const H212: &str = r#"{"mode":"circle","vertices":3,"multiplicities":[2,1,2],"dimension":5,"handles":[{"edge":[2,1],"sequence":[1,0]}]}"#;

#[test]
fn synthesize_222_writes_degree_10_model() {
    let d = tempfile::tempdir().unwrap();
    let o = synth(d.path(), C222, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&d.path().join("model.json"));
    assert_eq!(m["degree"], 10);
    assert_eq!(m["n_vars"], 3);
    assert_eq!(m["config"]["precision_bits"], 128);
    let c = json(&d.path().join("certificate.json"));
    assert_eq!(c["pass"], true);
    assert_eq!(c["oracle"]["equivalent"], true);
    let a = json(&d.path().join("arrangement.json"));
    assert_eq!(a["circles"].as_array().unwrap().len(), 3);
}

#[test]
fn torus_spec_gives_circle_graph() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&synth(d.path(), TORUS, &[])), 0);
    let c = json(&d.path().join("certificate.json"));
    assert_eq!(c["reeb"]["no_vertex_circle"], true);
    assert_eq!(c["degree"]["found"], 4);
    assert_eq!(c["euler"]["closed_form"], 0);
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let o = synth(d.path(), r#"{"mode":"circle","vertices":3,"multiplicities":[1,2,1],"dimension":2}"#, &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("AdjacentUnitPair"));

    let tight = r#"{"mode":"circle","vertices":3,"multiplicities":[5,5,5],"dimension":2,"annulus_halfwidth":"1/10"}"#;
    assert_eq!(code(&synth(d.path(), tight, &[])), 3);

    assert_eq!(code(&synth(d.path(), "{not json", &[])), 2);
    assert_eq!(code(&run(&["synthesize", "--spec", "/nonexistent/spec.json"])), 1);
}

#[test]
fn verify_passes_and_catches_tampering() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&synth(d.path(), C222, &["--oracle-res", "none"])), 0);
    let model = d.path().join("model.json");
    let arr = d.path().join("arrangement.json");
    let out = d.path().join("v");
    let args = |extra: &[&str]| {
        let mut a = vec!["verify", "--model", model.to_str().unwrap(), "--arrangement", arr.to_str().unwrap()];
        a.extend_from_slice(&["--out", out.to_str().unwrap()]);
        a.extend_from_slice(extra);
        a.iter().map(|s| s.to_string()).collect::<Vec<_>>()
    };
    let o = bin().args(args(&[])).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let base = json(&out.join("certificate.json"));

    let o = bin().args(args(&["--precision-bits", "256", "--oracle-res", "none"])).output().unwrap();
    assert_eq!(code(&o), 0);
    let raised = json(&out.join("certificate.json"));
    assert_eq!(raised["precision_bits"], 256);
    assert_eq!(raised["reeb"], base["reeb"]);

    let mut a = json(&arr);
    a["multiplicities"] = serde_json::json!([2, 2, 3]);
    fs::write(&arr, serde_json::to_string(&a).unwrap()).unwrap();
    let o = bin().args(args(&[])).output().unwrap();
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("multiplicities"));
}

#[test]
fn precision_precedence() {
    let d = tempfile::tempdir().unwrap();
    let spec = r#"{"mode":"circle","vertices":3,"multiplicities":[2,2,2],"dimension":2,"precision_bits":96}"#;
    let fast = ["--oracle-res", "none", "--region-points", "1000", "--regularity-points", "50"];
    let p = |o: &Path| json(&o.join("model.json"))["config"]["precision_bits"].as_u64().unwrap();

    assert_eq!(code(&synth(d.path(), spec, &fast)), 0);
    assert_eq!(p(d.path()), 96);

    let mut args = vec!["synthesize", "--inline", spec, "--out", d.path().to_str().unwrap()];
    args.extend_from_slice(&fast);
    let o = bin().args(&args).env("REEBFORGE_PRECISION", "160").output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(p(d.path()), 160);

    args.extend_from_slice(&["--precision-bits", "200"]);
    let o = bin().args(&args).env("REEBFORGE_PRECISION", "160").output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(p(d.path()), 200);

    let o = synth(d.path(), C222, &["--precision-bits", "16"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn synthesize_is_byte_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(code(&synth(a.path(), H212, &[])), 0);
    assert_eq!(code(&synth(b.path(), H212, &[])), 0);
    for f in ["model.json", "arrangement.json", "certificate.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

fn plot(spec: &str) -> String {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&synth(d.path(), spec, &["--oracle-res", "none", "--region-points", "1000"])), 0);
    let svg = d.path().join("a.svg");
    let o = run(&["plot", "--arrangement", d.path().join("arrangement.json").to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    fs::read_to_string(svg).unwrap()
}

#[test]
fn plots() {
    let s = plot(C222);
    assert_eq!(s.matches("<line").count(), 3);
    assert_eq!(s.matches(r##"fill="white" stroke="#b03a2e""##).count(), 3);
    assert_eq!(s, plot(C222));

    let t = plot(TORUS);
    assert_eq!(t.matches("<line").count(), 0);
    assert!(!t.contains("b03a2e"));

    let h = plot(H212);
    assert_eq!(h.matches("stroke-dasharray").count(), 1);
}

#[test]
fn export_and_extend() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&synth(d.path(), TORUS, &["--oracle-res", "none"])), 0);
    let model = d.path().join("model.json");
    let o = run(&["export", "--model", model.to_str().unwrap(), "--format", "text"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("P(x1,x2,x3) = -1*x1^4 - 2*x1^2*x2^2 - 1*x2^4"), "{text}");

    let out = d.path().join("p.json");
    assert_eq!(code(&run(&["export", "--model", model.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let e = json(&out);
    assert_eq!(e["expansion"]["ordering"], "grlex");
    assert_eq!(e["degree"], 4);

    let ext = d.path().join("ext.json");
    assert_eq!(code(&run(&["extend", "--model", model.to_str().unwrap(), "--out", ext.to_str().unwrap()])), 0);
    let x = json(&ext);
    assert_eq!(x["degree"], 4);
    assert_eq!(x["inequality"], "P(x1,...,x3) >= 0");

    let small = run(&["export", "--model", model.to_str().unwrap(), "--guard", "3"]);
    assert_eq!(code(&small), 1);
}

#[test]
fn check_graph_reports_and_rejects_malformed_input() {
    let d = tempfile::tempdir().unwrap();
    let good = d.path().join("g.json");
    fs::write(&good, r#"{"vertices":[{"angle":"0"},{"angle":"1/4"}],"edges":[{"from":0,"to":1}]}"#).unwrap();
    let o = run(&["check-graph", "--graph", good.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["pass"], true);

    let bad = d.path().join("b.json");
    fs::write(&bad, r#"{"vertices":[{"angle":"0"}],"edges":[{"from":0,"to":3}]}"#).unwrap();
    assert_eq!(code(&run(&["check-graph", "--graph", bad.to_str().unwrap()])), 2);
    fs::write(&bad, "[1,2").unwrap();
    assert_eq!(code(&run(&["check-graph", "--graph", bad.to_str().unwrap()])), 2);

    let text = run(&["check-graph", "--graph", good.to_str().unwrap(), "--format", "text"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("overall: pass"));
}

#[test]
fn line_mode_synthesis() {
    let d = tempfile::tempdir().unwrap();
    let spec = r#"{"mode":"line","vertices":5,"multiplicities":[1,3,2,1],"dimension":2}"#;
    let o = synth(d.path(), spec, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let c = json(&d.path().join("certificate.json"));
    let degrees: Vec<u64> = c["reeb"]["vertices"].as_array().unwrap().iter().map(|v| v["degree"].as_u64().unwrap()).collect();
    assert_eq!(degrees, vec![1, 4, 5, 3, 1]);
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mcflab(args: &[&str], lab_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mcflab"));
    cmd.args(args).env_remove("LAB_OUT");
    if let Some(p) = lab_out {
        cmd.env("LAB_OUT", p);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const PAIR: &str = r#"{"scenario":"csf_pair","pair":"disjoint_circles","horizon":0.1,"sample_dt":0.02}"#;
const GRAPH: &str = r#"{"scenario":"graphical_pair","horizon":0.04,"sample_dt":0.01}"#;

#[test]
fn run_writes_verdict_under_out() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "pair.json", PAIR);
    let out = tmp.path().join("out");
    let o = mcflab(&["run", &cfg, "--out", out.to_str().unwrap(), "--frames", "--workers", "2"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&out.join("pair/verdict.json"));
    assert_eq!(v["schema"], "1");
    assert_eq!(v["monotone_count"], true);
    assert!(out.join("pair/frames/frame_0000.svg").is_file());
    let printed: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed, v);
}

#[test]
fn lab_out_sets_the_root() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "graph.json", GRAPH);
    let root = tmp.path().join("env_root");
    let o = mcflab(&["run", &cfg], Some(&root));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(root.join("graph/verdict.json").is_file());
}

#[test]
fn bad_config_exits_nonzero_with_structured_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.json", r#"{"scenario":"csf_pair","horizon":-1,"sample_dt":0.1}"#);
    let o = mcflab(&["run", &cfg, "--out", tmp.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let e: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["schema"], "1");
    assert!(e["error"]["message"].as_str().unwrap().contains("horizon"));
    assert!(e["error"]["code"].is_string());
}

#[test]
fn missing_config_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.json");
    let o = mcflab(&["run", missing.to_str().unwrap()], Some(tmp.path()));
    assert_eq!(o.status.code(), Some(4));
    assert!(serde_json::from_slice::<serde_json::Value>(&o.stderr).is_ok());
}

#[test]
fn suite_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let configs = tmp.path().join("configs");
    fs::create_dir(&configs).unwrap();
    write(&configs, "pair.json", PAIR);
    write(&configs, "graph.json", GRAPH);
    let out = tmp.path().join("out");
    let o = mcflab(&["suite", configs.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&out.join("report.json"));
    assert_eq!(r["total"], 2);
    assert_eq!(r["pass"], 2);
    assert!(out.join("report.txt").is_file());

    fs::remove_file(out.join("report.json")).unwrap();
    let o = mcflab(&["report", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&out.join("report.json"));
    assert_eq!(r["total"], 2);
    assert_eq!(r["unexpected_fail"], 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("total 2"));
}

#[test]
fn suite_keeps_going_past_a_bad_config() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "a_bad.json", r#"{"scenario":"nonsense","horizon":1,"sample_dt":0.1}"#);
    write(tmp.path(), "b_graph.json", GRAPH);
    let out = tmp.path().join("out");
    let o = mcflab(&["suite", tmp.path().to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&out.join("report.json"))["total"], 1);
}

#[test]
fn report_on_empty_directory_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mcflab(&["report", tmp.path().to_str().unwrap()], None);
    assert!(!o.status.success());
    let e: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["schema"], "1");
}

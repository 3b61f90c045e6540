use std::process::{Command, Output};

use serde_json::Value;

fn mgtkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgtkit")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn payload(v: &Value) -> (Value, Value) {
    (v["results"].clone(), v["verdicts"].clone())
}

fn temp(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("mgtkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn lift_report_lists_cases() {
    let out = mgtkit(&["lift", "--inner", "odometer", "--delta", "a", "--delta", "b^-1", "--seeds", "2", "--radius", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let cases = r["results"]["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 4);
    for c in cases {
        for key in ["delta", "seed", "disagreements", "predicted", "match"] {
            assert!(c.get(key).is_some(), "{key} missing");
        }
        assert_eq!(c["match"], Value::Bool(true));
    }
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn lift_cylinder_window() {
    let out = mgtkit(&["lift", "--inner", "bijection:1,0", "--window", "e,a", "--samples", "4000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["cells"].as_array().unwrap().len(), 4);
}

#[test]
fn reports_repeat_across_runs_and_thread_counts() {
    let args = ["lift", "--inner", "odometer", "--seeds", "4", "--seed", "3"];
    let one = Command::new(env!("CARGO_BIN_EXE_mgtkit")).args(args).env("MGTKIT_THREADS", "1").output().unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_mgtkit")).args(args).env("MGTKIT_THREADS", "6").output().unwrap();
    let again = mgtkit(&args);
    assert_eq!(payload(&report(&one)), payload(&report(&many)));
    assert_eq!(payload(&report(&one)), payload(&report(&again)));
}

#[test]
fn configuration_files() {
    let ok = temp("entropy.json", r#"{"experiment": {"kind": "entropy"}, "samples": 20000, "seed": 4}"#);
    let out = mgtkit(&["entropy", "--config", &ok]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["config"]["seed"], 4);

    let unknown = temp("unknown.json", r#"{"experiment": {"kind": "entropy", "colour": 1}}"#);
    assert_eq!(mgtkit(&["entropy", "--config", &unknown]).status.code(), Some(2));
    assert_eq!(mgtkit(&["lift", "--config", &ok]).status.code(), Some(2));
    assert_eq!(mgtkit(&["lift", "--config", "/nonexistent/config.json"]).status.code(), Some(2));

    let forward = temp(
        "forward.json",
        r#"{"experiment": {"kind": "tree-cocycle", "depth": 3, "orientation": "forward"}, "radius": 2, "samples": 4}"#,
    );
    let out = mgtkit(&["cocycle", "--config", &forward]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["pass"], false);
    assert!(r["verdicts"][0]["witness"].is_object());
}

#[test]
fn out_flag_writes_the_report() {
    let path = temp("report.json", "");
    let out = mgtkit(&["groupoid", "validate", "--input", r#"{"kind":"full-relation","n":3}"#, "--out", &path]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["results"]["morphisms"], 9);
}

#[test]
fn groupoid_verbs() {
    let full2 = r#"{"kind":"full-relation","n":2}"#;
    let swap = r#"{"kind":"cyclic-action","order":2,"generator":[1,0]}"#;
    let sum = report(&mgtkit(&["groupoid", "sum", "--input", full2, "--input", swap]));
    assert_eq!(sum["results"]["objects"], 4);
    assert_eq!(sum["results"]["orbits"], 1);
    let semi = report(&mgtkit(&["groupoid", "semidirect", "--input", full2, "--input", swap]));
    assert_eq!(semi["results"]["morphisms"], 16);
    let restricted = report(&mgtkit(&["groupoid", "restrict", "--input", full2, "--objects", "1"]));
    assert_eq!(restricted["results"]["morphisms"], 1);
    let iso = mgtkit(&["groupoid", "iso", "--input", full2, "--input", swap]);
    assert_eq!(iso.status.code(), Some(0));
    let wreath = r#"{"kind":"wreath","lamp":{"kind":"full-relation","n":2},"base":{"kind":"full-relation","n":2}}"#;
    let not_iso = mgtkit(&["groupoid", "iso", "--input", wreath, "--input", full2]);
    assert_eq!(not_iso.status.code(), Some(1));
    let indep = report(&mgtkit(&["groupoid", "indep", "--classes", "0,0,1", "--classes", "0,1,1"]));
    assert_eq!(indep["results"]["structure_graph"]["acyclic"], true);
    assert_eq!(indep["results"]["search"]["verdict"], "independent");
    let cross = mgtkit(&["groupoid", "indep", "--samples", "30"]);
    assert_eq!(report(&cross)["results"]["agreements"], 30);
    assert_eq!(mgtkit(&["groupoid", "wreath", "--input", full2]).status.code(), Some(2));
}

const HOLONOMY: &str = r#"{
  "domain": {"action": {"group": {"kind": "cyclic", "n": 2}, "perms": [[0, 1], [0, 1]]}},
  "target": {"group": {"kind": "cyclic", "n": 2}},
  "values": [0, 0, 0, 1]
}"#;

#[test]
fn cocycle_verbs() {
    let verify = mgtkit(&["cocycle", "verify", "--input", HOLONOMY]);
    assert_eq!(verify.status.code(), Some(0));
    let solve = report(&mgtkit(&["cocycle", "solve", "--input", HOLONOMY]));
    assert_eq!(solve["results"]["outcome"], "none");
    let cob = report(&mgtkit(&["cocycle", "coboundary", "--input", HOLONOMY, "--f", "1,0"]));
    assert_eq!(cob["results"]["cocycle"]["values"], serde_json::json!([0, 0, 0, 1]));
    let broken = HOLONOMY.replace("[0, 0, 0, 1]", "[1, 0, 0, 1]");
    assert_eq!(mgtkit(&["cocycle", "verify", "--input", &broken]).status.code(), Some(1));

    let index = report(&mgtkit(&["cocycle", "index", "--input", r#"{"relations": {"r": [0,0,0,0], "s": [0,0,1,1]}}"#]));
    assert_eq!(index["results"]["index"], 2);
    assert_eq!(index["pass"], true);
    let quotient = mgtkit(&["cocycle", "index", "--input", r#"{"quotient": {"group": {"kind": "cyclic", "n": 4}, "normal": [0, 2]}}"#]);
    assert_eq!(quotient.status.code(), Some(0));
    let trials = report(&mgtkit(&["cocycle", "solve", "--samples", "10"]));
    assert_eq!(trials["results"]["planted_recovered"], 10);
}

const TREE: &str = r#"{
  "tree": {"cayley": {"depth": 3}},
  "target": {"group": {"kind": "symmetric", "n": 3}},
  "labelings": [{"seeded": {"seed": 1, "pair": [0, 1]}}, {"seeded": {"seed": 2}}],
  "gammas": ["a", "ab^-1"],
  "max_len": 2
}"#;

#[test]
fn tree_verbs() {
    let tree = report(&mgtkit(&["cocycle", "tree", "--input", TREE]));
    assert_eq!(tree["pass"], true);
    assert_eq!(tree["results"]["values"].as_array().unwrap().len(), 2);
    let forward = TREE.replace(r#""max_len": 2"#, r#""max_len": 2, "orientation": "forward""#);
    assert_eq!(mgtkit(&["cocycle", "tree", "--input", &forward]).status.code(), Some(1));

    let single = TREE.replace(r#", {"seeded": {"seed": 2}}"#, "");
    let flips = report(&mgtkit(&["cocycle", "flip", "--input", &single, "--gamma", "ab"]));
    assert_eq!(flips["pass"], true);
    let list = flips["results"]["flips"].as_array().unwrap();
    assert_eq!(list.len(), 2);
    assert!(list.iter().all(|f| f["on_geodesic"] == true && f["distance"] == "1"));

    let on = report(&mgtkit(&["cocycle", "flip", "--input", &single, "--gamma", "b"]))["results"]["flips"][0]["edge"]
        .as_u64()
        .unwrap();
    let off = if on == 1 { "2" } else { "1" };
    let loose = report(&mgtkit(&["cocycle", "flip", "--input", &single, "--gamma", "b", "--edge", off]));
    assert_eq!(loose["results"]["flips"][0]["expected"], "0");
    assert_eq!(loose["pass"], true);
    let strict = mgtkit(&["cocycle", "flip", "--input", &single, "--gamma", "b", "--edge", off, "--strict"]);
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn accept_filters_and_mutation() {
    let out = mgtkit(&["accept", "--filter", "coset-defect"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["criteria"].as_array().unwrap().len(), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("[PASS]  3 coset-defect"));

    let csv = temp("accept.csv", "");
    let mutated = mgtkit(&["accept", "--filter", "index-cocycle", "--mutate", "--csv", &csv]);
    assert_eq!(mutated.status.code(), Some(1));
    assert!(report(&mutated)["criteria"][0]["witness"].is_object());
    assert!(std::fs::read_to_string(&csv).unwrap().contains("7,index-cocycle,cocycle,false"));
}

#[test]
fn usage_errors() {
    assert_eq!(mgtkit(&["lift", "--inner", "rotate"]).status.code(), Some(2));
    assert_eq!(mgtkit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(mgtkit(&["cocycle", "verify"]).status.code(), Some(2));
    assert_eq!(mgtkit(&["--version"]).status.code(), Some(0));
}

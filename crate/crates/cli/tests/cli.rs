use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn eqhp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqhp")).args(args).env_remove("EQHP_CONFIG").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write(name: &str, text: &str) -> String {
    let path: PathBuf = [env!("CARGO_TARGET_TMPDIR"), name].iter().collect();
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const Z2: &str = r#"{"units":["e"],"arrows":[{"id":"g","src":"e","tgt":"e"}],"mul":[["g","g","e"]]}"#;

#[test]
fn validate_builtin_pair_groupoid() {
    let o = eqhp(&["validate", "builtin:pair2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "valid: 4 arrows, 1 orbit");
}

#[test]
fn validate_files() {
    let g = write("z2.json", Z2);
    let o = eqhp(&["validate", &g]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "valid: 2 arrows, 1 orbit");
    let m = write("z2_module.json", r#"{"fibers":{"e":["x","y"]},"rho":{"g":[[0,1],[1,0]]}}"#);
    let a = write("z2_algebra.json", r#"{"fibers":{"e":["one"]},"rho":{"g":[[1]]},"mul":{"e":[[[1]]]}}"#);
    let o = eqhp(&["validate", &g, &m, &a]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("module with fiber dimensions [2]") && out.contains("algebra with fiber dimensions [1]"), "{out}");
}

#[test]
fn malformed_multiplication_names_the_arrows() {
    let g = write("bad_z2.json", r#"{"units":["e"],"arrows":[{"id":"g","src":"e","tgt":"e"}],"mul":[["g","g","g"]]}"#);
    let o = eqhp(&["validate", &g]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`g`"), "{}", stderr(&o));
}

#[test]
fn unknown_unit_in_an_algebra_is_rejected() {
    let g = write("z2_for_alg.json", Z2);
    let a = write("stray_algebra.json", r#"{"fibers":{"w":["one"]},"mul":{"w":[[[1]]]}}"#);
    let o = eqhp(&["validate", &g, &a]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains('w'), "{}", stderr(&o));
}

#[test]
fn hp_of_trivial_algebras() {
    let o = eqhp(&["hp", "--groupoid", "builtin:pair2", "--source", "trivial", "--target", "trivial"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!((v["even"].clone(), v["odd"].clone(), v["reduction"].clone()), (1.into(), 0.into(), "quasifree".into()));
    let o = eqhp(&["hp", "--groupoid", "builtin:z2z3"]);
    assert_eq!(json(&o)["even"], 5);
}

#[test]
fn hp_levels_for_non_quasifree_sources() {
    let o = eqhp(&["hp", "--groupoid", "builtin:z2", "--source", "dual", "--level", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!((v["level"].clone(), v["reduction"].clone()), (3.into(), "level".into()));
    assert!(v["stabilized"].is_boolean());
    let o = eqhp(&["hp", "--groupoid", "builtin:z2", "--source", "dual"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--level"));
}

#[test]
fn guard_trips_are_distinct() {
    let o = eqhp(&["hp", "--groupoid", "builtin:z2z3", "--source", "kg", "--target", "kg", "--level", "2", "--guard-dim", "10"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn green_julg_reports() {
    for (g, even) in [("builtin:pair2", 1), ("builtin:z2", 2), ("builtin:z2z3", 5)] {
        let o = eqhp(&["greenjulg", "--groupoid", g]);
        assert!(o.status.success());
        let v = json(&o);
        assert_eq!(v["equal"], true);
        assert_eq!((v["lhs"][0].clone(), v["rhs"][0].clone()), (even.into(), even.into()), "{g}");
    }
}

#[test]
fn identity_suites() {
    let o = eqhp(&["check", "--suite", "paramixed", "--groupoid", "builtin:z2", "--algebra", "kg", "--max-degree", "6"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = eqhp(&["check", "--suite", "comodule", "--groupoid", "builtin:flip", "--seed", "4"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["modules"].as_array().unwrap().len(), 8);
    let o = eqhp(&["check", "--suite", "stability", "--groupoid", "builtin:pair2"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["twisted_trace_identity"], true);
}

#[test]
fn reports_are_deterministic() {
    let args = ["check", "--suite", "comodule", "--groupoid", "builtin:z2z3", "--seed", "17"];
    assert_eq!(eqhp(&args).stdout, eqhp(&args).stdout);
}

#[test]
fn text_format_mirrors_json() {
    let o = eqhp(&["hp", "--groupoid", "builtin:pair2", "--format", "text"]);
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "even: 1") && out.lines().any(|l| l == "reduction: quasifree"), "{out}");
}

#[test]
fn config_file_supplies_defaults() {
    let cfg = write("config.json", r#"{"format":"text","level":2}"#);
    let o = eqhp(&["--config", &cfg, "hp", "--groupoid", "builtin:z2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("reduction: level"));
    let o = eqhp(&["--config", &cfg, "--format", "json", "hp", "--groupoid", "builtin:z2"]);
    assert_eq!(json(&o)["level"], 2);
    let bad = write("bad_config.json", r#"{"guard_dim":0}"#);
    assert_eq!(eqhp(&["--config", &bad, "hp", "--groupoid", "builtin:z2"]).status.code(), Some(1));
}

#[test]
fn usage_errors() {
    assert_eq!(eqhp(&["hp"]).status.code(), Some(2));
    assert_eq!(eqhp(&["hp", "--groupoid", "builtin:z2", "--level", "0"]).status.code(), Some(2));
    assert_eq!(eqhp(&["hp", "--groupoid", "builtin:nope"]).status.code(), Some(1));
}

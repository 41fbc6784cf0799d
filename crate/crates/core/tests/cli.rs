use std::process::{Command, Stdio};

use conical::cli::run;
use serde_json::Value;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{FIXTURES}/{name}")).unwrap()
}

fn call(args: &[&str], input: &str) -> (i32, Value) {
    let mut argv = vec!["conical"];
    argv.extend_from_slice(args);
    let (code, out) = run(argv, &mut input.as_bytes());
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("not JSON ({e}): {out}"));
    (code, v)
}

#[test]
fn check_form_counterexample() {
    let (code, v) = call(&["check-form"], &fixture("sextic_form.json"));
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "counterexample");
}

#[test]
fn check_form_soluble_and_obstructed() {
    let (code, v) = call(&["check-form"], r#"{"linear":[["1","0"]],"quadratic":[2]}"#);
    assert_eq!((code, v["verdict"].as_str()), (0, Some("soluble")));
    let (code, v) = call(&["check-form"], r#"{"quadratic":[-1]}"#);
    assert_eq!((code, v["verdict"].as_str()), (1, Some("locally_obstructed")));
}

#[test]
fn curve_graph_on_cf() {
    let (code, v) = call(&["curve-graph"], &fixture("cf_curve.json"));
    assert_eq!(code, 0);
    assert_eq!(v["is_tree"], true);
    assert_eq!(v["h1_rank"], 0);
}

#[test]
fn curve_graph_dot() {
    let (code, out) = run(["conical", "curve-graph", "--out", "dot"], &mut fixture("cf_curve.json").as_bytes());
    assert_eq!(code, 0);
    assert!(out.starts_with("digraph") || out.starts_with("graph"), "{out}");
}

#[test]
fn curve_commands_on_cf() {
    let cf = fixture("cf_curve.json");
    assert_eq!(call(&["curve-validate"], &cf).0, 0);
    let (code, v) = call(&["curve-brauer", "--n", "2", "--smax", "20"], &cf);
    assert_eq!((code, v["quotient_dimension"].as_u64()), (0, Some(0)));
    let (code, v) = call(&["curve-hasse", "--n", "2", "--smax", "20"], &cf);
    assert_eq!((code, v["classification"].as_str()), (0, Some("has_rational_points")));
}

#[test]
fn invalid_model_exits_one() {
    let mut cf: Value = serde_json::from_str(&fixture("cf_curve.json")).unwrap();
    // Dropping every branch disconnects the graph.
    cf["branches"] = Value::Array(vec![]);
    let (code, v) = call(&["curve-validate"], &cf.to_string());
    assert_eq!(code, 1, "{v}");
    assert_eq!(v["valid"], false);
}

#[test]
fn construct_form_flags_and_stdin() {
    let (code, v) = call(&["construct-form", "--a", "2", "--b", "5"], "");
    assert_eq!((code, v["c"].as_i64()), (0, Some(41)));
    let (code, v) = call(&["construct-form"], r#"{"a": 3, "b": -1}"#);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "counterexample");
}

#[test]
fn errors_are_json_with_exit_two() {
    for (args, input, kind) in [
        (vec!["check-form"], "{oops", "json"),
        (vec!["construct-form", "--a", "2", "--b", "2"], "", "invalid_input"),
        (vec!["curve-brauer", "--n", "0"], "{}", "invalid_input"),
        (vec!["no-such-command"], "", "invalid_input"),
    ] {
        let (code, v) = call(&args, input);
        assert_eq!(code, 2, "{args:?}");
        assert_eq!(v["error"]["kind"], kind, "{args:?}: {v}");
        assert!(v["error"]["message"].is_string());
    }
}

#[test]
fn demo_d_classification() {
    let (code, v) = call(&["paper-demo", "D", "--n", "2", "--smax", "50"], "");
    assert_eq!(code, 1);
    assert_eq!(v["classification"], "counterexample_with_trivial_truncated_Brauer");
    assert_eq!(v["quotient_dimension"], 0);
}

#[test]
fn demos_match_fixtures_byte_for_byte() {
    for (args, name) in [
        (vec!["paper-demo", "e1"], "demo_e1.json"),
        (vec!["paper-demo", "Cf"], "demo_cf.json"),
        (vec!["paper-demo", "D", "--n", "2", "--smax", "50"], "demo_d.json"),
    ] {
        let mut argv = vec!["conical"];
        argv.extend_from_slice(&args);
        let (_, a) = run(argv.clone(), &mut "".as_bytes());
        let (_, b) = run(argv, &mut "".as_bytes());
        assert_eq!(a, b, "{args:?} is not deterministic");
        assert_eq!(a, fixture(name), "{args:?} drifted from {name}");
    }
}

#[test]
fn binary_reads_environment_defaults() {
    let out = Command::new(env!("CARGO_BIN_EXE_conical"))
        .args(["paper-demo", "D"])
        .env("CONICAL_WINDOW_N", "2")
        .env("CONICAL_PLACES_MAX", "13")
        .stdin(Stdio::null())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["brauer"]["window"]["n"], 2);
    // Primes up to 13 plus the bad places 17 and 23.
    let s: Vec<Value> = v["brauer"]["window"]["S"].as_array().unwrap().clone();
    assert_eq!(Value::Array(s), serde_json::json!(["real", 2, 3, 5, 7, 11, 13, 17, 23]));

    let out = Command::new(env!("CARGO_BIN_EXE_conical"))
        .args(["paper-demo", "e1"])
        .env("CONICAL_WINDOW_N", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn builder_json_round_trips() {
    let cf: Value = serde_json::from_str(&fixture("cf_curve.json")).unwrap();
    let c = conical::curve::ConicalCurve::from_json(&cf).unwrap();
    assert_eq!(c.to_json(), cf);
    let d: Value = serde_json::from_str(&fixture("demo_d.json")).unwrap();
    let curve = conical::curve::ConicalCurve::from_json(&d["curve"]).unwrap();
    assert!(conical::curve::validate_curve(&curve).valid);
    assert_eq!(curve.to_json(), d["curve"]);
}

use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn qval(args: &[&str]) -> Output {
    qval_env(args, &[])
}

fn qval_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qval"));
    cmd.args(args).env_remove("QVAL_PRECISION_CAP");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap().trim().to_owned()
}

fn temp_file(name: &str, contents: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("qval-cli-{}-{name}", std::process::id()));
    std::fs::File::create(&path).unwrap().write_all(contents.as_bytes()).unwrap();
    path
}

#[test]
fn eval_single_values() {
    let o = qval(&["eval", "--qv", "min[vp:2|vp:3]", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1");
    assert_eq!(stdout(&qval(&["eval", "--qv", "nadic:12", "144/5"])), "2");
    assert_eq!(stdout(&qval(&["eval", "--qv", "vp:5", "0"])), "inf");
    assert_eq!(stdout(&qval(&["eval", "--qv", "ram:2,d=2", "sqrt(2)"])), "1/2");
    assert_eq!(stdout(&qval(&["eval", "--qv", "vp:3", "-9/2"])), "2");
}

#[test]
fn eval_json_uses_fraction_strings() {
    let o = qval(&["--format", "json", "eval", "--qv", "ext:7,d=2", "3+sqrt(2)", "1/49"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["value"], "0/1");
    assert_eq!(v[1]["value"], "-2/1");
    assert_eq!(v[1]["expr"], "1/49");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["eval", "--qv", "vp:4", "1"][..],
        &["eval", "--qv", "vp:2", "1/0"],
        &["eval", "--qv", "vp:2", "sqrt(2)+sqrt(3)"],
        &["eval", "--qv", "nope", "1"],
        &["eval", "--qv", "vp:2"],
        &["lemma", "--id", "9.99"],
        &["approx", "--problem", "/nonexistent/problem.json"],
        &["--format", "xml", "eval", "--qv", "vp:2", "1"],
    ] {
        let o = qval(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    let o = qval(&["eval", "--qv", "vp:2", "1+*2"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("offset 2"));
}

#[test]
fn precision_cap_precedence() {
    // v_7 of (3 + sqrt 2)^4 on the branch where sqrt 2 = -3 mod 7 needs more than two digits.
    let x = "(3+sqrt(2))*(3+sqrt(2))*(3+sqrt(2))*(3+sqrt(2))";
    let args = ["eval", "--qv", "split2:7,d=2", x];
    assert_eq!(stdout(&qval(&args)), "4");
    assert_eq!(qval_env(&args, &[("QVAL_PRECISION_CAP", "2")]).status.code(), Some(2));

    let capped = ["--precision-cap", "2", "eval", "--qv", "split2:7,d=2", x];
    assert_eq!(qval(&capped).status.code(), Some(2));
    let roomy = ["--precision-cap", "40", "eval", "--qv", "split2:7,d=2", x];
    assert_eq!(stdout(&qval_env(&roomy, &[("QVAL_PRECISION_CAP", "2")])), "4");

    let tight = temp_file("tight.toml", "hensel_precision_cap = 2\n");
    let tight = tight.to_str().unwrap();
    let mut with_config = vec!["--config", tight];
    with_config.extend_from_slice(&args);
    assert_eq!(qval(&with_config).status.code(), Some(2));
    assert_eq!(stdout(&qval_env(&with_config, &[("QVAL_PRECISION_CAP", "40")])), "4");
}

#[test]
fn ball_membership() {
    let o = qval(&["--format", "json", "ball", "--qv", "vp:2", "--center", "1", "--bound", "1", "5", "3", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let inside: Vec<bool> = v["members"].as_array().unwrap().iter().map(|m| m["inside"].as_bool().unwrap()).collect();
    assert_eq!(inside, [true, false, true]);

    let o = qval(&["--format", "json", "ball", "--qv", "vp:2", "--center", "1", "--bound", "1", "--closed", "3"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["members"][0]["inside"], true);
    assert_eq!(v["strict"], false);
}

#[test]
fn axioms_and_lemmas_pass() {
    let o = qval(&["--format", "json", "axioms", "--qv", "min[vp:2|vp:3]", "--samples", "40", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["failure_count"], 0);
    assert_eq!(v["seed"], 3);

    let o = qval(&["--format", "json", "lemma", "--id", "clopen", "--samples", "10", "--instances", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["lemma"], "clopen");
    assert!(v["failures"].as_array().unwrap().is_empty());

    let o = qval(&["--format", "json", "lemma", "--id", "all", "--samples", "5", "--instances", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 11);

    let o = qval(&["lemma", "--id", "2.12", "--samples", "5", "--instances", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("clopen"));
}

#[test]
fn separate_gives_disjoint_radius() {
    let o = qval(&["--format", "json", "separate", "--qv", "vp:3", "1", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["m"], "2/1");
}

#[test]
fn approx_solution_meets_certificates() {
    let problem = temp_file(
        "problem.json",
        r#"{"d": 2, "targets": [
            {"p": 3, "x": {"a": "1", "b": "1"}, "m": "1"},
            {"p": 5, "x": {"a": "1/2", "b": "0"}, "m": "2"},
            {"p": 7, "x": {"a": "-3/7", "b": "2"}, "m": "-1/2"}
        ]}"#,
    );
    let o = qval(&["--format", "json", "approx", "--problem", problem.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let q = |s: &Value| {
        let (n, d) = s.as_str().unwrap().split_once('/').unwrap();
        (n.parse::<i64>().unwrap(), d.parse::<i64>().unwrap())
    };
    let certs = v["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 3);
    for c in certs {
        let ((an, ad), (rn, rd)) = (q(&c["achieved"]), q(&c["required"]));
        assert!(an * rd >= rn * ad, "{c}");
    }
    assert!(v["x"]["a"].is_string() && v["x"]["b"].is_string());

    let o = qval(&["approx", "--problem", problem.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("x = "));

    let bad = temp_file("bad.json", r#"{"d": 2, "targets": [{"p": 3, "x": {"a": "1"}, "m": "1"}, {"p": 3, "x": {"a": "2"}, "m": "1"}]}"#);
    assert_eq!(qval(&["approx", "--problem", bad.to_str().unwrap()]).status.code(), Some(2));
}

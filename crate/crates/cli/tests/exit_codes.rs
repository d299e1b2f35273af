use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn tcpkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcpkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_temp(name: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("tcpkit-{}-{name}", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn unsolvable_e1_is_reported_not_failed() {
    let out = tcpkit(&["solve", "--fixture", "E1", "--q=1,-1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["member"], Value::Bool(false));
    assert_eq!(v["message"], "no solution (certified at grid resolution)");
}

#[test]
fn membership_reports_support() {
    let out = tcpkit(&["membership", "--fixture", "E1", "--q=-1,-1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["member"], Value::Bool(true));
    assert_eq!(v["result"]["alpha"], serde_json::json!([1, 2]));
}

#[test]
fn undecided_instance_exits_3() {
    // both rows vanish along (1, 0), so the box search cannot close that corner
    let t = write_temp(
        "corner.json",
        r#"{"order":3,"dim":2,"entries":[{"idx":[1,1,2],"val":1},{"idx":[1,2,1],"val":1},
            {"idx":[2,1,2],"val":1},{"idx":[2,2,1],"val":1},{"idx":[2,2,2],"val":1}]}"#,
    );
    let out = tcpkit(&["solve", "--tensor", t.to_str().unwrap(), "--q=-1,1"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["member"], "unknown");
}

#[test]
fn parse_errors_exit_2() {
    for args in [
        &["solve", "--fixture", "E1", "--q=1,x"][..],
        &["solve", "--fixture", "E1", "--q=1"],
        &["classify", "--fixture", "nope"],
        &["classify", "--fixture", "E1", "--cone", "orthant3x"],
        &["classify"],
    ] {
        let out = tcpkit(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
    let bad = write_temp("bad.json", "{\"order\": 3,\n \"dim\": }");
    let out = tcpkit(&["classify", "--tensor", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2 column"));
}

#[test]
fn wrapped_operation_errors_have_distinct_codes() {
    let big = write_temp(
        "big.json",
        r#"{"order":2,"dim":13,"entries":[{"idx":[1,1],"val":1}]}"#,
    );
    let q = vec!["1"; 13].join(",");
    let out = tcpkit(&[
        "membership",
        "--tensor",
        big.to_str().unwrap(),
        &format!("--q={q}"),
    ]);
    assert_eq!(out.status.code(), Some(4));

    let out = tcpkit(&["perturb", "openness", "--fixture", "E2", "--trials", "3"]);
    assert_eq!(out.status.code(), Some(5));

    let out = tcpkit(&["distance", "--cone1", "orthant2", "--cone2", "orthant3"]);
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn thread_variable_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_tcpkit"))
        .arg("fixtures")
        .env("TCPKIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_echo_configuration() {
    let out = tcpkit(&[
        "perturb",
        "existence",
        "--fixture",
        "identity32",
        "--q=-1,-1",
        "--eps",
        "1e-3",
        "--trials",
        "50",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["config"]["trials"], 50);
    assert_eq!(v["config"]["eps"], 1e-3);
    assert_eq!(v["report"]["solvable_fraction"], 1.0);

    let out = tcpkit(&[
        "distance",
        "--cone1",
        "orthant2",
        "--cone2",
        "ray10",
        "--samples",
        "10000",
    ]);
    let d = json(&out)["delta"].as_f64().unwrap();
    approx::assert_abs_diff_eq!(d, 1.0, epsilon = 0.02);
}

#[test]
fn fixture_dump_loads_back() {
    let out = tcpkit(&["fixtures", "--name", "E4"]);
    let path = write_temp("e4.json", &String::from_utf8(out.stdout).unwrap());
    let out = tcpkit(&[
        "classify",
        "--tensor",
        path.to_str().unwrap(),
        "--principal",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["principal"]["verdict"]["status"], "holds");
    assert_eq!(v["verdicts"][0]["property"], "copositive");
    assert_eq!(v["verdicts"][0]["status"], "holds");
}

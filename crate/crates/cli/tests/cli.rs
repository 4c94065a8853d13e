use std::path::PathBuf;
use std::process::{Command, Output};

fn vcausal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vcausal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn reproduce_prints_violation() {
    let o = vcausal(&["reproduce"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("S = -2.0001"), "{text}");
    assert!(text.contains("AB marginal is local"));
}

#[test]
fn reproduce_json_is_parseable_and_deterministic() {
    let a = vcausal(&["reproduce", "--json"]);
    let b = vcausal(&["reproduce", "--json"]);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let s = v["s_value"].as_f64().unwrap();
    assert!(s < -2.0 && (s + 2.00015).abs() <= 2e-4);
    assert_eq!(v["ab_vertices"], 108);
}

#[test]
fn certify_reports_both_bounds() {
    let o = vcausal(&["certify"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("I = S + 2 verified"));
    assert!(text.contains("LP min over HI polytope = -2\n"));
    assert!(text.contains("LP min over NS polytope = -7/3"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(vcausal(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(vcausal(&["reproduce", "--bogus"]).status.code(), Some(2));
    assert_eq!(vcausal(&["project", &fixture("triangle.json")]).status.code(), Some(2));
    let o = vcausal(&["spacetime", "/no/such/events.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/events.json"));
    let o = vcausal(&["reproduce", "--state", "/no/state.json", "--measurements", "/no/m.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/state.json"));
}

#[test]
fn spacetime_patterns_set_exit_code() {
    let o = vcausal(&["spacetime", &fixture("fig3_near_edge.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("pattern fig3: pass"));
    let o = vcausal(&["spacetime", &fixture("fig2a_wrong_order.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("expected A < B, found A > B"));
}

#[test]
fn project_triangle_onto_plane() {
    let o = vcausal(&["project", &fixture("triangle.json"), "--keep", "0,1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("x0 >= 0"));
    assert!(text.contains("-x0 - x1 >= -1"));
}

#[test]
fn row_cap_env_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_vcausal"))
        .args(["project", &fixture("triangle.json"), "--keep", "0"])
        .env("VCAUSAL_FM_ROW_CAP", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_vcausal"))
        .args(["project", &fixture("triangle.json"), "--keep", "0"])
        .env("VCAUSAL_FM_ROW_CAP", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("size guard"));
}

#[test]
fn optimize_from_shipped_writes_reloadable_files() {
    let dir = std::env::temp_dir().join(format!("vcausal-opt-{}", std::process::id()));
    let o = vcausal(&["optimize", "--from-shipped", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let state = dir.join("state.json");
    let meas = dir.join("measurements.json");
    let o = vcausal(&[
        "reproduce",
        "--json",
        "--state",
        state.to_str().unwrap(),
        "--measurements",
        meas.to_str().unwrap(),
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["s_value"].as_f64().unwrap() <= -2.00015);
    let _ = std::fs::remove_dir_all(dir);
}

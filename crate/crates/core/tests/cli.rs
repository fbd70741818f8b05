use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rendezvous_core::mission::FAILURE_MARKER;

fn rendezvous(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rendezvous"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SWARM_OUT_DIR")
        .output()
        .expect("binary runs")
}

const TWO_AGENTS: &str = r#"
[mission]
name = "pair"
mode = "particle"

[network]
agents = 2
edges = [[1, 2]]

[agents]
positions = [[0, 0, 0], [4, 2, 0]]

[integration]
t_final = 5.0
"#;

#[test]
fn lists_every_bundled_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = rendezvous(&["list-scenarios"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["scenario_2_4_1", "scenario_2_5_2", "scenario_4_2_1", "scenario_4_2_2"] {
        assert!(text.contains(name), "{name} missing from:\n{text}");
    }
}

#[test]
fn run_writes_outputs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pair.cfg"), TWO_AGENTS).unwrap();
    for out_dir in ["a", "b"] {
        let out = rendezvous(&["run", "pair.cfg", "--out", out_dir], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["particles.csv", "report.json"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    let report = fs::read_to_string(dir.path().join("a/report.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(json["rendezvous_point"], serde_json::json!([2.0, 1.0, 0.0]));
}

#[test]
fn default_output_dir_is_named_after_the_mission() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pair.cfg"), TWO_AGENTS).unwrap();
    assert!(rendezvous(&["run", "pair.cfg"], dir.path()).status.success());
    assert!(dir.path().join("out/pair/particles.csv").exists());
}

#[test]
fn bundled_quad_scenario_writes_quad_and_control_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = rendezvous(&["run", "scenario_4_2_2", "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for i in 1..=3 {
        assert!(dir.path().join(format!("o/quad_{i}.csv")).exists());
        assert!(dir.path().join(format!("o/controls_{i}.csv")).exists());
    }
    assert!(!dir.path().join("o").join(FAILURE_MARKER).exists());
}

#[test]
fn malformed_config_exits_with_code_two_and_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = TWO_AGENTS.replace("t_final = 5.0", "t_final = \"soon\"");
    fs::write(dir.path().join("bad.cfg"), bad).unwrap();
    let out = rendezvous(&["validate", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.cfg:14"), "{err}");
    assert!(err.contains("t_final"), "{err}");
}

#[test]
fn invalid_values_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = TWO_AGENTS.replace("t_final = 5.0", "t_final = -1.0");
    fs::write(dir.path().join("bad.cfg"), bad).unwrap();
    assert_eq!(rendezvous(&["run", "bad.cfg"], dir.path()).status.code(), Some(2));
}

#[test]
fn failed_run_leaves_a_marker() {
    let dir = tempfile::tempdir().unwrap();
    // Rotor limit barely above hover: any translation saturates.
    let cfg = r#"
[mission]
name = "starved"
mode = "quad"

[network]
agents = 2
complete = true

[agents]
positions = [[0, 0, 0], [10, 0, 0]]

[planner]
omega_max = 197.0
"#;
    fs::write(dir.path().join("starved.cfg"), cfg).unwrap();
    let out = rendezvous(&["run", "starved.cfg", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let marker = fs::read_to_string(dir.path().join("o").join(FAILURE_MARKER)).unwrap();
    assert!(!marker.trim().is_empty());
}

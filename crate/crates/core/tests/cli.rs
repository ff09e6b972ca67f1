use std::path::PathBuf;
use std::process::{Command, Output};

use raag_comm::cli::{EXIT_FEASIBLE, EXIT_INFEASIBLE, EXIT_USAGE};
use raag_comm::system::LinearSystem;
use serde_json::Value;

fn raag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_raag-comm"))
        .args(args)
        .env_remove("RAAG_GUARD_VARS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("raag-comm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn decide_exit_codes() {
    assert_eq!(raag(&["decide", "--left", "path:3", "--right", "path:5"]).status.code(), Some(EXIT_INFEASIBLE));
    assert_eq!(raag(&["decide", "--left", "path:5", "--right", "path:5"]).status.code(), Some(EXIT_FEASIBLE));
    assert_eq!(raag(&["decide", "--left", "path:10", "--right", "tkk:2"]).status.code(), Some(EXIT_FEASIBLE));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["decide", "--left", "path:2", "--right", "path:5"][..],
        &["decide", "--left", "nonsense", "--right", "path:5"],
        &["decide", "path:3", "path:5"],
        &["sweep", "--paths", "7..5"],
        &["covers", "--k", "0"],
        &["frobnicate"],
    ] {
        let out = raag(args);
        assert_eq!(out.status.code(), Some(EXIT_USAGE), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn decide_json_report() {
    let out = raag(&["decide", "--left", "path:10", "--right", "tkk:2", "--json"]);
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "decide");
    assert_eq!(v["inputs"]["left"], "path:10");
    assert_eq!(v["result"]["verdict"], "feasible");
    let components = v["result"]["components"].as_array().unwrap();
    assert_eq!(components.len(), 2);
    let feasible = components.iter().find(|c| c["feasible"] == true).unwrap();
    let witness = feasible["witness"].as_array().unwrap();
    assert!(!witness.is_empty());
    // Values are strings so that large integers survive any JSON reader.
    assert!(witness.iter().all(|w| w["value"].is_string()));
}

#[test]
fn json_is_byte_identical_across_runs() {
    for args in [
        &["decide", "--left", "path:7", "--right", "tkk:1", "--json"][..],
        &["sweep", "--paths", "5..6", "--json"],
        &["covers", "--k", "3", "--json"],
        &["splittings", "--k", "2", "--cross-validate", "--json"],
    ] {
        let a = raag(args);
        let b = raag(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn guard_env_caps_system_size() {
    let out = Command::new(env!("CARGO_BIN_EXE_raag-comm"))
        .args(["decide", "--left", "path:6", "--right", "tkk:1"])
        .env("RAAG_GUARD_VARS", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("RAAG_GUARD_VARS"));

    let out = Command::new(env!("CARGO_BIN_EXE_raag-comm"))
        .args(["decide", "--left", "path:6", "--right", "tkk:1"])
        .env("RAAG_GUARD_VARS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}

#[test]
fn emitted_systems_load_back() {
    let path = scratch("p3p5.json");
    let out = raag(&["decide", "--left", "path:3", "--right", "path:5", "--emit-system", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_INFEASIBLE));
    let text = std::fs::read_to_string(&path).unwrap();
    let systems: Vec<Value> = serde_json::from_str(&text).unwrap();
    assert_eq!(systems.len(), 2);
    for (i, s) in systems.iter().enumerate() {
        let loaded = LinearSystem::from_json(&s.to_string()).unwrap();
        assert_eq!(loaded.component as usize, i + 1);
        assert_eq!(loaded.pair.left_spec, "path:3");
    }
}

#[test]
fn sweep_reports_off_diagonal_infeasible() {
    let out = raag(&["sweep", "--paths", "5..7", "--json"]);
    assert_eq!(out.status.code(), Some(EXIT_FEASIBLE));
    let v = json(&out);
    let pairs = v["result"]["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 6);
    for p in pairs {
        let diagonal = p["n"] == p["m"];
        assert_eq!(p["verdict"], if diagonal { "feasible" } else { "infeasible" });
    }
    assert_eq!(v["result"]["off_diagonal_infeasible"], true);
}

#[test]
fn covers_and_dot_output() {
    let dot = scratch("covers.dot");
    let out = raag(&["covers", "--k", "3", "--json", "--dot", dot.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_FEASIBLE));
    let v = json(&out);
    let covers = v["result"].as_array().unwrap();
    assert_eq!(covers.len(), 2);
    assert!(covers.iter().all(|c| c["passed"] == true && c["vertices"] == 12));
    let text = std::fs::read_to_string(&dot).unwrap();
    assert_eq!(text.matches("digraph").count(), 2);

    let out = raag(&["covers", "--k", "1", "--which", "s", "--json"]);
    assert_eq!(json(&out)["result"][0]["degenerate"], true);
}

#[test]
fn splittings_cross_validation_passes() {
    let out = raag(&["splittings", "--k", "3", "--cross-validate", "--json"]);
    assert_eq!(out.status.code(), Some(EXIT_FEASIBLE));
    let v = json(&out);
    let skeletons = v["result"]["skeletons"].as_array().unwrap();
    assert!(skeletons.iter().all(|s| s["vertices"] == 23));
}

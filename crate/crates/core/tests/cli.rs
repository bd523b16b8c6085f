use std::process::{Command, Output};

use serde_json::Value;

fn agk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agk"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env_remove("AGK_BUDGET_CLOSURE")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn inspect_b4_and_family() {
    let out = agk(&["inspect", "automata/b4.aut"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["bireversible"], true);
    assert_eq!(v["states"], 4);
    assert!(v["involutions"].as_object().unwrap().values().all(|x| x == true));

    assert!(v["group_size"].is_null());

    let v = json(&agk(&["inspect", "--family", "n=7"]));
    assert_eq!(v["states"], 7);
    assert_eq!(v["bireversible"], true);

    let v = json(&agk(&["inspect", "automata/b4.aut", "--budget-elements", "500"]));
    assert_eq!(v["group_size"]["exceeds"], 500);
}

#[test]
fn certify_exit_codes() {
    let out = agk(&["certify", "--family", "n=4", "--sigma", "1,1", "--max-length", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "certified");

    let out = agk(&["certify", "automata/b4.aut", "--max-length", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["counts"]["words_checked"], 0);

    let dir = std::env::temp_dir().join(format!("agk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let lamp = dir.join("lamplighter.aut");
    std::fs::write(&lamp, "a = (b, a) sigma\nb = (a, b)\n").unwrap();
    let out = agk(&["certify", lamp.to_str().unwrap(), "--max-length", "8"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verdict"], "refuted");
    assert_eq!(v["counterexample"]["value"], "a*a");
    std::fs::remove_dir_all(&dir).unwrap();

    let out = agk(&["certify", "automata/b4.aut", "--max-length", "6", "--budget-closure", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["verdict"], "budget-exceeded");
}

#[test]
fn budget_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_agk"))
        .args(["certify", "automata/b4.aut", "--max-length", "4"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env("AGK_BUDGET_CLOSURE", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(agk(&["inspect"]).status.code(), Some(2));
    assert_eq!(agk(&["inspect", "automata/missing.aut"]).status.code(), Some(2));
    assert_eq!(agk(&["inspect", "--family", "n=5", "--sigma", "0,1,1"]).status.code(), Some(2));
    assert_eq!(agk(&["word", "automata/b4.aut", "-w", "a*z"]).status.code(), Some(2));
    assert_eq!(agk(&["bogus"]).status.code(), Some(2));
    assert_eq!(agk(&["certify", "automata/b4.aut", "--family", "4"]).status.code(), Some(2));
}

#[test]
fn exploration_mode_carries_a_warning() {
    let out = agk(&["dual-orbits", "--family", "n=5", "--sigma", "0,1,1", "--exploration", "--max-level", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["warning"].as_str().unwrap().contains("exploration"));
}

#[test]
fn dual_orbits_text_table() {
    let out = agk(&["dual-orbits", "--family", "n=5", "--max-level", "4", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines, ["0, 1, 1, 1", "1, 5, 1, 5", "2, 20, 1, 20", "3, 80, 1, 80", "4, 320, 1, 320"]);
}

#[test]
fn stab_table_on_dual_and_identity() {
    let v = json(&agk(&["stab-table", "automata/b4.aut", "--dual"]));
    assert_eq!(v["details"]["indices"][1], "27");
    assert_eq!(v["verdict"], "certified");

    let dir = std::env::temp_dir().join(format!("agk-id-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let id = dir.join("identity.aut");
    std::fs::write(&id, "e = (e, e)\n").unwrap();
    let v = json(&agk(&["stab-table", id.to_str().unwrap(), "--max-level", "4"]));
    assert!(v["details"]["indices"].as_array().unwrap().iter().all(|x| x == "1"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn word_reports() {
    let v = json(&agk(&["word", "automata/b4.aut", "-w", "a*b*c"]));
    assert_eq!(v["trivial"], false);

    let v = json(&agk(&["word", "automata/b4.aut", "-w", ""]));
    assert_eq!(v["trivial"], true);
    assert_eq!(v["order"], 1);

    let v = json(&agk(&["word", "automata/b4.aut", "--dual", "-w", "O*1^-1", "--depth", "3"]));
    assert_eq!(v["order"], 2);
    let labels = v["portrait"]["labels"].as_array().unwrap();
    assert_eq!(labels.len(), 1 + 4 + 16);
    assert!(labels.iter().all(|l| l["perm"] == serde_json::json!(["b", "a", "c", "d"])));
}

#[test]
fn dot_and_script() {
    let out = agk(&["dot", "automata/b4.aut"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("digraph"));
    let out = agk(&["script", "--family", "n=6", "--sigma", "1,0,1,1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed = agk::MealyAutomaton::parse(&text).unwrap();
    assert_eq!(parsed.num_states(), 6);
}

#[test]
fn reports_do_not_depend_on_jobs() {
    let base = ["certify", "--family", "n=5", "--max-length", "5", "--seed", "7"];
    let one = agk(&[&base[..], &["--jobs", "1"]].concat());
    let four = agk(&[&base[..], &["--jobs", "4"]].concat());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(json(&one)["seed"], 7);
    let a = agk(&["dual-orbits", "--family", "n=4", "--max-level", "5", "--jobs", "1"]);
    let b = agk(&["dual-orbits", "--family", "n=4", "--max-level", "5", "--jobs", "3"]);
    assert_eq!(a.stdout, b.stdout);
}

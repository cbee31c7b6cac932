use std::process::{Command, Output};

fn dyngrid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyngrid")).args(args).output().expect("run dyngrid")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn levels_json_is_a_registry() {
    let o = dyngrid(&["levels", "--json"]);
    assert!(o.status.success());
    let reg = dyngrid::LevelRegistry::from_json(&stdout(&o)).unwrap();
    assert_eq!(reg.names().count(), 5);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(dyngrid(&["rollout", "--level", "Nope"]).status.code(), Some(2));
    assert_eq!(dyngrid(&["eval", "--level", "GoToObj", "--policy", "clever"]).status.code(), Some(2));
    assert_eq!(dyngrid(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(dyngrid(&["serve", "--transport", "udp"]).status.code(), Some(2));
}

#[test]
fn rollout_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let mut lines = String::new();
    for seed in 0..5 {
        let o = dyngrid(&["rollout", "--level", "PutNextLocal", "--seed", &seed.to_string(), "--policy", "optimal"]);
        assert!(o.status.success());
        let trace: dyngrid::EpisodeTrace = stdout(&o).trim().parse().unwrap();
        assert_eq!(trace.outcome, dyngrid::Outcome::Success);
        lines.push_str(&stdout(&o));
    }
    let path = dir.path().join("t.jsonl");
    std::fs::write(&path, &lines).unwrap();
    let o = dyngrid(&["replay", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "5 traces, 0 mismatches");

    // tamper with one reward
    let bad = lines.replacen("\"outcome\":\"success\"", "\"outcome\":\"trap\"", 1);
    std::fs::write(&path, bad).unwrap();
    let o = dyngrid(&["replay", path.to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn eval_compare_table() {
    let o = dyngrid(&["eval", "--level", "GoToRedBall-v1", "-n", "50", "--policy", "optimal", "--policy", "random"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("optimal") && text.contains("random"));
    assert!(text.contains("**"));

    let o = dyngrid(&["eval", "--level", "GoToRedBall-v1", "-n", "20", "--json"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["n"], 20);
    assert_eq!(v["succ_mean"], 1.0);
}

#[test]
fn registry_flag_loads_custom_levels() {
    let mut level = dyngrid::level::builtin_levels().remove(0);
    level.name = "Small".into();
    level.grid_size = 6;
    level.max_steps = 144;
    let reg = dyngrid::LevelRegistry::new(vec![level]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reg.json");
    std::fs::write(&path, reg.to_json()).unwrap();
    let p = path.to_str().unwrap();
    let o = dyngrid(&["--registry", p, "render", "--level", "Small", "--seed", "2", "--optimal"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().take_while(|l| l.starts_with("##")).count(), 6);
    assert_eq!(text.lines().next().unwrap(), "#".repeat(12));
    assert!(text.contains("outcome: success"));
    assert_eq!(dyngrid(&["--registry", p, "render", "--level", "GoToObj"]).status.code(), Some(2));
}

#[test]
fn play_reads_actions_from_stdin() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_dyngrid"))
        .args(["play", "--level", "GoToRedBall-v1", "--seed", "3"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"left\n2\nbogus\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("go to the red ball"));
    assert_eq!(text.matches("steps").count(), 2);
    assert!(text.contains("unknown action 'bogus'"));
}

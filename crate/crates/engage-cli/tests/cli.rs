//! End-to-end checks of the `engage` binary: every subcommand, the file
//! formats it reads and writes, and the nonzero-exit error contract.

use std::path::Path;
use std::process::{Command, Output};

fn engage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_engage"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(output: &Output) {
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn stdout_json(output: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&output.stdout);
    let line = text.lines().last().expect("stdout has output");
    serde_json::from_str(line).expect("stdout line is JSON")
}

fn gen_users(dir: &Path, k: usize, d: usize, seed: u64) -> String {
    let path = dir.join(format!("users_{k}_{d}_{seed}.csv"));
    let out = engage(&[
        "gen-users",
        "--dist",
        "uniform",
        "--users",
        &k.to_string(),
        "--dim",
        &d.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_ok(&out);
    path.to_str().unwrap().to_string()
}

#[test]
fn gen_users_run_and_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let users = gen_users(dir.path(), 50, 3, 13);

    let result_path = dir.path().join("result.json");
    let out = engage(&[
        "run",
        "--users",
        &users,
        "--producers",
        "4",
        "--rule",
        "softmax",
        "--tau",
        "1.0",
        "--seed",
        "1",
        "--max-iters",
        "500",
        "--out",
        result_path.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let summary = stdout_json(&out);
    assert_eq!(summary["converged"], true);

    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result_path).unwrap()).unwrap();
    assert_eq!(result["converged"], true);
    let basis = result["basis"].as_array().unwrap().clone();
    assert_eq!(basis.len(), 4);
    assert!(result["trace"].is_array());

    // Feed the converged profile back through verify.
    let profile_path = dir.path().join("profile.json");
    std::fs::write(
        &profile_path,
        serde_json::json!({ "n": 4, "d": 3, "basis": basis }).to_string(),
    )
    .unwrap();
    let out = engage(&[
        "verify",
        "--users",
        &users,
        "--profile",
        profile_path.to_str().unwrap(),
        "--rule",
        "softmax",
        "--tau",
        "1.0",
    ]);
    assert_ok(&out);
    assert_eq!(stdout_json(&out)["is_equilibrium"], true);
}

#[test]
fn run_is_deterministic_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let users = gen_users(dir.path(), 30, 4, 7);
    let mut outputs = Vec::new();
    for name in ["a.json", "b.json"] {
        let path = dir.path().join(name);
        let out = engage(&[
            "run", "--users", &users, "--producers", "5", "--rule", "linear", "--seed", "9",
            "--out", path.to_str().unwrap(),
        ]);
        assert_ok(&out);
        outputs.push(std::fs::read_to_string(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn nmf_subcommand_writes_embeddings_and_loss_log() {
    let dir = tempfile::tempdir().unwrap();
    let ratings = dir.path().join("ratings.csv");
    std::fs::write(
        &ratings,
        "user,item,rating\nu1,i1,5\nu1,i2,3\nu2,i1,4\nu2,i3,1\nu3,i2,2\nu3,i3,5\n",
    )
    .unwrap();
    let users = dir.path().join("users.csv");
    let log = dir.path().join("loss.csv");
    let out = engage(&[
        "nmf",
        "--ratings",
        ratings.to_str().unwrap(),
        "--dim",
        "2",
        "--iters",
        "50",
        "--seed",
        "13",
        "--out",
        users.to_str().unwrap(),
        "--loss-log",
        log.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let users_text = std::fs::read_to_string(&users).unwrap();
    assert!(users_text.starts_with("f0,f1\n"));
    assert_eq!(users_text.lines().count(), 4);
    let log_text = std::fs::read_to_string(&log).unwrap();
    assert!(log_text.starts_with("iter,loss\n"));
    assert_eq!(log_text.lines().count(), 51);
}

#[test]
fn sweep_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        serde_json::json!({
            "producers": [2, 3],
            "dims": [3],
            "rules": [
                { "kind": "linear" },
                { "kind": "softmax", "tau": 1.0 }
            ],
            "embed_seeds": [13],
            "run_seeds": [1, 2],
            "users": { "source": "uniform" },
            "k": 25,
            "max_iters": 200
        })
        .to_string(),
    )
    .unwrap();
    let sweep_dir = dir.path().join("sweep");
    let out = engage(&[
        "sweep",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        sweep_dir.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    assert_ok(&out);
    assert_eq!(stdout_json(&out)["rows"], 8);
    let results = sweep_dir.join("results.csv");
    assert!(results.exists());

    let charts_dir = dir.path().join("charts");
    let out = engage(&[
        "plot",
        "--results",
        results.to_str().unwrap(),
        "--out",
        charts_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let charts = stdout_json(&out)["charts"].as_array().unwrap().len();
    assert!(charts > 0);
}

#[test]
fn single_minded_check_and_construct() {
    let out = engage(&["single-minded", "--m", "2,1", "--counts", "2,1"]);
    assert_ok(&out);
    let json = stdout_json(&out);
    assert_eq!(json["is_equilibrium"], true);
    assert_eq!(json["slack"], 0.0);

    let out = engage(&["single-minded", "--m", "2,1,1", "--construct", "4"]);
    assert_ok(&out);
    let json = stdout_json(&out);
    assert_eq!(json["counts"], serde_json::json!([2, 1, 1]));
    assert_eq!(json["is_equilibrium"], true);

    let out = engage(&["single-minded", "--m", "2,1", "--counts", "0,3"]);
    assert_ok(&out);
    assert_eq!(stdout_json(&out)["is_equilibrium"], false);
}

#[test]
fn failures_exit_nonzero_with_machine_readable_error() {
    let out = engage(&[
        "run", "--users", "/nonexistent.csv", "--producers", "2", "--rule", "linear", "--seed",
        "0", "--out", "/dev/null",
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().unwrap();
    let json: serde_json::Value = serde_json::from_str(line).expect("stderr line is JSON");
    assert!(json["error"].is_string());

    // softmax without tau.
    let dir = tempfile::tempdir().unwrap();
    let users = gen_users(dir.path(), 5, 2, 0);
    let out = engage(&[
        "run", "--users", &users, "--producers", "2", "--rule", "softmax", "--seed", "0",
        "--out", "/dev/null",
    ]);
    assert!(!out.status.success());
}

//! Black-box checks of the command-line contract: exit codes, byte-stable
//! exact output, deterministic sampling, and the budget override chain.

use std::path::PathBuf;
use std::process::{Command, Output};

fn example(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name);
    path.to_str().unwrap().to_owned()
}

fn ordmatch(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ordmatch"));
    cmd.args(args).env_remove("ORDMATCH_BUDGET");
    for (key, value) in env {
        cmd.env(key, value);
    }
    cmd.output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.stderr.is_empty(),
        "unexpected stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn mechanisms_report_exact_probabilities() {
    let out = ordmatch(&["mechanism", "ps", &example("ex-ps.prof")], &[]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["matrix"]["entries"][0][0], "1/2");
    assert_eq!(doc["matrix"]["entries"][0][1], "0/1");
    assert_eq!(doc["approx"][0][0], "0.500000");

    let out = ordmatch(
        &["mechanism", "sd", "--ranking", "1,2,3,4", &example("ex-ps.prof")],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["assignment"], serde_json::json!([1, 4, 2, 3]));
}

#[test]
fn exact_mode_output_is_byte_stable() {
    let args = [
        "protocol",
        "ops",
        "--mode",
        "exact",
        "--player",
        "1",
        &example("ex-onlineps.prof"),
    ];
    let first = ordmatch(&args, &[]);
    let second = ordmatch(&args, &[]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout, "exact mode must be byte-stable");
    let doc = stdout_json(&first);
    assert_eq!(doc["prefix"][1]["exact"], "7/18");
}

#[test]
fn sampling_is_seed_deterministic() {
    let args = [
        "protocol",
        "opsvar",
        "--mode",
        "sample",
        "--seed",
        "7",
        &example("ex-ps.prof"),
    ];
    let first = ordmatch(&args, &[]);
    let second = ordmatch(&args, &[]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout, "one seed, one trajectory");
    let doc = stdout_json(&first);
    assert_eq!(doc["seed"], 7);
    assert!(doc["events"].as_array().is_some_and(|events| !events.is_empty()));
}

#[test]
fn exit_codes_separate_violations_usage_and_budget() {
    // A true property: exit 0.
    let out = ordmatch(
        &["verify", "uniform", "--protocol", "opsvar", &example("ex-onlineps.prof")],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));

    // A violated property: exit 1, still a JSON report.
    let out = ordmatch(
        &["verify", "uniform", "--protocol", "ops", &example("ex-onlineps.prof")],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    assert_eq!(doc["holds"], false);

    // Usage errors: exit 2.
    let out = ordmatch(&["mechanism", "nope", &example("ex-ps.prof")], &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = ordmatch(&["mechanism", "ps", "/no/such/file.prof"], &[]);
    assert_eq!(out.status.code(), Some(2));

    // Exhausted enumeration budget: exit 3.
    let out = ordmatch(
        &[
            "protocol",
            "opsvar",
            "--mode",
            "exact",
            "--budget",
            "3",
            &example("ex-ps.prof"),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn budget_resolution_prefers_flag_over_environment() {
    // The environment variable alone starves the run.
    let out = ordmatch(
        &["protocol", "opsvar", "--mode", "exact", &example("ex-ps.prof")],
        &[("ORDMATCH_BUDGET", "3")],
    );
    assert_eq!(out.status.code(), Some(3));

    // An explicit flag overrides it.
    let out = ordmatch(
        &[
            "protocol",
            "opsvar",
            "--mode",
            "exact",
            "--budget",
            "100000",
            &example("ex-ps.prof"),
        ],
        &[("ORDMATCH_BUDGET", "3")],
    );
    assert_eq!(out.status.code(), Some(0));

    // Garbage in the environment is a usage error, not a silent default.
    let out = ordmatch(
        &["protocol", "opsvar", "--mode", "exact", &example("ex-ps.prof")],
        &[("ORDMATCH_BUDGET", "lots")],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_duplicates_stdout_into_a_file() {
    let dir = std::env::temp_dir().join("ordmatch-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ps.json");
    let out = ordmatch(
        &["mechanism", "ps", "--out", path.to_str().unwrap(), &example("ex-ps.prof")],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, out.stdout);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn reproduce_targets_hold() {
    for target in ["ex-ps", "ex-onlineps", "ex-naivepp", "ex-14player", "ex-truthful"] {
        let out = ordmatch(&["reproduce", target], &[]);
        assert_eq!(out.status.code(), Some(0), "target {target}");
        let doc = stdout_json(&out);
        assert_eq!(doc["pass"], true, "target {target}");
    }
}

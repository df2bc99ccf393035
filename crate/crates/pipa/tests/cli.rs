//! End-to-end checks of the command-line interface: exit codes, JSON shape
//! (validated against the shipped schemas), and byte determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pipa"))
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name);
    let text = std::fs::read_to_string(&path).expect("schema file");
    let json: serde_json::Value = serde_json::from_str(&text).expect("schema json");
    jsonschema::validator_for(&json).expect("valid schema")
}

fn term_file(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pipa-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn assert_valid(v: &jsonschema::Validator, line: &str) {
    let doc: serde_json::Value = serde_json::from_str(line).expect("json output");
    if let Err(e) = v.validate(&doc) {
        panic!("schema violation on {line}: {e}");
    }
}

const LOOP_NET: &str = "new x in (rec X. 1/2: x?(y). 0 + 1/2: tau. X | x!z)";

#[test]
fn parse_round_trips_and_validates() {
    let f = term_file("loop.pipa", LOOP_NET);
    let text = run_ok(&["parse", f.to_str().unwrap()]);
    let pretty = String::from_utf8(text.stdout).unwrap();
    // The canonical print must re-parse to an equivalent term.
    let f2 = term_file("loop2.pipa", &pretty);
    let again = run_ok(&["parse", f2.to_str().unwrap()]);
    assert_eq!(pretty, String::from_utf8(again.stdout).unwrap());

    let json = run_ok(&["parse", f.to_str().unwrap(), "--format", "json"]);
    assert_valid(&schema("parse.schema.json"), std::str::from_utf8(&json.stdout).unwrap());
}

#[test]
fn groups_shape_and_modes() {
    let f = term_file("loopg.pipa", LOOP_NET);
    let json = run_ok(&["groups", f.to_str().unwrap(), "--format", "json"]);
    let v = schema("groups.schema.json");
    let text = String::from_utf8(json.stdout).unwrap();
    assert_valid(&v, &text);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["groups"].as_array().unwrap().len(), 2);
    // com-prime mode is accepted too.
    run_ok(&["groups", f.to_str().unwrap(), "--mode", "com-prime"]);
}

#[test]
fn run_trace_validates_and_is_deterministic() {
    let f = term_file("loopr.pipa", LOOP_NET);
    let script = term_file("script.txt", "0\n0\n0\n");
    let adversary = format!("scripted:{}", script.display());
    let args = [
        "run",
        f.to_str().unwrap(),
        "--adversary",
        &adversary,
        "--max-steps",
        "3",
    ];
    let out = run_ok(&args);
    let v = schema("run.schema.json");
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines() {
        assert_valid(&v, line);
    }
    let last: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["stop"], "step-budget");
    let again = run_ok(&args);
    assert_eq!(text, String::from_utf8(again.stdout).unwrap());
}

#[test]
fn analyze_reports_exact_bounds() {
    let f = term_file("loopa.pipa", LOOP_NET);
    let out = run_ok(&[
        "analyze",
        f.to_str().unwrap(),
        "--event",
        "deadlock",
        "--depth",
        "6",
        "--format",
        "json",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_valid(&schema("analyze.schema.json"), &text);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["lower"], "63/64");
    assert_eq!(doc["upper"], "1");
}

#[test]
fn election_output_validates_and_replays() {
    let args = [
        "election",
        "--adversary",
        "greedy-delay",
        "--runs",
        "200",
        "--seed",
        "11",
        "--max-steps",
        "3000",
        "--format",
        "json",
    ];
    let out = run_ok(&args);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_valid(&schema("election.schema.json"), &text);
    let again = run_ok(&args);
    assert_eq!(text, String::from_utf8(again.stdout).unwrap());
}

#[test]
fn exit_codes() {
    let bad = term_file("bad.pipa", "1/: tau. 0 + 1/2: tau. 0");
    let out = bin().args(["parse", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let unnorm = term_file("unnorm.pipa", "1/3: tau. 0 + 1/3: tau. 0");
    let out = bin().args(["parse", unnorm.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));

    let stuck = term_file("stuck.pipa", "if y then 0 else 0");
    let out = bin().args(["groups", stuck.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));

    let f = term_file("loopx.pipa", LOOP_NET);
    let out = bin()
        .args(["run", f.to_str().unwrap(), "--adversary", "no-such-strategy"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));

    let out = bin()
        .args(["run", f.to_str().unwrap(), "--adversary", "uniform-random"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4), "randomized adversary needs a seed");

    let out = bin()
        .args([
            "analyze",
            f.to_str().unwrap(),
            "--event",
            "deadlock",
            "--depth",
            "30",
            "--max-states",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5), "tiny search budget must trip");

    let out = bin().args(["election", "--runs", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "zero runs is a usage error");
}

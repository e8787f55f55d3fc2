//! End-to-end tests of the binary: every verb, the exit-code contract,
//! schema-versioned round-trips, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robustpg"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_labels_and_records_reordering() {
    let doc = stdout_json(&run(&["classify", "--m1", "0.5", "--m2", "0.5"]));
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["case"], "SYM_I");
    assert_eq!(doc["swapped"], false);

    let doc = stdout_json(&run(&["classify", "--m1", "1", "--m2", "0.2"]));
    assert_eq!(doc["case"], "AREA_IV");

    let doc = stdout_json(&run(&["classify", "--m1", "0.3", "--m2", "0.8"]));
    assert_eq!(doc["swapped"], true);
    assert_eq!(doc["sorted_means"][0], 0.8);
}

#[test]
fn solve_emits_schema_versioned_constants() {
    let doc = stdout_json(&run(&["solve", "--m", "0.84", "--m", "0.84"]));
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["solved"]["label"]["case"], "SYM_II");
    let r2 = doc["solved"]["params"]["r2"].as_f64().unwrap();
    assert!((r2 - 0.2).abs() <= 1e-12);

    // single-agent posted price: a mean of 2/e inverts to γ = 1/e
    let doc = stdout_json(&run(&[
        "solve",
        "--mode",
        "excludable",
        "--m",
        "0.7357588823428846",
    ]));
    let gamma = doc["solved"]["params"]["gamma"][0].as_f64().unwrap();
    assert!((gamma - 1.0 / std::f64::consts::E).abs() <= 1e-10);

    // all-ones N-agent family is the degenerate posted price at 1
    let doc = stdout_json(&run(&["solve", "--mode", "nagent", "--n", "3", "--m", "1"]));
    assert_eq!(doc["solved"]["params"]["r"], 1.0);
    assert_eq!(doc["solved"]["degenerate"], true);
}

fn solve_to_file(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_owned();
    let out = bin()
        .args(args)
        .args(["--out", &path])
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn eval_round_trips_solved_documents() {
    let dir = tempfile::tempdir().unwrap();
    let params = solve_to_file(dir.path(), "sym2.json", &["solve", "--m", "0.84", "--m", "0.84"]);

    let doc = stdout_json(&run(&["eval", "--params", &params, "--v", "1", "--v", "1"]));
    assert_eq!(doc["allocation"][0], 1.0);
    let t0 = doc["payments"][0].as_f64().unwrap();
    let t1 = doc["payments"][1].as_f64().unwrap();
    assert!((t0 - 0.6).abs() <= 1e-12 && (t1 - 0.6).abs() <= 1e-12);

    // below every threshold: no provision, no payment
    let doc = stdout_json(&run(&["eval", "--params", &params, "--v", "0.1", "--v", "0.1"]));
    assert_eq!(doc["allocation"][0], 0.0);
    assert_eq!(doc["total_payment"], 0.0);

    // a dictatorship instance ignores the low agent's report entirely
    let params = solve_to_file(dir.path(), "a4.json", &["solve", "--m", "0.9", "--m", "0.3"]);
    let a = stdout_json(&run(&["eval", "--params", &params, "--v", "0.8", "--v", "0.05"]));
    let b = stdout_json(&run(&["eval", "--params", &params, "--v", "0.8", "--v", "0.25"]));
    assert_eq!(a["allocation"], b["allocation"]);
    assert_eq!(a["payments"], b["payments"]);
}

#[test]
fn sample_streams_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let params = solve_to_file(dir.path(), "sym1.json", &["solve", "--m", "0.5", "--m", "0.5"]);

    let first = run(&["sample", "--params", &params, "--n", "64", "--seed", "9"]);
    let second = run(&["sample", "--params", &params, "--n", "64", "--seed", "9"]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "same seed must be byte-identical");
    assert_eq!(
        String::from_utf8_lossy(&first.stderr).lines().next(),
        Some("seed: 9")
    );

    let text = String::from_utf8(first.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("v1,v2"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 64);
    for row in rows {
        for field in row.split(',') {
            let v: f64 = field.parse().expect("numeric field");
            assert!((0.0..=1.0).contains(&v));
            assert!(field.contains('.'), "locale-free '.' decimal: {field}");
        }
    }

    let third = run(&["sample", "--params", &params, "--n", "64", "--seed", "10"]);
    assert_ne!(first_stdout_or(&third), text, "different seed, different draws");
}

fn first_stdout_or(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn verify_passes_and_tampering_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let params = solve_to_file(dir.path(), "sym2.json", &["solve", "--m", "0.84", "--m", "0.84"]);

    let out = run(&[
        "verify", "--params", &params, "--grid", "41", "--mc", "50000", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["all_pass"], true);
    assert_eq!(report["case"], "SYM_II");
    assert!(String::from_utf8_lossy(&out.stderr).contains("ALL PASS"));

    // hand-edit one constant: the battery must fail and exit 1
    let text = std::fs::read_to_string(&params).unwrap();
    let tampered = text.replace("0.19999999999999996", "0.201");
    assert_ne!(text, tampered, "tamper target present");
    let tpath = dir.path().join("tampered.json");
    std::fs::write(&tpath, tampered).unwrap();
    let out = run(&[
        "verify", "--params", tpath.to_str().unwrap(), "--grid", "41", "--mc", "50000",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn verify_is_invariant_to_worker_count() {
    let base = run(&[
        "verify", "--m", "0.9", "--m", "0.65", "--grid", "31", "--mc", "40000", "--workers", "1",
    ]);
    let wide = run(&[
        "verify", "--m", "0.9", "--m", "0.65", "--grid", "31", "--mc", "40000", "--workers", "4",
    ]);
    assert_eq!(base.status.code(), Some(0), "{}", String::from_utf8_lossy(&base.stderr));
    assert_eq!(base.stdout, wide.stdout, "report must not depend on worker count");
}

#[test]
fn sweep_crosses_the_symmetric_split_continuously() {
    let out = run(&["sweep", "--m1-range", "0.6:0.9:31"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m1,m2,case,guarantee"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 31);
    let mut prev: Option<f64> = None;
    let mut saw_low = false;
    let mut saw_high = false;
    for row in &rows {
        let g: f64 = row[3].parse().unwrap();
        if let Some(p) = prev {
            assert!(g > p, "guarantee must increase along the diagonal");
            assert!(g - p < 5e-2, "no jump across the split");
        }
        prev = Some(g);
        saw_low |= row[2] == "SYM_I";
        saw_high |= row[2].starts_with("SYM_II");
    }
    assert!(saw_low && saw_high, "sweep must cross the case split");

    // the square sweep labels every cell
    let out = run(&[
        "sweep", "--m1-range", "0.1:1.0:10", "--m2-range", "0.1:1.0:10", "--workers", "2",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 101);
    for line in text.lines().skip(1) {
        let case = line.split(',').nth(2).unwrap();
        assert!(!case.starts_with("ERROR"), "unlabeled cell: {line}");
    }
}

#[test]
fn exit_codes_are_a_stable_contract() {
    // 2: domain error (mean outside [0, 1])
    let out = run(&["classify", "--m1", "2", "--m2", "0.5"]);
    assert_eq!(out.status.code(), Some(2));

    // 3: no solution (below the N-agent family's mean floor)
    let out = run(&["solve", "--mode", "nagent", "--n", "3", "--m", "0.5"]);
    assert_eq!(out.status.code(), Some(3));

    // 4: IO error (missing file)
    let out = run(&["eval", "--params", "/nonexistent/p.json", "--v", "1", "--v", "1"]);
    assert_eq!(out.status.code(), Some(4));

    // 4: schema version from the future
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("future.json");
    std::fs::write(&path, r#"{"schema_version": 99, "solved": {}}"#).unwrap();
    let out = run(&["eval", "--params", path.to_str().unwrap(), "--v", "1", "--v", "1"]);
    assert_eq!(out.status.code(), Some(4));
}

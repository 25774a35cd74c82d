use std::process::{Command, Output};

use serde_json::Value;

use shorprob::cli::{OutputDocument, SimulationDoc, CSV_HEADER};

fn shorprob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shorprob"))
        .args(args)
        .env_remove("SHOR_CENSUS_LIMIT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn prob_reports_exact_fractions() {
    let o = shorprob(&["prob", "21"]);
    assert!(o.status.success());
    let doc: OutputDocument = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc.schema_version, "1");
    assert_eq!(doc.step_probabilities().unwrap().p_overall.to_string(), "2/7");
    assert_eq!(doc.failure_class.tag, "CanSucceed");

    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["probabilities"]["overall"]["num"], "2");
    assert_eq!(v["probabilities"]["overall"]["den"], "7");
}

#[test]
fn prob_accepts_factors_alone_or_consistent() {
    let a = shorprob(&["prob", "--factors", "2^3"]);
    let b = shorprob(&["prob", "8", "--factors", "2^3"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc: OutputDocument = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc.step_probabilities().unwrap().p_overall.to_string(), "1/4");
}

#[test]
fn prob_large_n_with_factors() {
    let o = shorprob(&["prob", "--factors", "1000000007*998244353"]);
    assert!(o.status.success());
    let doc: OutputDocument = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc.n, "998244359987710471");
}

#[test]
fn prob_failure_tags() {
    for (n, tag) in [
        ("2", "StepTwoFails"),
        ("4", "StepThreeFails_Four"),
        ("27", "StepThreeFails_PrimePower"),
        ("18", "StepThreeFails_TwicePrimePower"),
    ] {
        let o = shorprob(&["prob", n]);
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["failure_class"]["tag"], tag, "N = {n}");
        assert_eq!(v["probabilities"]["overall"]["num"], "0");
    }
}

#[test]
fn prob_pretty_and_census() {
    let o = shorprob(&["prob", "4", "--pretty"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("StepThreeFails_Four"));

    let o = shorprob(&["prob", "15", "--census"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["census"]["success_count"], "6");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["prob", "15", "--factors", "3*7"],
        vec!["prob", "1"],
        vec!["prob", "abc"],
        vec!["prob"],
        vec!["verify", "5..4"],
        vec!["verify", "1..10"],
        vec!["simulate", "15", "--trials", "0"],
        vec!["sweep", "2-50"],
        vec!["prob", "--factors", "4*3"],
    ] {
        assert_eq!(shorprob(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn census_over_limit_exits_3() {
    let o = Command::new(env!("CARGO_BIN_EXE_shorprob"))
        .args(["census", "1001"])
        .env("SHOR_CENSUS_LIMIT", "1000")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(shorprob(&["census", "1001"]).status.code(), Some(0));
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let o = shorprob(&["sweep", "2..5", "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn census_dump_has_one_line_per_residue() {
    let o = shorprob(&["census", "12", "--dump"]);
    assert!(o.status.success());
    let lines: Vec<Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[5]["order"], 2);
    let summary: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(summary["census"]["total"], "12");
}

#[test]
fn simulate_reports_reference_and_seed() {
    let o = shorprob(&["simulate", "15", "--trials", "20000", "--seed", "3"]);
    assert!(o.status.success());
    let doc: SimulationDoc = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc.trials, 20000);
    assert_eq!(doc.seed, 3);
    assert_eq!(doc.exact_reference.to_rational().unwrap().to_string(), "2/5");
    assert!(doc.z_score.unwrap().abs() < 4.0);

    let o = shorprob(&["simulate", "9", "--trials", "5000"]);
    let doc: SimulationDoc = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc.successes, 0);
}

#[test]
fn simulate_seed_changes_output() {
    let a = shorprob(&["simulate", "35", "--trials", "10000", "--seed", "1"]);
    let b = shorprob(&["simulate", "35", "--trials", "10000", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn verify_small_range() {
    let o = shorprob(&["verify", "2..200"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("199 values checked, 0 mismatches"));

    let o = shorprob(&["verify", "30..30"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("exactly 2x"));
}

#[test]
fn sweep_csv_and_json_agree() {
    let csv = shorprob(&["sweep", "2..40"]);
    let json = shorprob(&["sweep", "2..40", "--format", "json"]);
    assert!(csv.status.success() && json.status.success());
    let csv = stdout(&csv);
    let mut rows = csv.lines();
    assert_eq!(rows.next().unwrap(), CSV_HEADER.join(","));
    let docs: Vec<OutputDocument> = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(docs.len(), 39);
    for (row, doc) in rows.zip(&docs) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[0], doc.n);
        let p = doc.step_probabilities().unwrap();
        assert_eq!(cols[5], p.p_overall.to_string());
        assert_eq!(cols[7], doc.failure_class.tag);
    }
}

#[test]
fn sweep_to_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let o = shorprob(&["sweep", "2..30", "-o", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, shorprob(&["sweep", "2..30"]).stdout);
}

use std::path::Path;
use std::process::{Command, Output};

fn learnbd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_learnbd"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = learnbd(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

/// One facility, one customer: `min x + Q(x)` with `Q(0) = 3`, `Q(1) = 0.3`.
fn write_toy(dir: &Path) {
    std::fs::write(dir.join("toy.txt"), "1 1\n1 1\n1\n0.3\n").unwrap();
    std::fs::write(dir.join("toy.csv"), "d0,probability\n1,1\n").unwrap();
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn toy_solve_summary() {
    let dir = tempfile::tempdir().unwrap();
    write_toy(dir.path());
    ok(dir.path(), &["solve", "--instance", "toy.txt", "--scenarios", "toy.csv", "--out", "run"]);
    let mut r = csv::Reader::from_path(dir.path().join("run/summary.csv")).unwrap();
    let header = r.headers().unwrap().clone();
    let row = r.records().next().unwrap().unwrap();
    let get = |name: &str| row[header.iter().position(|h| h == name).unwrap()].to_string();
    assert_eq!(get("method"), "bd");
    assert_eq!(get("iterations"), "2");
    assert_eq!(get("cuts_total"), "1");
    assert!(get("gap_pct").parse::<f64>().unwrap() < 1e-9);
    let log = csv_rows(&dir.path().join("run/log.csv"));
    assert_eq!(log.len(), 2);
    let sol: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/solution.json")).unwrap()).unwrap();
    assert!((sol["objective"].as_f64().unwrap() - 1.3).abs() < 1e-9);
    assert_eq!(sol["x"], serde_json::json!([1.0]));
}

#[test]
fn learnbd_needs_rows() {
    let dir = tempfile::tempdir().unwrap();
    write_toy(dir.path());
    let out = learnbd(
        dir.path(),
        &["solve", "--method", "learnbd", "--instance", "toy.txt", "--scenarios", "toy.csv", "--out", "run"],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("phase-1 rows required"));
}

#[test]
fn generate_writes_requested_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["generate", "--facilities", "3", "--customers", "5", "--num-scenarios", "7", "--seed", "3", "--out", "g"],
    );
    assert_eq!(csv_rows(&dir.path().join("g/scenarios.csv")).len(), 7);
    assert!(dir.path().join("g/instance.txt").exists());
    ok(dir.path(), &["generate", "--kind", "cmnd", "--num-scenarios", "2", "--seed", "3", "--out", "n"]);
    assert_eq!(csv_rows(&dir.path().join("n/scenarios.csv")).len(), 2);
    assert!(dir.path().join("n/instance.json").exists());
}

#[test]
fn phase1_train_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let inst = ["--facilities", "3", "--customers", "5", "--num-scenarios", "3", "--seed", "5"];
    let with = |extra: &[&'static str]| -> Vec<&str> { inst.iter().copied().chain(extra.iter().copied()).collect() };
    ok(dir.path(), &[&["phase1"][..], &with(&["--rows", "rows.csv"])].concat());
    let rows = csv_rows(&dir.path().join("rows.csv"));
    assert!(!rows.is_empty() && rows.len() <= 2 * 6);

    ok(dir.path(), &["train", "--rows", "rows.csv", "--delta-list", "1.2", "--out", "tr"]);
    assert!(dir.path().join("tr/model_delta_1.2000.json").exists());
    assert_eq!(csv_rows(&dir.path().join("tr/train_summary.csv")).len(), 1);

    ok(dir.path(), &[&["solve"][..], &with(&["--out", "bd"])].concat());
    ok(dir.path(), &[&["solve"][..], &with(&["--method", "learnbd", "--rows", "rows.csv", "--out", "lb"])].concat());
    ok(dir.path(), &["report", "--run", "bd", "--run", "lb", "--out", "rep"]);
    let table = csv_rows(&dir.path().join("rep/comparison.csv"));
    assert_eq!(table.len(), 2);
    assert_eq!(&table[0][1], "bd");
    assert_eq!(&table[1][1], "learnbd");
    let lb_log = std::fs::read_to_string(dir.path().join("lb/log.csv")).unwrap();
    assert!(lb_log.lines().next().unwrap().ends_with("delta_value,retrain_count"));
}

#[test]
fn report_rejects_tampered_summary() {
    let dir = tempfile::tempdir().unwrap();
    write_toy(dir.path());
    ok(dir.path(), &["solve", "--instance", "toy.txt", "--scenarios", "toy.csv", "--out", "run"]);
    let path = dir.path().join("run/summary.csv");
    let text = std::fs::read_to_string(&path).unwrap().replace(",2,", ",3,");
    std::fs::write(&path, text).unwrap();
    let out = learnbd(dir.path(), &["report", "--run", "run", "--out", "rep"]);
    assert!(!out.status.success());
}

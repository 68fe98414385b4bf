use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gue-edge"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn gue-edge")
}

/// Data rows of a CSV file as (header, rows).
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn tw_table_known_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tw.csv");
    let o = run(&["tw-table", "--s", "0,8", "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = read(&out);
    assert!(text.contains("# default_m=100"));
    assert!(text.contains("# default_seed=42"));
    assert!(!text.contains('\r'));
    let (h, rows) = parse_csv(&text);
    assert_eq!(h, ["s", "F2_det", "F2_qint", "q", "u0", "v0"]);
    let f = |r: usize, c: &str| rows[r][col(&h, c)].parse::<f64>().unwrap();
    assert!((f(0, "F2_det") - f(0, "F2_qint")).abs() < 1e-7);
    assert!((f(0, "F2_det") - 0.969372828355).abs() < 1e-9);
    assert!((f(1, "F2_det") - 1.0).abs() < 1e-12);
    // 15 significant digits
    assert_eq!(
        rows[0][col(&h, "F2_det")].split('e').next().unwrap().len(),
        16
    );
}

#[test]
fn empty_grid_is_usage_error() {
    assert_eq!(run(&["tw-table", "--s", ""]).status.code(), Some(2));
    assert_eq!(run(&["tw-table"]).status.code(), Some(2));
}

#[test]
fn regime_violation_names_value() {
    let o = run(&["tw-table", "--s", "0,-11.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("-11.5"));
    assert!(o.stdout.is_empty());
    let o = run(&["tw-table", "--s", "0", "--m", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["mc", "--n", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn edgeworth_first_order_vanishes_at_c0() {
    let o = run(&["edgeworth", "--n", "1,8", "--s", "-2,0.5"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let (h, rows) = parse_csv(&text);
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r[col(&h, "F_order0")], r[col(&h, "F_order1")]);
    }
    // n = 1, tau(-2) = 0
    assert!((rows[0][col(&h, "F_exact")].parse::<f64>().unwrap() - 0.5).abs() < 1e-12);
    assert!(text.contains("# summary slope_order2_s-2="));
}

#[test]
fn edgeworth_json_mirrors_csv() {
    let o = run(&[
        "--format",
        "json",
        "edgeworth",
        "--n",
        "2",
        "--s",
        "0",
        "--c",
        "1",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &v["rows"][0];
    assert_eq!(row["n"], 2);
    assert_eq!(row["c"], 1.0);
    assert!(row["F_exact"].as_f64().unwrap() > 0.9);
    assert_eq!(v["meta"]["default_T"], "40");
}

#[test]
fn verify_exit_codes() {
    assert_eq!(
        run(&["verify", "--check", "n1_median"]).status.code(),
        Some(0)
    );
    assert_eq!(
        run(&[
            "verify",
            "--check",
            "tw_cross_route",
            "--tolerance",
            "1e-15"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        run(&["verify", "--check", "no_such_check"]).status.code(),
        Some(2)
    );
}

#[test]
fn mc_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&[
            "mc",
            "--n",
            "6",
            "--samples",
            "5000",
            "--seed",
            "7",
            "-o",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let (h, rows) = parse_csv(&read(&a));
    assert_eq!(rows.len(), 20);
    let inside = rows
        .iter()
        .filter(|r| r[col(&h, "inside_CI")] == "true")
        .count();
    assert!(inside >= 18, "{inside}/20 inside the band");
}

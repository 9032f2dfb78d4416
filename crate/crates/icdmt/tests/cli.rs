use std::path::Path;
use std::process::{Command, Output};

fn icdmt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icdmt"))
        .args(args)
        .env_remove("ICDMT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn dmt_four_by_three_segments() {
    let out = icdmt(&["dmt", "4", "3", "--all-segments", "--r-grid", "0.05"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("K,r,dstar,optimal,achievable\n"));
    for (k, r, d) in [("2", "0", "12"), ("5/2", "1", "6"), ("3", "2", "2")] {
        assert!(
            csv_rows(&text)
                .iter()
                .any(|row| row[0] == k && row[1] == r && row[2] == d),
            "K={k} r={r}"
        );
    }
}

#[test]
fn dmt_two_by_two_four_thirds() {
    let out = icdmt(&["dmt", "2", "2", "--k", "4/3", "--r-grid", "1/3"]);
    let rows = csv_rows(&stdout(&out));
    let d: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(d, ["4", "3", "2", "1", "0"]);
}

#[test]
fn dmt_siso_single_line() {
    let text = stdout(&icdmt(&["dmt", "1", "1", "--r-grid", "0.5"]));
    assert_eq!(
        text,
        "K,r,dstar,optimal,achievable\n1,0,1,1,1\n1,0.5,0.5,0.5,0.5\n1,1,0,0,0\n"
    );
}

#[test]
fn dmt_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    assert!(icdmt(&["dmt", "2", "2", "--out", path.to_str().unwrap()])
        .status
        .success());
    assert!(std::fs::read_to_string(path).unwrap().lines().count() > 10);
}

#[test]
fn scheme_outputs() {
    let text = stdout(&icdmt(&["scheme", "4", "3", "0", "--print"]));
    assert_eq!(text.lines().count(), 5);
    assert_eq!(text.lines().nth(1).unwrap().split_whitespace().count(), 6);
    assert_eq!(text.matches("x_").count(), 12);

    let json: serde_json::Value = serde_json::from_str(&stdout(&icdmt(&["scheme", "2", "2", "0", "--json"]))).unwrap();
    assert_eq!(json["blocks"], serde_json::json!([[1, 2], [1], [2]]));

    let text = stdout(&icdmt(&["scheme", "1", "1", "0"]));
    assert_eq!(text.lines().nth(1).unwrap().trim(), "x_1");
    assert_eq!(icdmt(&["scheme", "2", "2", "2"]).status.code(), Some(2));
}

#[test]
fn verify_suites() {
    let out = icdmt(&["verify", "--lemma1", "--max-antennas", "6"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("PASS lemma1"));

    let out = icdmt(&["verify", "--lp-oracle", "--max-antennas", "4"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("max deviation"));

    let out = icdmt(&["verify", "--lemma3", "--samples", "50", "--inject-negative-xi"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.starts_with("FAIL lemma3"));
    assert!(text.contains("NegativeEntry"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(icdmt(&["simulate", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(icdmt(&["bound", "--n", "0"]).status.code(), Some(2));
    assert_eq!(icdmt(&["dmt", "2"]).status.code(), Some(2));
    assert_eq!(icdmt(&["dmt", "2", "2", "--k", "3"]).status.code(), Some(2));
    assert_eq!(icdmt(&["simulate", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(icdmt(&["bound", "--n", "1", "--mu-grid", "1:2"]).status.code(), Some(2));
}

#[test]
fn bound_table() {
    let text = stdout(&icdmt(&["bound", "--n", "1", "--mu-grid", "1:10:0.5"]));
    let vals: Vec<f64> = csv_rows(&text).iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(vals.len(), 19);
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn carve_integer_lattice() {
    let out = icdmt(&["carve", "--dim", "2", "--radius", "10"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(json["count"].as_u64().unwrap() >= 314);
    assert_eq!(json["unmet"], false);
    assert_eq!(json["lattice"]["generator"], serde_json::json!([1.0, 0.0, 0.0, 1.0]));
}

fn simulate_small(dir: &Path, threads: &str) -> String {
    let out = icdmt(&[
        "simulate",
        "--preset",
        "siso-sanity",
        "--rho-db",
        "10:20:5",
        "--trials",
        "4000",
        "--max-trials",
        "8000",
        "--seed",
        "3",
        "--threads",
        threads,
        "--quiet",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read_to_string(dir.join("siso-sanity.3.csv")).unwrap()
}

#[test]
fn simulate_is_reproducible_across_threads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let one = simulate_small(a.path(), "1");
    assert_eq!(one, simulate_small(b.path(), "3"));
    assert_eq!(csv_rows(&one).len(), 3);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("siso-sanity.3.json")).unwrap()).unwrap();
    assert_eq!(json["experiment"]["seed"], 3);
    assert_eq!(json["experiment"]["rho_db"], serde_json::json!([10.0, 15.0, 20.0]));
    assert!(json["metadata"]["wall_time_s"].is_number());
}

#[test]
fn simulate_config_file_and_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(
        &config,
        r#"{"mode": "compare", "experiment": {"name": "cmp", "system": {"m": 2, "n": 2},
            "rho_db": [4.0, 8.0], "budget": {"min_trials": 2000, "min_errors": 0, "max_trials": 2000},
            "lattice": {"kind": "random-best-of", "k": 2}, "pilot_trials": 500}}"#,
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_icdmt"))
        .args([
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "5",
            "--quiet",
        ])
        .env("ICDMT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("ordering margin"));
    for name in ["cmp-reduced", "cmp-full-cubic", "cmp-full-best"] {
        assert!(dir.path().join(format!("{name}.5.csv")).exists(), "{name}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cmp.5.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["experiment"]["seed"], 5);
    assert_eq!(summary["slopes"].as_array().unwrap().len(), 3);
}

#[test]
fn simulate_outage_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = icdmt(&[
        "simulate",
        "--preset",
        "siso-outage",
        "--trials",
        "20000",
        "--max-trials",
        "20000",
        "--quiet",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("siso-outage.1.csv")).unwrap();
    let rows = csv_rows(&csv);
    assert!(rows.iter().all(|r| r[2] == "0"));
    let outage: Vec<f64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    assert!(outage.windows(2).all(|w| w[1] < w[0]));
}

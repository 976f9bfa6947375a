//! End-to-end checks of the command-line interface.

use std::path::PathBuf;
use std::process::{Command, Output};

fn entest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn entest_env(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_entest"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("entest-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn spectrum_command_lists_blocks() {
    let out = entest(&["spectrum", "--n", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "outcome,j,copies,block_dim,weight_b_0,weight_b_0.25,weight_b_0.5,weight_b_0.75,weight_b_1"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..4], &["1", "3/2", "1", "16"]);
    let second: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&second[..4], &["2", "1/2", "2", "4"]);
}

#[test]
fn spectrum_rejects_zero_copies() {
    let out = entest(&["spectrum", "--n", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table_reproduces_reference_gains() {
    let out = entest(&["table", "--n", "1,2,3,4,5,10,20,40,60,80"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let want = [
        0.0, 0.03751, 0.08397, 0.13259, 0.18059, 0.39245, 0.69639, 1.07422, 1.32005, 1.50261,
    ];
    for (line, want) in text.lines().skip(1).zip(want) {
        let gain: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((gain - want).abs() < 1e-4, "line {line} vs {want}");
    }
}

#[test]
fn table_converts_to_nats() {
    let out = entest(&["table", "--n", "2", "--nats"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text.lines().nth(1).unwrap();
    let gain: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((gain - 0.03751 * std::f64::consts::LN_2).abs() < 1e-4);
    assert!(text.lines().next().unwrap().contains("gain_nats"));
}

#[test]
fn table_rejects_empty_n_list() {
    let out = entest(&["table", "--n", ""]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn quadrature_node_count_is_validated_but_free_to_raise() {
    let out = entest(&["table", "--n", "2", "--nodes", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = entest(&["table", "--n", "2", "--nodes", "400"]);
    assert!(out.status.success());
    let gain: f64 = stdout(&out)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((gain - 0.037506).abs() < 1e-6);
}

#[test]
fn fit_recovers_the_asymptote_from_a_table_file() {
    let dir = temp_dir("fit");
    let table = dir.join("table.csv");
    let out = entest(&[
        "table",
        "--n",
        "40,50,60,70,80",
        "--output",
        table.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = entest(&["fit", "--input", table.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let slope: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.41..=0.47).contains(&slope), "slope {slope}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn fit_rejects_small_n_tables() {
    let dir = temp_dir("fit-small");
    let table = dir.join("small.csv");
    std::fs::write(&table, "n,gain_bits\n2,0.0375\n3,0.0840\n").unwrap();
    let out = entest(&["fit", "--input", table.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn oracle_passes_at_default_tolerance_and_fails_when_squeezed() {
    let out = entest(&["oracle", "--n", "2", "--b", "0,0.3,1"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.lines().count() >= 4);

    // deviations are ~1e-15 but not exactly zero: an absurd tolerance trips
    let out = entest(&["oracle", "--n", "2", "--b", "0.3", "--tolerance", "1e-20"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_monte_carlo_smoke() {
    let out = entest(&[
        "oracle",
        "--n",
        "2",
        "--b",
        "0.3",
        "--method",
        "monte-carlo",
        "--budget",
        "20000",
        "--seed",
        "3",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
}

#[test]
fn local_command_matches_global_gain() {
    let out = entest(&["local", "--n", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = line.split(',').collect();
    let marginal: f64 = fields[2].parse().unwrap();
    let average: f64 = fields[4].parse().unwrap();
    assert!((marginal - 0.9).abs() < 1e-9);
    assert!((average - 0.037506).abs() < 1e-5);
}

#[test]
fn simulate_is_byte_identical_for_a_fixed_seed() {
    let dir = temp_dir("simulate");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for path in [&a, &b] {
        let out = entest(&[
            "simulate",
            "--n",
            "2",
            "--trials",
            "500",
            "--seed",
            "42",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b);

    let out = entest(&[
        "simulate",
        "--n",
        "2",
        "--trials",
        "500",
        "--seed",
        "43",
        "--output",
        a.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_ne!(std::fs::read(&a).unwrap(), bytes_b);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_dir_env_var_resolves_relative_paths() {
    let dir = temp_dir("envdir");
    let out = entest_env(
        &["table", "--n", "2", "--output", "gains.csv"],
        &[("ENTEST_OUTPUT_DIR", dir.to_str().unwrap())],
    );
    assert!(out.status.success());
    assert!(dir.join("gains.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn json_output_carries_the_schema_version() {
    let out = entest(&["table", "--n", "2,3", "--format", "json"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["schema"], "entest/1");
    assert_eq!(value["command"], "table");
    assert_eq!(value["rows"].as_array().unwrap().len(), 2);

    let out = entest(&["simulate", "--n", "1", "--trials", "3", "--format", "json"]);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["schema"], "entest/1");
    assert_eq!(value["outcome_counts"][0], 3);
}

//! The `irs-sim` binary on small inputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use irs_core::model::NetworkConfig;
use irs_sim::config::{load_config, to_json};

fn irs_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irs-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn reference_config_round_trips_through_the_loader() {
    let out = irs_sim(&["reference-config"]);
    assert!(out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ref.json");
    fs::write(&path, stdout(&out)).unwrap();
    assert_eq!(load_config(&path).unwrap(), NetworkConfig::reference(5, 10, 20));
}

#[test]
fn simulate_writes_records_figures_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.json");
    fs::write(&cfg, to_json(&NetworkConfig::reference(2, 3, 2))).unwrap();
    let out_dir = dir.path().join("run");
    let out = irs_sim(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--deltas",
        "0.5,2",
        "--realizations",
        "2",
        "--seed",
        "5",
        "--out",
        out_dir.to_str().unwrap(),
        "--debug",
        "--threads",
        "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    for f in [
        "records.csv",
        "fig_a.csv",
        "fig_b.csv",
        "fig_c.csv",
        "fig_d.csv",
        "metadata.json",
        "debug/bisection_trace.csv",
        "debug/altopt_trace.csv",
    ] {
        assert!(out_dir.join(f).is_file(), "missing {f}");
    }
    // 3 schemes x 2 budgets x 2 realizations, plus the header.
    let records = fs::read_to_string(out_dir.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 12);
    let fig_b = fs::read_to_string(out_dir.join("fig_b.csv")).unwrap();
    assert_eq!(fig_b.lines().count(), 1 + 6);

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["n_realizations"], 2);
    assert_eq!(meta["master_seed"], 5);
    assert_eq!(meta["config"]["K"], 2);

    // Summary table on stdout: header plus one row per (scheme, delta).
    assert_eq!(stdout(&out).lines().count(), 1 + 6);
}

#[test]
fn simulate_rejects_bad_grids() {
    let dir = tempfile::tempdir().unwrap();
    let out = irs_sim(&[
        "simulate",
        "--deltas",
        "2:1:0.5",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(!dir.path().join("x").join("records.csv").exists());
}

#[test]
fn simulate_rejects_an_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("x");
    let out = irs_sim(&["simulate", "--config", "/dev/null", "--out", out_dir.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(!out_dir.join("records.csv").exists());
}

#[test]
fn solve_conic_reads_the_text_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.conic");
    // min -x0 - x1 subject to ||(x0, x1)|| <= 1.
    fs::write(
        &path,
        "CONIC 1\nVARS 2\nOBJ 0:-1 1:-1\nSOC 2 1 ;\nROW 0 ; 0:1\nROW 0 ; 1:1\nEND\n",
    )
    .unwrap();
    let out = irs_sim(&["solve-conic", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("status optimal"), "{text}");
    let objective: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("objective "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((objective + 2f64.sqrt()).abs() < 1e-6);
}

#[test]
fn solve_conic_reports_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conic");
    fs::write(&path, "CONIC 1\nVARS two\nEND\n").unwrap();
    let out = irs_sim(&["solve-conic", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn check_suites_pass() {
    // The selection check judges a median, so the oracle suite runs at its
    // default size; the invariant checks hold on any number of instances.
    for args in [
        &["check", "--suite", "invariants", "--instances", "3", "--seed", "4"][..],
        &["check", "--suite", "oracle"][..],
    ] {
        let out = irs_sim(args);
        let text = stdout(&out);
        assert!(out.status.success(), "{args:?}: {text}");
        assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
    }
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let out_dir = dir.path().join(format!("t{threads}"));
        let out = irs_sim(&[
            "simulate",
            "--deltas",
            "1,3",
            "--realizations",
            "2",
            "--seed",
            "11",
            "--schemes",
            "proposed,no_irs",
            "--out",
            out_dir.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(out.status.success());
        fs::read(Path::new(&out_dir).join("records.csv")).unwrap()
    };
    assert_eq!(run("1"), run("2"));
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gauge-dnls"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn conserve_writes_csv_and_passes() {
    let out = tempfile::tempdir().unwrap();
    let cfg = config("special_case.json");
    let o = run(&[
        "conserve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.path().join("conservation.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("mass"));
    assert!(csv.lines().count() > 10);
    assert!(o.stdout.is_empty());
}

#[test]
fn reports_are_byte_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config("lipschitz.json");
    for dir in [&a, &b] {
        let o = run(&[
            "lipschitz",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--quiet",
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    for file in ["lipschitz_flow.json", "lipschitz_flow.csv"] {
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn seed_flag_is_recorded() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "strichartz",
        "--seed",
        "99",
        "--format",
        "json",
        "--out",
        out.path().to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("strichartz.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 99);
    assert!(!out.path().join("strichartz.csv").exists());
}

#[test]
fn contract_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("unstable.json");
    // the first recorded sample sits well past the window where direct and gauged runs agree
    fs::write(
        &cfg,
        r#"{"kind": "direct_vs_gauged", "solver": {"dt": 0.001, "t_final": 1.0, "output_stride": 1000},
            "initial_data": {"kind": "gaussian", "amplitude": 5.0, "width": 1.0}}"#,
    )
    .unwrap();
    let o = run(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("[FAIL]"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(
        run(&["conserve", "--config", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["conserve", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["conserve", "--format", "xml"]).status.code(), Some(2));

    let wrong_kind = config("strichartz.json");
    assert_eq!(
        run(&["conserve", "--config", wrong_kind.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"kind": "conservation", "typo": 1}"#).unwrap();
    assert_eq!(
        run(&["conserve", "--config", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn solve_writes_a_trajectory() {
    let out = tempfile::tempdir().unwrap();
    let cfg = config("solve_general.json");
    let o = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--format",
        "json",
        "--quiet",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dump: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("trajectory.json")).unwrap()).unwrap();
    assert_eq!(dump["times"].as_array().unwrap().len(), 51);
}

#[test]
fn thread_cap_is_validated() {
    let o = bin()
        .env("GAUGE_DNLS_THREADS", "zero")
        .args(["strichartz", "--quiet"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

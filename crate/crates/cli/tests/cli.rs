use std::path::Path;
use std::process::{Command, Output};

fn entangle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entangle"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sweep_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = entangle(&[
        "sweep",
        "--model",
        "rmt",
        "--n",
        "5",
        "--lambda-grid",
        "0,1e-3,0.1",
        "--realizations",
        "3",
        "--seed",
        "7",
        "--out",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "lambda,sqrt_lambda,measure_name,k,basis,mean,stderr,theory_value,n_samples"
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["master_seed"], 7);
    assert_eq!(manifest["seeds"].as_array().unwrap().len(), 9);
}

#[test]
fn same_seed_gives_identical_output_for_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = entangle(&[
            "sweep",
            "--n",
            "4",
            "--lambda-grid",
            "logspace:1e-3:1:4",
            "--realizations",
            "4",
            "--seed",
            "3",
            "--threads",
            threads,
            "--out",
            path(&out),
        ]);
        assert!(o.status.success());
        std::fs::read(out.join("sweep.csv")).unwrap()
    };
    assert_eq!(run("a", "1"), run("b", "2"));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"model": {"kind": "kicked_rotor", "n": 5, "kick_strengths": [9.0, 10.0]}, "lambda_grid": [0.0, 0.01], "k_set": [2]}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = entangle(&[
        "sweep",
        "--config",
        path(&cfg),
        "--n",
        "6",
        "--format",
        "json",
        "--out",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(v["manifest"]["config"]["model"]["n"], 6);
    assert_eq!(v["manifest"]["config"]["model"]["kind"], "kicked_rotor");
    assert_eq!(v["points"].as_array().unwrap().len(), 2);

    let o = entangle(&["plot", "--input", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["entropies.svg", "ipr.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["sweep", "--n", "5", "--lambda-grid", "0,100"],
        vec!["sweep", "--n", "5", "--lambda-grid", "0.1", "--k-set", "0"],
        vec!["sweep", "--n", "5", "--lambda-grid", "logspace:1:2"],
        vec!["sweep", "--n", "5", "--lambda-grid", "0.1", "--realizations", "0"],
        vec!["sweep", "--n", "1", "--lambda-grid", "0"],
        vec!["sweep", "--model", "xyz"],
        vec!["udist", "--n", "5", "--lambda-grid", "0.5"],
    ] {
        let mut args = args;
        let out = dir.path().join("never");
        args.extend(["--out", path(&out)]);
        let o = entangle(&args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!out.exists());
    }
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"model\": ").unwrap();
    assert_eq!(entangle(&["sweep", "--config", path(&bad)]).status.code(), Some(2));
}

#[test]
fn udist_and_ipr_ratio_write_their_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u");
    let o = entangle(&[
        "udist",
        "--n",
        "5",
        "--lambda-grid",
        "1e-4,1e-3",
        "--realizations",
        "3",
        "--out",
        path(&u),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(u.join("u_distribution.csv").exists() && u.join("u_distribution.svg").exists());

    let i = dir.path().join("i");
    let o = entangle(&[
        "ipr-ratio",
        "--model",
        "kr",
        "--n",
        "5",
        "--lambda-grid",
        "1e-3,0.1",
        "--reference-realizations",
        "3",
        "--format",
        "json",
        "--out",
        path(&i),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(i.join("ipr_ratio.json")).unwrap()).unwrap();
    let points = report["points"].as_array().unwrap();
    assert_eq!(points.len(), 4);
    assert!(points.iter().all(|p| p["envelope"].is_number()));
}

use std::path::Path;

use clap::Parser;

use super::{commands, exit, run_cli, Cli};

fn lqas(args: &[&str]) -> (u8, String) {
    let argv = std::iter::once("lqas").chain(args.iter().copied());
    run_cli(Cli::try_parse_from(argv).expect("arguments parse"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL_RUN: &str = r#"
seed = 3
[dataset]
kind = "quadratic2d"
n = 40
noise = 0.1
[ansatz]
kind = "hea"
n_qubits = 2
k = 1
m = 1
[search]
iterations = 2
samples_total = 6
top_k = 2
[train]
epochs = 5
batch_size = 8
"#;

#[test]
fn run_writes_every_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(&config, SMALL_RUN).unwrap();
    let out_dir = dir.path().join("out");
    let (code, _) = lqas(&["run", p(&config), "--out-dir", p(&out_dir)]);
    assert_eq!(code, exit::OK);
    for f in [
        "report.json",
        "iterations.csv",
        "summary.txt",
        "scale.json",
        "best_ansatz_0.json",
        "best_ansatz_1.json",
        "best_ansatz_2.json",
    ] {
        assert!(out_dir.join(f).is_file(), "missing {f}");
    }

    let csv = std::fs::read_to_string(out_dir.join("iterations.csv")).unwrap();
    // Header, one base row, six candidates in each of two iterations.
    assert_eq!(csv.lines().count(), 1 + 1 + 6 + 6);

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    let summary = std::fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for (row, r) in rows.iter().zip(report["reports"].as_array().unwrap()) {
        let cells: Vec<&str> = row.split_whitespace().collect();
        let val_mse: f64 = cells[5].parse().unwrap();
        let val_r2: f64 = cells[6].parse().unwrap();
        assert_eq!(val_mse, r["best_validation"]["mse"].as_f64().unwrap());
        assert_eq!(val_r2, r["best_validation"]["r2"].as_f64().unwrap());
    }
    assert!(rows[0].starts_with("Base"));
    assert!(rows[2].starts_with("Iter2"));

    // A best-ansatz report can be evaluated directly.
    let best = out_dir.join("best_ansatz_2.json");
    let (code, json) = lqas(&["eval", p(&best), "--data", "quadratic2d:n=40,noise=0.1"]);
    assert_eq!(code, exit::OK);
    assert!(json.contains("\"validation\""));
}

#[test]
fn rerun_is_byte_identical_for_any_job_count() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(&config, SMALL_RUN).unwrap();
    for (out, jobs) in [("a", "1"), ("b", "3")] {
        let out = dir.path().join(out);
        let (code, _) = lqas(&["--jobs", jobs, "run", p(&config), "--out-dir", p(&out)]);
        assert_eq!(code, exit::OK);
    }
    for f in [
        "report.json",
        "iterations.csv",
        "summary.txt",
        "best_ansatz_2.json",
    ] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(f)).unwrap(),
            std::fs::read(dir.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn relative_paths_follow_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = lqas(&[
        "gen",
        "quadratic2d:n=30",
        "-o",
        p(&dir.path().join("d.csv")),
    ]);
    assert_eq!(code, exit::OK);
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "[dataset]\nkind = \"table\"\npath = \"d.csv\"\n\
         [ansatz]\nkind = \"hea\"\nn_qubits = 2\nk = 1\nm = 1\n\
         [search]\niterations = 1\nsamples_total = 2\ntop_k = 1\n[train]\nepochs = 2\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(lqas(&["run", p(&config), "--out-dir", p(&out)]).0, exit::OK);
    assert!(out.join("report.json").is_file());
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.toml");
    std::fs::write(&zero, "[search]\niterations = 0\n").unwrap();
    assert_eq!(lqas(&["run", p(&zero)]).0, exit::CONFIG);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "nonsense = true\n").unwrap();
    assert_eq!(lqas(&["run", p(&bad)]).0, exit::CONFIG);

    // 2D data on the default 4-qubit ansatz.
    let width = dir.path().join("width.toml");
    std::fs::write(&width, "[dataset]\nkind = \"quadratic2d\"\n").unwrap();
    let err = commands::run(&width, None, Some(dir.path().join("o"))).unwrap_err();
    assert_eq!(exit::code_for(&err), exit::CONFIG);
    assert!(err.to_string().contains("feature columns"), "{err}");

    assert_eq!(lqas(&["--jobs", "0", "run", p(&bad)]).0, exit::CONFIG);
    assert_eq!(
        lqas(&["eval", "hea:2,1", "--data", "quadratic2d"]).0,
        exit::CONFIG
    );
}

#[test]
fn io_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    assert_eq!(lqas(&["run", p(&missing)]).0, exit::IO);
    let missing = dir.path().join("missing.json");
    assert_eq!(
        lqas(&["eval", p(&missing), "--data", "quadratic1d:n=20"]).0,
        exit::IO
    );
    assert_eq!(
        lqas(&["gen", "quadratic1d:n=10", "-o", "/proc/not/here.csv"]).0,
        exit::IO
    );
}

#[test]
fn gen_writes_table_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let q1 = dir.path().join("data/q1.csv");
    assert_eq!(lqas(&["gen", "quadratic1d", "-o", p(&q1)]).0, exit::OK);
    let csv = std::fs::read_to_string(&q1).unwrap();
    assert_eq!(csv.lines().count(), 501);
    assert_eq!(csv.lines().next().unwrap(), "x0,x1,x2,x3,y");
    let scale: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("data/scale.json")).unwrap())
            .unwrap();
    assert_eq!(scale["target"]["name"], "y");

    let q2 = dir.path().join("q2.csv");
    assert_eq!(lqas(&["gen", "quadratic2d", "-o", p(&q2)]).0, exit::OK);
    let csv = std::fs::read_to_string(&q2).unwrap();
    assert_eq!(csv.lines().count(), 201);

    // The generated table feeds straight back into eval.
    let (code, json) = lqas(&["eval", "hea:2,1,1", "--data", p(&q2)]);
    assert_eq!(code, exit::OK);
    assert!(json.contains("\"n_params\": 6"));

    // A different seed gives a different table.
    let q3 = dir.path().join("q3.csv");
    assert_eq!(
        lqas(&["--seed", "9", "gen", "quadratic2d", "-o", p(&q3)]).0,
        exit::OK
    );
    assert_ne!(std::fs::read(&q2).unwrap(), std::fs::read(&q3).unwrap());
}

#[test]
fn eval_prints_metrics_for_both_splits() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.toml");
    std::fs::write(&train, "epochs = 3\n").unwrap();
    let (code, json) = lqas(&[
        "eval",
        "hea:4,1,1",
        "--data",
        "quadratic1d:n=60",
        "--train-config",
        p(&train),
    ]);
    assert_eq!(code, exit::OK);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["n_params"], 12);
    for split in ["train", "validation"] {
        assert!(v[split]["mse"].as_f64().unwrap() >= 0.0);
        assert!(v[split]["r2"].as_f64().unwrap() <= 1.0);
    }
}

#[test]
fn zero_parameter_ansatz_evaluates() {
    let dir = tempfile::tempdir().unwrap();
    let enc = dir.path().join("enc.txt");
    std::fs::write(&enc, "2 0\nRX 0 f0\nRX 1 f1\n").unwrap();
    let (code, json) = lqas(&["eval", p(&enc), "--data", "quadratic2d:n=30"]);
    assert_eq!(code, exit::OK);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["n_params"], 0);
    assert!(v["validation"]["mse"].as_f64().unwrap().is_finite());
}

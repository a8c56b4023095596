//! End-to-end subcommand tests against the built binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tpot() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tpot"))
}

fn run(args: &[&str]) -> Output {
    tpot().args(args).output().expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tpot-cli-it-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn usage_errors_exit_1() {
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["evolve", "--bad-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_0() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("gen-epistasis"));
}

#[test]
fn missing_data_file_exits_2() {
    let out = run(&["baseline-rf", "--data", "/no/such/file.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_epistasis_roundtrips_through_loader() {
    let csv = tmp("epi.csv");
    let out = run(&[
        "gen-epistasis",
        "--heritability",
        "0.2",
        "--sample-size",
        "80",
        "--seed",
        "9",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(csv.exists());
    assert!(csv.with_extension("meta.json").exists());

    let loaded = tpot_cli::csvio::load_csv(&csv, "class").unwrap();
    assert_eq!(loaded.dataset.n_rows(), 80);
    assert_eq!(loaded.dataset.n_features(), 100);
    // integer-coded genotype features survive the round trip exactly
    assert!(loaded
        .dataset
        .columns()
        .iter()
        .all(|col| col.iter().all(|&v| v == 0.0 || v == 1.0 || v == 2.0)));
}

#[test]
fn gen_hillvalley_writes_layout() {
    let csv = tmp("hv.csv");
    let out = run(&[
        "gen-hillvalley",
        "--samples",
        "30",
        "--length",
        "24",
        "--seed",
        "4",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 31);
    assert!(text.lines().next().unwrap().ends_with(",class"));
}

fn small_training_csv() -> PathBuf {
    let csv = tmp("train.csv");
    if !csv.exists() {
        let out = run(&[
            "gen-hillvalley",
            "--samples",
            "48",
            "--length",
            "16",
            "--seed",
            "2",
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    csv
}

#[test]
fn evolve_then_export_roundtrip() {
    let csv = small_training_csv();
    let run_path = tmp("run.json");
    let out = run(&[
        "evolve",
        "--data",
        csv.to_str().unwrap(),
        "--pop",
        "8",
        "--gens",
        "2",
        "--seed",
        "3",
        "--budget-millis",
        "10000",
        "--out",
        run_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&run_path).unwrap();
    assert!(text.contains("\"tpot-run/1\""));

    let exported = tmp("best.json");
    let out = run(&["export", "--run", run_path.to_str().unwrap(), "--out", exported.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = std::fs::read_to_string(&exported).unwrap();
    let pipeline = tpot_core::pipeline::deserialize(&doc).unwrap();
    assert!(pipeline.validate(10, 20).is_empty());
    // rendering file alongside
    let rendered = std::fs::read_to_string(exported.with_extension("txt")).unwrap();
    assert_eq!(rendered.trim(), pipeline.render());
}

#[test]
fn export_refuses_corrupt_artifact() {
    let bad = tmp("bad-run.json");
    std::fs::write(&bad, "{\"version\": \"tpot-run/1\"").unwrap();
    let out = run(&["export", "--run", bad.to_str().unwrap(), "--out", tmp("x.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn baseline_rf_reports_accuracy() {
    let csv = small_training_csv();
    let out = run(&["baseline-rf", "--data", csv.to_str().unwrap(), "--trees", "50", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("balanced accuracy"), "{stdout}");
    assert!(stdout.contains("size 1"));
}

#[test]
fn bench_runs_and_writes_outputs() {
    let dir = tmp("bench-out");
    let spec = tmp("spec.json");
    std::fs::write(
        &spec,
        format!(
            r#"{{
  "version": "tpot-exp/1",
  "dataset": {{ "hill_valley": {{ "series_length": 16, "noise_std": 0.0, "n_samples": 48 }} }},
  "arms": ["rf_baseline", "random_search"],
  "replicates": 2,
  "seed": 11,
  "gp": {{ "population_size": 6, "generations": 2, "eval_budget_millis": 10000 }},
  "output_dir": {:?}
}}"#,
            dir.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = run(&["bench", "--spec", spec.to_str().unwrap(), "--workers", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["version"], "tpot-report/1");
    let records = report["body"]["records"].as_array().unwrap();
    let failures = report["body"]["failures"].as_array().unwrap();
    assert_eq!(records.len() + failures.len(), 4);
    let csv_text = std::fs::read_to_string(dir.join("replicates.csv")).unwrap();
    assert!(csv_text.starts_with("arm,replicate,accuracy,size\n"));
    assert!(Path::new(&dir.join("pipelines")).is_dir());
}

//! Harness-level tests: determinism of report bodies, accounting, and
//! holdout confinement.

use tpot_cli::experiment::{
    report_body_bytes, run_experiment, Arm, DataSource, ExperimentSpec, GpOverrides,
};
use tpot_cli::report::records_csv;
use tpot_core::datagen::HillValleySpec;

fn small_spec(seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        version: "tpot-exp/1".into(),
        dataset: DataSource::HillValley(HillValleySpec::new(48, 16, 0.0)),
        arms: vec![Arm::RfBaseline, Arm::RandomSearch, Arm::Guided],
        replicates: Some(2),
        outer_holdout_fraction: 0.25,
        seed,
        gp: GpOverrides {
            population_size: Some(6),
            generations: Some(2),
            // far above any real evaluation time so timing jitter cannot
            // flip a budget failure between runs
            eval_budget_millis: Some(60_000),
            ..Default::default()
        },
        paper_scale: false,
        output_dir: None,
    }
}

#[test]
fn identical_seeds_give_byte_identical_report_bodies() {
    let spec = small_spec(77);
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&spec).unwrap();
    assert_eq!(report_body_bytes(&a.report), report_body_bytes(&b.report));
    assert_eq!(records_csv(&a.report.body.records), records_csv(&b.report.body.records));
}

#[test]
fn different_seeds_change_the_body() {
    let a = run_experiment(&small_spec(1)).unwrap();
    let b = run_experiment(&small_spec(2)).unwrap();
    assert_ne!(report_body_bytes(&a.report), report_body_bytes(&b.report));
}

#[test]
fn record_accounting_holds() {
    let spec = ExperimentSpec {
        arms: vec![Arm::RfBaseline],
        replicates: Some(3),
        ..small_spec(5)
    };
    let out = run_experiment(&spec).unwrap();
    assert_eq!(out.report.body.records.len() + out.report.body.failures.len(), 3);
    assert_eq!(out.report.body.records.len(), 3, "rf baseline should never fail here");
    for r in &out.report.body.records {
        assert!(r.holdout_accuracy >= 0.0 && r.holdout_accuracy <= 1.0);
        assert_eq!(r.pipeline_size, 1);
    }
    assert_eq!(out.report.body.taint_check, "passed");
}

#[test]
fn summary_covers_each_arm_with_interval() {
    let out = run_experiment(&small_spec(9)).unwrap();
    assert_eq!(out.report.body.summary.len(), 3);
    for s in &out.report.body.summary {
        assert!(s.ci_low <= s.median_accuracy && s.median_accuracy <= s.ci_high);
        assert_eq!(s.n, 2);
    }
}

#[test]
fn evaluation_counts_respect_the_budget_contract() {
    use tpot_core::evolve::{evolve_run, random_search_run, GpConfig, SelectionMode};
    use tpot_core::rng::seeded_rng;

    let data = tpot_core::datagen::generate_hill_valley(
        &HillValleySpec::new(40, 16, 0.0),
        &mut seeded_rng(3),
    )
    .unwrap();
    let cfg = GpConfig {
        population_size: 7,
        generations: 3,
        selection_mode: SelectionMode::Standard,
        seed: 1,
        eval_budget_millis: 30_000,
        ..GpConfig::default()
    };
    let guided = evolve_run(&cfg, &data).unwrap();
    assert!(guided.total_evaluations <= 7 * 4);
    let random = random_search_run(&cfg, &data).unwrap();
    assert_eq!(random.total_evaluations, 21);
}

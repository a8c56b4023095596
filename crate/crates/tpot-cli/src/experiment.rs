//! Experiment orchestration: the four-arm comparison over re-seeded outer
//! splits. Arms only ever see the outer-train rows; representative pipelines
//! are re-scored once on the outer holdout.

use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use tpot_core::dataset::{stratified_split, Dataset};
use tpot_core::datagen::{
    generate_hill_valley, simulate_epistatic_dataset, write_csv, EpistasisSpec, HillValleySpec,
};
use tpot_core::evolve::{evolve_run, GpConfig, RunResult, SelectionMode};
use tpot_core::ops::{OperatorKind, ParamValue, Params};
use tpot_core::pipeline::{evaluate_on_split, serialize, Pipeline, PipelineNode};
use tpot_core::rng::{derive_seed, seeded_rng};

use crate::csvio::load_csv;
use crate::error::CliError;
use crate::report::{
    records_csv, summarize_arm, ExperimentReport, FailureRecord, RecordTiming, ReplicateRecord,
    ReportBody, ReportTiming, REPORT_VERSION,
};

pub const EXPERIMENT_SPEC_VERSION: &str = "tpot-exp/1";

/// Baseline forest gets a generous fixed budget; it is a single fit.
const BASELINE_BUDGET_MILLIS: u64 = 600_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    RfBaseline,
    RandomSearch,
    Guided,
    Pareto,
}

impl Arm {
    pub fn name(self) -> &'static str {
        match self {
            Arm::RfBaseline => "rf_baseline",
            Arm::RandomSearch => "random_search",
            Arm::Guided => "guided",
            Arm::Pareto => "pareto",
        }
    }

    fn stream(self) -> u64 {
        match self {
            Arm::RfBaseline => 11,
            Arm::RandomSearch => 12,
            Arm::Guided => 13,
            Arm::Pareto => 14,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Csv { path: PathBuf, label_column: String },
    Epistasis(EpistasisSpec),
    HillValley(HillValleySpec),
}

impl DataSource {
    fn describe(&self) -> String {
        match self {
            DataSource::Csv { path, .. } => format!("csv:{}", path.display()),
            DataSource::Epistasis(s) => format!(
                "epistasis(h2={}, maf={}, models={}, n={})",
                s.heritability_target, s.maf, s.n_models, s.sample_size
            ),
            DataSource::HillValley(s) => format!(
                "hillvalley(n={}, length={}, noise={})",
                s.n_samples, s.series_length, s.noise_std
            ),
        }
    }
}

/// Partial GP overrides layered over the experiment's base configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpOverrides {
    pub population_size: Option<usize>,
    pub generations: Option<usize>,
    pub mutation_rate: Option<f64>,
    pub crossover_rate: Option<f64>,
    pub elitism_fraction: Option<f64>,
    pub parsimony_probability: Option<f64>,
    pub max_depth: Option<usize>,
    pub max_operators: Option<usize>,
    pub eval_budget_millis: Option<u64>,
}

impl GpOverrides {
    fn apply(&self, mut base: GpConfig) -> GpConfig {
        if let Some(v) = self.population_size {
            base.population_size = v;
        }
        if let Some(v) = self.generations {
            base.generations = v;
        }
        if let Some(v) = self.mutation_rate {
            base.mutation_rate = v;
        }
        if let Some(v) = self.crossover_rate {
            base.crossover_rate = v;
        }
        if let Some(v) = self.elitism_fraction {
            base.elitism_fraction = v;
        }
        if let Some(v) = self.parsimony_probability {
            base.parsimony_probability = v;
        }
        if let Some(v) = self.max_depth {
            base.max_depth = v;
        }
        if let Some(v) = self.max_operators {
            base.max_operators = v;
        }
        if let Some(v) = self.eval_budget_millis {
            base.eval_budget_millis = v;
        }
        base
    }
}

fn default_version() -> String {
    EXPERIMENT_SPEC_VERSION.to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default = "default_version")]
    pub version: String,
    pub dataset: DataSource,
    pub arms: Vec<Arm>,
    /// Default: 10 desk-scale replicates (30 at paper scale).
    #[serde(default)]
    pub replicates: Option<usize>,
    #[serde(default = "default_holdout")]
    pub outer_holdout_fraction: f64,
    pub seed: u64,
    #[serde(default)]
    pub gp: GpOverrides,
    /// Paper-scale budgets (population 100, generations 100, 30 replicates)
    /// instead of the desk-scale defaults (50, 30, 10).
    #[serde(default)]
    pub paper_scale: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_holdout() -> f64 {
    0.25
}

impl ExperimentSpec {
    pub fn replicate_count(&self) -> usize {
        self.replicates.unwrap_or(if self.paper_scale { 30 } else { 10 })
    }

    pub fn resolved_gp(&self) -> GpConfig {
        let base = if self.paper_scale {
            GpConfig { population_size: 100, generations: 100, ..GpConfig::default() }
        } else {
            GpConfig { population_size: 50, generations: 30, ..GpConfig::default() }
        };
        self.gp.apply(base)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.version != EXPERIMENT_SPEC_VERSION {
            return Err(CliError::Data(format!(
                "unsupported experiment spec version `{}`",
                self.version
            )));
        }
        if self.arms.is_empty() {
            return Err(CliError::Data("experiment needs at least one arm".into()));
        }
        if self.replicate_count() < 1 {
            return Err(CliError::Data("replicates must be >= 1".into()));
        }
        if !(self.outer_holdout_fraction > 0.0 && self.outer_holdout_fraction < 1.0) {
            return Err(CliError::Data("outer_holdout_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

pub fn rf_baseline_pipeline(trees: i64) -> Pipeline {
    let mut params = Params::new();
    params.insert("trees".into(), ParamValue::Int(trees));
    params.insert("max_depth".into(), ParamValue::Int(0));
    Pipeline {
        root: PipelineNode::Model {
            kind: OperatorKind::RandomForest,
            params,
            child: Box::new(PipelineNode::Leaf),
        },
    }
}

/// Train a 500-tree random forest on the outer-train split and score it on
/// the holdout. Size is one operator by construction.
pub fn run_rf_baseline(
    outer_train: &Dataset,
    outer_test: &Dataset,
    seed: u64,
    trees: i64,
) -> Result<(f64, usize), CliError> {
    let pipeline = rf_baseline_pipeline(trees);
    let record =
        evaluate_on_split(&pipeline, outer_train, outer_test, seed, BASELINE_BUDGET_MILLIS);
    if record.failed {
        return Err(CliError::Run("baseline forest evaluation failed".into()));
    }
    Ok((record.balanced_accuracy, pipeline.size()))
}

pub fn materialize_dataset(
    source: &DataSource,
    seed: u64,
) -> Result<(Dataset, Vec<String>), CliError> {
    match source {
        DataSource::Csv { path, label_column } => {
            let loaded = load_csv(path, label_column)?;
            Ok((loaded.dataset, loaded.label_mapping))
        }
        DataSource::Epistasis(spec) => {
            let mut rng = seeded_rng(derive_seed(seed, 42));
            let (ds, _) = simulate_epistatic_dataset(spec, &mut rng)?;
            let mapping = (0..ds.class_count()).map(|c| c.to_string()).collect();
            Ok((ds, mapping))
        }
        DataSource::HillValley(spec) => {
            let mut rng = seeded_rng(derive_seed(seed, 43));
            let ds = generate_hill_valley(spec, &mut rng)?;
            let mapping = (0..ds.class_count()).map(|c| c.to_string()).collect();
            Ok((ds, mapping))
        }
    }
}

fn row_fingerprint(ds: &Dataset, i: usize) -> u64 {
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    for col in ds.columns() {
        col[i].to_bits().hash(&mut hasher);
    }
    ds.labels()[i].hash(&mut hasher);
    hasher.finish()
}

/// Holdout rows must never reach an arm. With duplicate source rows the
/// hash check is ambiguous, so it degrades to the (always sound) structural
/// index disjointness of the split.
fn taint_check(parent: &Dataset, train: &Dataset, test: &Dataset) -> Result<String, CliError> {
    let parent_hashes: Vec<u64> = (0..parent.n_rows()).map(|i| row_fingerprint(parent, i)).collect();
    let unique: HashSet<u64> = parent_hashes.iter().copied().collect();
    if unique.len() < parent_hashes.len() {
        return Ok("skipped: source contains duplicate rows (index disjointness holds)".into());
    }
    let train_hashes: HashSet<u64> =
        (0..train.n_rows()).map(|i| row_fingerprint(train, i)).collect();
    for i in 0..test.n_rows() {
        if train_hashes.contains(&row_fingerprint(test, i)) {
            return Err(CliError::Run(format!(
                "taint check failed: holdout row {i} present in an arm-visible dataset"
            )));
        }
    }
    Ok("passed".into())
}

struct ArmOutcome {
    record: Option<ReplicateRecord>,
    failure: Option<FailureRecord>,
    pipeline_doc: Option<String>,
    run_millis: u64,
}

fn run_arm(
    arm: Arm,
    replicate: usize,
    outer_train: &Dataset,
    outer_test: &Dataset,
    gp: &GpConfig,
    seed_r: u64,
) -> ArmOutcome {
    let started = Instant::now();
    let arm_seed = derive_seed(seed_r, arm.stream());
    let outcome: Result<(f64, usize, f64, String, Option<String>), CliError> = (|| {
        match arm {
            Arm::RfBaseline => {
                let (acc, size) = run_rf_baseline(outer_train, outer_test, arm_seed, 500)?;
                let pipeline = rf_baseline_pipeline(500);
                Ok((acc, size, acc, pipeline.render(), Some(serialize(&pipeline))))
            }
            Arm::RandomSearch | Arm::Guided | Arm::Pareto => {
                let mode = match arm {
                    Arm::RandomSearch => SelectionMode::RandomSearch,
                    Arm::Guided => SelectionMode::Standard,
                    Arm::Pareto => SelectionMode::Pareto,
                    Arm::RfBaseline => unreachable!(),
                };
                let cfg = GpConfig { selection_mode: mode, seed: arm_seed, ..gp.clone() };
                let run: RunResult = evolve_run(&cfg, outer_train)?;
                let best = &run.best;
                let internal = best.fitness.as_ref().expect("best is evaluated");
                if internal.failed {
                    return Err(CliError::Run(
                        "no pipeline evaluated successfully in this run".into(),
                    ));
                }
                let holdout = evaluate_on_split(
                    &best.pipeline,
                    outer_train,
                    outer_test,
                    arm_seed,
                    BASELINE_BUDGET_MILLIS.max(4 * cfg.eval_budget_millis),
                );
                if holdout.failed {
                    return Err(CliError::Run("holdout scoring of the best pipeline failed".into()));
                }
                Ok((
                    holdout.balanced_accuracy,
                    best.pipeline.size(),
                    internal.balanced_accuracy,
                    best.pipeline.render(),
                    Some(serialize(&best.pipeline)),
                ))
            }
        }
    })();
    let run_millis = started.elapsed().as_millis() as u64;
    match outcome {
        Ok((holdout_accuracy, pipeline_size, internal_accuracy, rendered, doc)) => ArmOutcome {
            record: Some(ReplicateRecord {
                arm: arm.name().to_string(),
                replicate,
                holdout_accuracy,
                pipeline_size,
                internal_accuracy,
                pipeline: rendered,
            }),
            failure: None,
            pipeline_doc: doc,
            run_millis,
        },
        Err(e) => ArmOutcome {
            record: None,
            failure: Some(FailureRecord {
                arm: arm.name().to_string(),
                replicate,
                error: e.to_string(),
            }),
            pipeline_doc: None,
            run_millis,
        },
    }
}

pub struct ExperimentOutput {
    pub report: ExperimentReport,
    /// (arm, replicate) -> serialized best pipeline document.
    pub pipelines: Vec<(String, usize, String)>,
}

/// Run every (arm, replicate) job: one source dataset, re-seeded stratified
/// outer splits per replicate, arms confined to outer-train.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput, CliError> {
    spec.validate()?;
    let total_started = Instant::now();
    let (data, label_mapping) = materialize_dataset(&spec.dataset, spec.seed)?;
    let gp = spec.resolved_gp();
    let replicates = spec.replicate_count();
    let train_fraction = 1.0 - spec.outer_holdout_fraction;

    // splits up front so a taint failure aborts before any arm runs
    let mut splits = Vec::with_capacity(replicates);
    let mut taint_status = String::new();
    for r in 0..replicates {
        let seed_r = derive_seed(spec.seed, 1000 + r as u64);
        let split = stratified_split(&data, train_fraction, derive_seed(seed_r, 0))
            .map_err(|e| CliError::Data(format!("outer split for replicate {r}: {e}")))?;
        taint_status = taint_check(&data, &split.train, &split.test)?;
        splits.push((r, seed_r, split));
    }

    let jobs: Vec<(Arm, usize)> = spec
        .arms
        .iter()
        .flat_map(|&arm| (0..replicates).map(move |r| (arm, r)))
        .collect();
    let outcomes: Vec<(Arm, usize, ArmOutcome)> = jobs
        .par_iter()
        .map(|&(arm, r)| {
            let (_, seed_r, split) = &splits[r];
            (arm, r, run_arm(arm, r, &split.train, &split.test, &gp, *seed_r))
        })
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut pipelines = Vec::new();
    let mut per_record_timing = Vec::new();
    for (arm, r, outcome) in outcomes {
        per_record_timing.push(RecordTiming {
            arm: arm.name().to_string(),
            replicate: r,
            run_millis: outcome.run_millis,
        });
        if let Some(rec) = outcome.record {
            records.push(rec);
        }
        if let Some(f) = outcome.failure {
            failures.push(f);
        }
        if let Some(doc) = outcome.pipeline_doc {
            pipelines.push((arm.name().to_string(), r, doc));
        }
    }
    records.sort_by(|a, b| (&a.arm, a.replicate).cmp(&(&b.arm, b.replicate)));
    failures.sort_by(|a, b| (&a.arm, a.replicate).cmp(&(&b.arm, b.replicate)));
    pipelines.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    per_record_timing.sort_by(|a, b| (&a.arm, a.replicate).cmp(&(&b.arm, b.replicate)));

    let mut summary = Vec::new();
    for arm in &spec.arms {
        let arm_records: Vec<&ReplicateRecord> =
            records.iter().filter(|r| r.arm == arm.name()).collect();
        if !arm_records.is_empty() {
            summary.push(summarize_arm(arm.name(), &arm_records));
        }
    }

    let report = ExperimentReport {
        version: REPORT_VERSION.to_string(),
        body: ReportBody {
            dataset: spec.dataset.describe(),
            arms: spec.arms.iter().map(|a| a.name().to_string()).collect(),
            replicates,
            outer_holdout_fraction: spec.outer_holdout_fraction,
            seed: spec.seed,
            gp,
            label_mapping,
            replicate_note:
                "replicates are re-seeded stratified outer splits of one source dataset"
                    .to_string(),
            taint_check: taint_status,
            records,
            failures,
            summary,
        },
        timing: ReportTiming {
            total_millis: total_started.elapsed().as_millis() as u64,
            per_record: per_record_timing,
        },
    };
    Ok(ExperimentOutput { report, pipelines })
}

/// Write report.json, replicates.csv and the serialized best pipelines.
pub fn write_outputs(output: &ExperimentOutput, dir: &Path) -> Result<(), CliError> {
    let write_err = |path: &Path, source: std::io::Error| CliError::WriteArtifact {
        path: path.display().to_string(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(|e| write_err(dir, e))?;
    let report_path = dir.join("report.json");
    let text = serde_json::to_string_pretty(&output.report).expect("report serializes");
    std::fs::write(&report_path, text).map_err(|e| write_err(&report_path, e))?;

    let csv_path = dir.join("replicates.csv");
    std::fs::write(&csv_path, records_csv(&output.report.body.records))
        .map_err(|e| write_err(&csv_path, e))?;

    let pipes = dir.join("pipelines");
    std::fs::create_dir_all(&pipes).map_err(|e| write_err(&pipes, e))?;
    for (arm, replicate, doc) in &output.pipelines {
        let path = pipes.join(format!("{arm}_{replicate}.json"));
        std::fs::write(&path, doc).map_err(|e| write_err(&path, e))?;
    }
    Ok(())
}

/// The deterministic portion of a report, serialized.
pub fn report_body_bytes(report: &ExperimentReport) -> Vec<u8> {
    serde_json::to_vec_pretty(&report.body).expect("body serializes")
}

/// Convenience for generator subcommands: write CSV plus a JSON sidecar.
pub fn write_generated(
    ds: &Dataset,
    sidecar: Option<&impl Serialize>,
    out: &Path,
) -> Result<(), CliError> {
    write_csv(ds, out).map_err(CliError::from)?;
    if let Some(meta) = sidecar {
        let meta_path = out.with_extension("meta.json");
        let text = serde_json::to_string_pretty(meta).expect("metadata serializes");
        std::fs::write(&meta_path, text).map_err(|source| CliError::WriteArtifact {
            path: meta_path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

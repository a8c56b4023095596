//! Run artifact ("tpot-run/1"): config echo, per-generation log, best
//! pipeline and its internal fitness. Written by `evolve`, read by `export`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use tpot_core::evolve::{GenerationStats, GpConfig, RunResult};
use tpot_core::pipeline::{deserialize, serialize, FitnessRecord, Pipeline};

use crate::error::CliError;

pub const RUN_VERSION: &str = "tpot-run/1";

#[derive(Debug, Serialize, Deserialize)]
pub struct RunArtifact {
    pub version: String,
    pub dataset: String,
    pub config: GpConfig,
    pub total_evaluations: usize,
    pub history: Vec<GenerationStats>,
    pub best_internal_fitness: FitnessRecord,
    pub best_rendered: String,
    /// Embedded "tpot-tree/1" document.
    pub best_pipeline: serde_json::Value,
    pub pareto_front: Vec<ParetoEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ParetoEntry {
    pub accuracy: f64,
    pub size: usize,
    pub rendered: String,
}

pub fn artifact_from_run(run: &RunResult, dataset: String, config: &GpConfig) -> RunArtifact {
    let best_fit = run.best.fitness.clone().expect("best pipeline evaluated");
    let tree_doc: serde_json::Value =
        serde_json::from_str(&serialize(&run.best.pipeline)).expect("tree doc is json");
    RunArtifact {
        version: RUN_VERSION.to_string(),
        dataset,
        config: config.clone(),
        total_evaluations: run.total_evaluations,
        history: run.history.clone(),
        best_internal_fitness: best_fit,
        best_rendered: run.best.pipeline.render(),
        best_pipeline: tree_doc,
        pareto_front: run
            .pareto_front
            .iter()
            .map(|ind| {
                let f = ind.fitness.as_ref().expect("front evaluated");
                ParetoEntry {
                    accuracy: f.balanced_accuracy,
                    size: f.size,
                    rendered: ind.pipeline.render(),
                }
            })
            .collect(),
    }
}

pub fn write_run(artifact: &RunArtifact, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(artifact).expect("run artifact serializes");
    std::fs::write(path, text).map_err(|source| CliError::WriteArtifact {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_run(path: &Path) -> Result<RunArtifact, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadData {
        path: path.display().to_string(),
        source,
    })?;
    let artifact: RunArtifact = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if artifact.version != RUN_VERSION {
        return Err(CliError::Data(format!(
            "unsupported run artifact version `{}`",
            artifact.version
        )));
    }
    Ok(artifact)
}

/// Export the best pipeline: the tree document at `out`, the human-readable
/// rendering alongside it. Refuses runs whose best evaluation failed.
pub fn export_pipeline(artifact: &RunArtifact, out: &Path) -> Result<Pipeline, CliError> {
    if artifact.best_internal_fitness.failed {
        return Err(CliError::Run(
            "run has no successfully evaluated pipeline; nothing to export".into(),
        ));
    }
    let doc_text =
        serde_json::to_string_pretty(&artifact.best_pipeline).expect("tree doc serializes");
    let pipeline = deserialize(&doc_text)
        .map_err(|e| CliError::Data(format!("embedded pipeline document invalid: {e}")))?;
    std::fs::write(out, &doc_text).map_err(|source| CliError::WriteArtifact {
        path: out.display().to_string(),
        source,
    })?;
    let rendered_path = out.with_extension("txt");
    std::fs::write(&rendered_path, format!("{}\n", pipeline.render())).map_err(|source| {
        CliError::WriteArtifact { path: rendered_path.display().to_string(), source }
    })?;
    Ok(pipeline)
}

//! Data generators for the benchmark harness: a pure-epistasis SNP simulator
//! built on penetrance tables with target heritability, and a synthetic
//! hill/valley series generator.

mod csv;
mod epistasis;
mod hillvalley;
mod penetrance;

pub use csv::write_csv;
pub use epistasis::{
    simulate_epistatic_dataset, simulate_with_tables, EpistasisMetadata, EpistasisSpec,
};
pub use hillvalley::{generate_hill_valley, rule_oracle, HillValleySpec};
pub use penetrance::{
    generate_pure_epistatic_table, genotype_probs, heritability_of, PenetranceTable,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("heritability undefined: prevalence is {0}")]
    UndefinedHeritability(f64),
    #[error("table generation failed after {tries} tries (best residual {best_residual:.6})")]
    GenerationFailed { tries: usize, best_residual: f64 },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("sampling exhausted: {0}")]
    SamplingExhausted(String),
    #[error("cannot write `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Dataset(#[from] crate::dataset::DatasetError),
}

/// Standard normal draw (Box-Muller); keeps the crate off heavier
/// distribution dependencies.
pub(crate) fn standard_normal<R: rand::Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

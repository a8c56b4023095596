//! Library side of the benchmark harness: CSV ingestion, experiment
//! orchestration (four comparison arms over re-seeded outer splits),
//! reporting, and run-artifact I/O shared by the CLI binary and tests.

pub mod csvio;
pub mod error;
pub mod experiment;
pub mod report;
pub mod runio;

pub use error::CliError;

//! Error type with the process exit-code mapping:
//! 0 success, 1 usage, 2 data error, 3 run failure.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read `{path}`: {source}")]
    ReadData { path: String, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    CsvParse { path: String, line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    CsvSchema { path: String, message: String },
    #[error("data error: {0}")]
    Data(String),
    #[error("run failed: {0}")]
    Run(String),
    #[error("cannot write `{path}`: {source}")]
    WriteArtifact { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::ReadData { .. }
            | CliError::CsvParse { .. }
            | CliError::CsvSchema { .. }
            | CliError::Data(_) => 2,
            CliError::Run(_) | CliError::WriteArtifact { .. } => 3,
        }
    }
}

impl From<tpot_core::datagen::DatagenError> for CliError {
    fn from(e: tpot_core::datagen::DatagenError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<tpot_core::dataset::DatasetError> for CliError {
    fn from(e: tpot_core::dataset::DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<tpot_core::evolve::EvolveError> for CliError {
    fn from(e: tpot_core::evolve::EvolveError) -> Self {
        CliError::Run(e.to_string())
    }
}

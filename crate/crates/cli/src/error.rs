use std::path::PathBuf;

use snh_core::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("identity check failed: {0}")]
    Identity(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Data { path: PathBuf, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(e) if is_usage(e) => 64,
            CliError::Solver(e) if is_bad_data(e) => 65,
            CliError::Solver(_) => 1,
            CliError::Identity(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Usage(_) => 64,
            CliError::Data { .. } => 65,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Invalid problem parameters are caller mistakes, not solver failures.
fn is_usage(e: &SolverError) -> bool {
    matches!(e.root(), SolverError::InvalidSpec(_) | SolverError::Domain { .. })
}

/// Fits rejecting their input data.
fn is_bad_data(e: &SolverError) -> bool {
    matches!(e.root(), SolverError::FitDomain(_) | SolverError::ModelNotApplicable(_))
}

use std::path::PathBuf;

use thiserror::Error;

use crate::prefmat::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix shape: {0}")]
    Shape(String),

    #[error("invalid preference matrix: {}", join(.0))]
    Invalid(Vec<Violation>),

    #[error("matrix has an off-diagonal tie at ({0}, {1}); this operation requires no ties")]
    Tie(usize, usize),

    #[error("inconsistent preference structure: {0}")]
    Inconsistent(String),

    #[error("index {index} out of range for {k} arms")]
    IndexOutOfRange { index: usize, k: usize },

    #[error("duplicate index {0}")]
    DuplicateIndex(usize),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("power iteration did not converge within {0} steps")]
    NonConvergence(usize),

    #[error("fixed-point iteration diverged: {0}")]
    Divergence(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

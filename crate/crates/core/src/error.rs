use thiserror::Error;

use crate::model::{ParseErrors, Violation};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid network: {}", join(.0))]
    InvalidNetwork(Vec<Violation>),

    #[error(transparent)]
    Parse(#[from] ParseErrors),

    #[error("unknown variable {0}")]
    UnknownVariable(String),

    #[error("{0} is not a concept variable")]
    NotAConcept(String),

    #[error("zero-probability evidence")]
    ZeroProbabilityEvidence,

    #[error("conflicting evidence on {0}: a variable takes either hard or virtual evidence")]
    ConflictingEvidence(String),

    #[error("invalid likelihood pair ({0}, {1}) on {2}")]
    InvalidLikelihood(f64, f64, String),

    #[error("network has {0} variables; enumeration is capped at {1}")]
    TooManyVariables(usize, usize),

    #[error("unknown column {0}")]
    UnknownColumn(String),

    #[error("duplicate column {0}")]
    DuplicateColumn(String),

    #[error("degenerate concept column {0}")]
    DegenerateConcept(String),

    #[error("clique of {0} variables exceeds the limit of {1}")]
    CliqueTooLarge(usize, usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid lexicon: {0}")]
    InvalidLexicon(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

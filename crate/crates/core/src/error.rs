use thiserror::Error;

use crate::model::Concept;

/// Violations of the problem data model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate output identifier `{0}`")]
    DuplicateOutput(String),
    #[error("duplicate concept label {0}")]
    DuplicateConcept(Concept),
    #[error("constraint references output #{0}, which does not exist")]
    UnknownOutput(usize),
    #[error("mapping has {found} entries, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("concept {0} is not in the concept domain")]
    ConceptOutOfDomain(Concept),
    #[error("malformed constraint: {0}")]
    MalformedConstraint(String),
    #[error("bijection mode needs |N| = |S|, got {outputs} outputs and {concepts} concepts")]
    BijectionSize { outputs: usize, concepts: usize },
    #[error("{0}")]
    InvalidArgument(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("search space of {required} exceeds the limit of {limit}")]
    ResourceLimit { required: u128, limit: u128 },
    #[error("cannot export to ASP: {0}")]
    UnsupportedExport(String),
    #[error("DIMACS line {line}: {message}")]
    Dimacs { line: usize, message: String },
    #[error("set cover input line {line}: {message}")]
    SetCoverFormat { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

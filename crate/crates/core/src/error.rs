use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the model, reasoner and pipeline phases.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no binding for adaptor `{0}`")]
    MissingBinding(String),

    #[error("unknown adaptor `{0}`")]
    UnknownAdaptor(String),

    #[error("ontology is not ground: adaptor `{0}` is still referenced")]
    NotGround(String),

    #[error("branch budget of {limit} exceeded while checking individual `{individual}`")]
    BudgetExceeded { individual: String, limit: usize },

    #[error("training axiom {axiom} uses `{name}`, which is not in the ontology signature")]
    Signature { axiom: usize, name: String },

    #[error("no evidence to learn from for adaptor `{0}`")]
    NoEvidence(String),

    #[error("value {value} is outside the domain of adaptor `{adaptor}`: {reason}")]
    Domain {
        adaptor: String,
        value: f64,
        reason: String,
    },

    #[error("invalid ontology: {0}")]
    InvalidOntology(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {message}", path.display())]
    Fixture { path: PathBuf, message: String },

    #[error("decode error at line {line}, column {column}: {message}")]
    Decode {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

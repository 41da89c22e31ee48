use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("vertex `{vertex}` has non-positive measure {value}")]
    NonPositiveMeasure { vertex: String, value: f64 },
    #[error("edge `{u}`-`{v}` has non-positive weight {value}")]
    NonPositiveWeight { u: String, v: String, value: f64 },
    #[error("edge endpoint `{0}` is not a vertex")]
    UnknownEndpoint(String),
    #[error("edge `{u}`-`{v}` is listed twice")]
    DuplicateEdge { u: String, v: String },
    #[error("self loop at `{0}`")]
    SelfLoop(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("graph has {n} vertices, above the dense eigensolver cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("gamma function requires a positive argument, got {0}")]
    NonPositiveArgument(f64),
    #[error("fractional exponent s = {0} is outside (0, 1)")]
    InvalidS(f64),
    #[error("quadrature did not converge: relative error {achieved:e} after {panels} panels")]
    QuadratureNotConverged { achieved: f64, panels: usize },
    #[error("invalid quadrature configuration: {0}")]
    InvalidQuadrature(String),

    #[error("vector field layout does not match the kernel")]
    LayoutMismatch,
    #[error("potential infimum {0} is not positive")]
    NonPositivePotential(f64),

    #[error("unknown nonlinearity `{0}`")]
    UnknownName(String),
    #[error("invalid nonlinearity parameter: {0}")]
    InvalidParam(String),
    #[error("the {0} part of the function vanishes identically")]
    WrongSignPart(&'static str),
    #[error("could not bracket the Nehari scaling (t reached {0:e})")]
    BracketFailure(f64),
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidSolverConfig(String),

    #[error("config schema error: {0}")]
    Schema(String),
    #[error("config range error: {0}")]
    Range(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn from_json(err: &serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

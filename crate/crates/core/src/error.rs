use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value outside its documented domain.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("series length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("tariff `{plan}`: {message}")]
    Tariff { plan: String, message: String },

    #[error("{path}: {message}")]
    Ingest { path: PathBuf, message: String },

    #[error("{path}, row {row}: {message}")]
    IngestRow {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("configuration: {0}")]
    Config(String),

    #[error("configuration {tilt_deg}/{azimuth_deg}/{panels} violates {bound}")]
    BoundViolation {
        tilt_deg: f64,
        azimuth_deg: f64,
        panels: f64,
        bound: String,
    },

    #[error("MIRR undefined: {0}")]
    MirrUndefined(&'static str),

    #[error(
        "no feasible point found; best infeasible position {position:?} with violation {violation}"
    )]
    NoFeasibleSolution { position: [f64; 3], violation: f64 },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True for errors caused by bad user data or configuration rather than
    /// an optimizer outcome.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::NoFeasibleSolution { .. })
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("{0}")]
    MultiSubsystem(String),

    #[error("integration failed at t = {time:.6} us: {reason}")]
    Integration { time: f64, reason: String },

    #[error("regression propagation failed for (t_i, t_j) = ({t_i:.6}, {t_j:.6}) us: {source}")]
    Regression {
        t_i: f64,
        t_j: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("all {count} candidates failed; first error: {first}")]
    AllCandidatesFailed { count: usize, first: String },

    #[error("data integrity: {0}")]
    DataIntegrity(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("asymmetric SQUID is not supported (m1 = {m1:.6}, m2 = {m2:.6})")]
    AsymmetricSquid { m1: f64, m2: f64 },

    #[error("unsupported flux bias: cos(phi_dc/2) = {cos_half:.3e} must be positive")]
    UnsupportedBias { cos_half: f64 },

    #[error("eigen-solver failure: {0}")]
    EigenSolver(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("config error in {path}: missing key `{key}`")]
    MissingKey { path: PathBuf, key: String },

    #[error("config error in {path}, line {line}: {message}")]
    ConfigLine {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// True for errors caused by bad user input rather than a failing simulation.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::MissingKey { .. }
                | Error::ConfigLine { .. }
                | Error::Manifest(_)
                | Error::AsymmetricSquid { .. }
                | Error::UnsupportedBias { .. }
                | Error::Unsupported(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

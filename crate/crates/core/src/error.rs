use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the generation, simulation and analysis stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cloud is empty")]
    EmptyCloud,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    #[error("placed {placed} of {requested} trees after {attempts} attempts")]
    PlacementFailure {
        requested: usize,
        placed: usize,
        attempts: usize,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag, used as the CLI error prefix.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyCloud => "empty-cloud",
            Error::Config(_) => "config",
            Error::DegenerateMesh(_) => "degenerate-mesh",
            Error::PlacementFailure { .. } => "placement-failure",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
        }
    }

    /// Process exit status for this error. Usage errors from argument
    /// parsing use 2, so module errors start at 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 3,
            Error::Io { .. } => 4,
            Error::Parse { .. } => 5,
            Error::EmptyCloud => 6,
            Error::DegenerateMesh(_) => 7,
            Error::PlacementFailure { .. } => 8,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the SPx toolkit.
///
/// Each variant maps onto one of the CLI error categories via [`Error::category`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: row {row}: {message}")]
    DataRow {
        path: String,
        row: usize,
        message: String,
    },

    #[error("degenerate posterior draws: {0}")]
    Degenerate(String),

    #[error("replicate {replicate} (seed {seed:#018x}) failed: {source}")]
    Replicate {
        replicate: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Runtime(String),
}

/// Coarse error class used for exit codes and machine-parsable messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Data,
    Runtime,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Config => "config",
            Category::Data => "data",
            Category::Runtime => "runtime",
        }
    }
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::InvalidConfig(_) => Category::Config,
            Error::InvalidDataset(_) | Error::DataRow { .. } | Error::Domain(_) => Category::Data,
            Error::Replicate { source, .. } => source.category(),
            Error::Degenerate(_) | Error::Io { .. } | Error::Runtime(_) => Category::Runtime,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere in the pipeline.
///
/// Variants map onto the contract classes used by the command line: `Io`
/// exits with status 2, every other variant is a contract error (status 1).
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed bytes: bad magic, corrupt header, truncation, wrong pixel format.
    #[error("format error: {0}")]
    Format(String),

    /// Well-formed bytes whose content violates a type invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Image or window geometry that cannot be processed.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Vector dimensionality does not match the index or model.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("target error: {0}")]
    Target(String),

    #[error("length mismatch: {left} vs {right}")]
    Length { left: usize, right: usize },

    #[error("empty input")]
    Empty,

    #[error("value out of range: {0}")]
    Range(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unmatched inputs: {}", .0.join(", "))]
    MissingPair(Vec<String>),

    /// A pipeline stage failed; carries the stage name.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self.root(), Error::Io { .. })
    }
}

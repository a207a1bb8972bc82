use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("empty study: no hypotheses left to test (m = 0)")]
    EmptyStudy,

    #[error("enumeration truncated: {deficit:.3e} probability mass unaccounted for, raise the truncation bound above {truncation}")]
    Truncation { deficit: f64, truncation: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-parsable category used by the command-line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "input",
            Error::Parse { .. } => "parse",
            Error::File { source, .. } => source.category(),
            Error::Config(_) => "config",
            Error::EmptyStudy => "empty",
            Error::Truncation { .. } => "truncation",
            Error::Io(_) => "io",
            Error::Json(_) | Error::Csv(_) => "format",
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Error {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

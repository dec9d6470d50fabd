use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Config { path: String, line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{context}: {message}")]
    Format { context: String, message: String },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("scenario '{scenario}': {source}")]
    Solver {
        scenario: String,
        #[source]
        source: shalegas_core::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn solver(scenario: &str, source: impl Into<shalegas_core::Error>) -> Self {
        Error::Solver {
            scenario: scenario.to_string(),
            source: source.into(),
        }
    }

    /// Process exit code: 1 for configuration and input problems, 2 for
    /// failures inside the solver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Solver { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

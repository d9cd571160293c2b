use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("event scheduled at t={fire_time} but clock is already at t={now}")]
    EventInPast { fire_time: f64, now: f64 },

    #[error("invalid config: `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite parameter after update in {0}")]
    NonFinite(&'static str),

    #[error("task {0} recorded twice")]
    DuplicateRecord(usize),

    #[error("conservation violated at t={time}: generated {generated} != {accounted} accounted")]
    Conservation {
        time: f64,
        generated: usize,
        accounted: usize,
    },

    #[error("policy `{0}` cannot be trained")]
    NotTrainable(String),

    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),

    #[error("malformed policy artifact: {0}")]
    Artifact(String),

    #[error("{0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for validation problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::ConfigParse(_)
            | Error::NotTrainable(_)
            | Error::UnknownPolicy(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

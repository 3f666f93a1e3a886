use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library reports. The variant is the error category the
/// CLI prints before the message.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible design: {0}")]
    InfeasibleDesign(String),

    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    /// An identity that must hold by construction failed. Never valid output.
    #[error("internal consistency fault: {0}")]
    ConsistencyFault(String),

    #[error("no verified cases on day {day}")]
    NoVerifiedCases { day: u32 },

    #[error("not computable: {0}")]
    NotComputable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short category label used for CLI diagnostics.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "config",
            Error::InvalidArgument(_) => "argument",
            Error::InfeasibleDesign(_) => "design",
            Error::InconsistentInput(_) => "input",
            Error::ConsistencyFault(_) => "internal",
            Error::NoVerifiedCases { .. } => "data",
            Error::NotComputable(_) => "estimation",
            Error::Parse(_) | Error::Csv(_) | Error::Json(_) => "parse",
            Error::Write { .. } | Error::Io(_) => "io",
        }
    }
}

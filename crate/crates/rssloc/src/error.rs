use serde::Serialize;

use crate::bench::ConfigError;

/// Errors surfaced by the command-line front end. Each maps to an exit code
/// and a `kind` string in the JSON error printed on stderr.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    InvalidInput(String),
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("cannot write output: {0}")]
    Write(String),
    #[error("{0}")]
    Numeric(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorFields<'a>,
}

#[derive(Serialize)]
struct ErrorFields<'a> {
    kind: &'a str,
    message: String,
    exit_code: i32,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "schema",
            CliError::InvalidInput(_) => "invalid-input",
            CliError::Read { .. } => "io",
            CliError::Write(_) => "output",
            CliError::Numeric(_) => "numeric",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) | CliError::InvalidInput(_) | CliError::Read { .. } => 2,
            CliError::Write(_) | CliError::Numeric(_) => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorBody {
            error: ErrorFields {
                kind: self.kind(),
                message: self.to_string(),
                exit_code: self.exit_code(),
            },
        })
        .expect("error body serializes")
    }
}

impl From<rssloc_core::Error> for CliError {
    fn from(e: rssloc_core::Error) -> Self {
        use rssloc_core::Error as E;
        match e {
            E::InvalidInput(_)
            | E::DimensionMismatch { .. }
            | E::InsufficientSensors { .. }
            | E::UnknownScenario(_) => CliError::InvalidInput(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Invalid(m) => CliError::InvalidInput(m),
            ConfigError::Model(e) => CliError::InvalidInput(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Write(e.to_string())
    }
}
